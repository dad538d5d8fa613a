"""Damping channels and weak/reverse measurement operators.

Two single-qubit noise models are provided as Kraus channels:

* phase damping (strength ``q``): kills off-diagonal coherence, leaves
  populations alone;
* amplitude damping (strength ``p``): decays ``|1>`` toward ``|0>``,
  fixing ``|0>``.

On top of these sit the non-projective measurement operators used for
fidelity protection: a forward weak measurement of strength ``s`` whose
null outcome biases the state toward ``|0>`` reversibly (the click outcome
collapses onto ``|1>`` and is discarded), and a reverse measurement of
strength ``r`` that biases back toward ``|1>`` after the noise has acted.

Selective operations return the unnormalized post-selected state together
with its trace, which is the branch probability; they never renormalize,
because the success probabilities of the protection scheme are defined as
traces of unnormalized states.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass
from typing import Tuple

import numpy as np

from .linalg import DensityMatrix, dagger, embed
from .tolerances import LINALG_ATOL

__all__ = [
    "KrausChannel",
    "WeakMeasurementOp",
    "FORWARD_NULL",
    "FORWARD_CLICK",
    "REVERSE",
    "pdc",
    "adc",
    "apply_channel",
    "weak_op",
    "apply_selective",
    "validate_cptp",
]

FORWARD_NULL = "forward_null"
FORWARD_CLICK = "forward_click"
REVERSE = "reverse"

_WEAK_KINDS = (FORWARD_NULL, FORWARD_CLICK, REVERSE)


def _check_strength(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class KrausChannel:
    """Ordered Kraus operators of a completely positive trace-preserving map.

    ``check=False`` skips the completeness check at construction; it exists
    for negative controls (deliberately corrupted channels fed to
    ``validate_cptp``), not for regular use.
    """

    operators: Tuple[np.ndarray, ...]
    label: str
    strength: float
    check: InitVar[bool] = True

    def __post_init__(self, check: bool) -> None:
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "operators", ops)
        if check:
            residual = validate_cptp(self)
            if residual > LINALG_ATOL:
                raise ValueError(f"Kraus operators are not complete: residual {residual}")


@dataclass(frozen=True)
class WeakMeasurementOp:
    """Single measurement operator of the protection scheme.

    ``forward_null`` and ``reverse`` are invertible for strength < 1 and can
    therefore be undone; ``forward_click`` has no inverse (the qubit is
    gone for good once the detector fires).
    """

    kind: str
    strength: float
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if self.kind not in _WEAK_KINDS:
            raise ValueError(f"unknown measurement kind {self.kind!r}")
        mat = np.asarray(self.matrix, dtype=complex)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


def pdc(q: float) -> KrausChannel:
    """Phase damping channel of strength ``q``.

    Kraus operators ``sqrt(1-q) I``, ``sqrt(q)|0><0|``, ``sqrt(q)|1><1|``.
    Diagonal states are fixed points for every ``q``.
    """
    q = _check_strength(q, "phase damping strength")
    k0 = np.sqrt(1.0 - q) * np.eye(2)
    k1 = np.array([[np.sqrt(q), 0.0], [0.0, 0.0]])
    k2 = np.array([[0.0, 0.0], [0.0, np.sqrt(q)]])
    return KrausChannel((k0, k1, k2), label="pdc", strength=q)


def adc(p: float) -> KrausChannel:
    """Amplitude damping channel of strength ``p``.

    Kraus operators ``|0><0| + sqrt(1-p)|1><1|`` and ``sqrt(p)|0><1|``.
    ``|0><0|`` is a fixed point for every ``p``; this is the property the
    weak-measurement protection scheme exploits.
    """
    p = _check_strength(p, "amplitude damping strength")
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - p)]])
    k1 = np.array([[0.0, np.sqrt(p)], [0.0, 0.0]])
    return KrausChannel((k0, k1), label="adc", strength=p)


def make_channel(kind: str, strength: float) -> KrausChannel:
    """Channel constructor keyed by kind name (``"pdc"`` or ``"adc"``)."""
    if kind == "pdc":
        return pdc(strength)
    if kind == "adc":
        return adc(strength)
    raise ValueError(f"unknown channel kind {kind!r}")


def apply_channel(rho: DensityMatrix, ch: KrausChannel, qubit: int) -> DensityMatrix:
    """Apply a single-qubit channel to one qubit of a register state.

    Computes ``sum_i E_i rho E_i^dag`` with each ``E_i`` the Kraus operator
    lifted to the full register. Trace is preserved exactly; applying the
    same channel to two qubits in sequence equals the double Kraus sum over
    both qubits.
    """
    return DensityMatrix(_apply_channel_matrix(rho.matrix, ch, qubit, rho.num_qubits))


def _apply_channel_matrix(mat: np.ndarray, ch: KrausChannel, qubit: int, m: int) -> np.ndarray:
    out = np.zeros_like(mat)
    for k in ch.operators:
        e = embed(k, [qubit], m)
        out += e @ mat @ dagger(e)
    return out


def weak_op(kind: str, strength: float) -> WeakMeasurementOp:
    """Build a weak (forward) or reverse measurement operator.

    ``forward_null``: diag(1, sqrt(1-s)) -- detector stayed silent.
    ``forward_click``: diag(0, sqrt(s)) -- detector fired, qubit collapsed.
    ``reverse``: diag(sqrt(1-r), 1) -- post-noise reversal.

    The forward pair is complete: ``M0^dag M0 + M1^dag M1 = I``.
    """
    strength = _check_strength(strength, "measurement strength")
    if kind == FORWARD_NULL:
        matrix = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - strength)]])
    elif kind == FORWARD_CLICK:
        matrix = np.array([[0.0, 0.0], [0.0, np.sqrt(strength)]])
    elif kind == REVERSE:
        matrix = np.array([[np.sqrt(1.0 - strength), 0.0], [0.0, 1.0]])
    else:
        raise ValueError(f"unknown measurement kind {kind!r}")
    return WeakMeasurementOp(kind=kind, strength=strength, matrix=matrix)


def apply_selective(
    rho: DensityMatrix, op: WeakMeasurementOp, qubit: int
) -> tuple[DensityMatrix | None, float]:
    """Apply a measurement operator to one qubit, keeping that branch only.

    Returns the unnormalized post-selected state ``E rho E^dag`` and its
    trace, the probability of landing in this branch. The caller decides
    when (and whether) to renormalize. If the branch has zero probability
    the state is ``None``.
    """
    m = rho.num_qubits
    e = embed(op.matrix, [qubit], m)
    out = e @ rho.matrix @ dagger(e)
    prob = float(out.trace().real)
    if prob <= 0.0:
        return None, 0.0
    return DensityMatrix(out), prob


def validate_cptp(ch: KrausChannel) -> float:
    """Max-norm residual of the completeness sum ``sum_i K_i^dag K_i - I``."""
    dim = ch.operators[0].shape[0]
    acc = np.zeros((dim, dim), dtype=complex)
    for k in ch.operators:
        acc += dagger(k) @ k
    return float(np.max(np.abs(acc - np.eye(dim))))
