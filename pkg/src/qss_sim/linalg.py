"""Dense complex linear algebra for small qubit registers.

Everything here is plain dense ``numpy`` over registers of at most 8 qubits:
tensor (Kronecker) products, embedding of local operators at arbitrary qubit
positions, partial trace, Hermitian eigenvalues and a three-angle
parameterization of single-qubit unitaries.

Conventions
-----------
Qubit 0 is the most significant bit of a basis-state label, so the basis
state ``|abc>`` of a 3-qubit register sits at index ``4a + 2b + c``. All
operators and states use this fixed ordering; there is no per-call
convention switch.

States are immutable after construction: the wrapped arrays are marked
read-only, so any value can be shared freely between concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tolerances import LINALG_ATOL, equality_atol

__all__ = [
    "ID2",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "MINUS_I_PAULI_Y",
    "KET_0",
    "KET_1",
    "KET_PLUS",
    "KET_MINUS",
    "PureState",
    "DensityMatrix",
    "tensor",
    "tensor_all",
    "embed",
    "partial_trace",
    "max_eigenvalue",
    "su2",
    "dagger",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


ID2 = _readonly(np.eye(2))
PAULI_X = _readonly([[0, 1], [1, 0]])
PAULI_Y = _readonly([[0, -1j], [1j, 0]])
PAULI_Z = _readonly([[1, 0], [0, -1]])
MINUS_I_PAULI_Y = _readonly([[0, -1], [1, 0]])

KET_0 = _readonly([1, 0])
KET_1 = _readonly([0, 1])
KET_PLUS = _readonly([1 / np.sqrt(2), 1 / np.sqrt(2)])
KET_MINUS = _readonly([1 / np.sqrt(2), -1 / np.sqrt(2)])


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def _num_qubits(dim: int) -> int:
    m = int(round(np.log2(dim)))
    if 2**m != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return m


@dataclass(frozen=True)
class PureState:
    """State vector of an m-qubit register, unit norm within tolerance."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = _readonly(np.asarray(self.amplitudes, dtype=complex).ravel())
        object.__setattr__(self, "amplitudes", amps)
        _num_qubits(amps.size)
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > equality_atol():
            raise ValueError(f"state vector is not normalized: |psi|^2 = {norm2}")

    @property
    def num_qubits(self) -> int:
        return _num_qubits(self.amplitudes.size)

    def density(self) -> "DensityMatrix":
        """Rank-one density matrix |psi><psi|."""
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive-semidefinite state of an m-qubit register.

    The trace may be below one: selective (post-selected) operations return
    sub-normalized states whose trace is the branch probability. A trace of
    zero is not representable; zero-probability branches must be handled by
    the caller before constructing a state.
    """

    matrix: np.ndarray
    trace: float = field(init=False)

    def __post_init__(self) -> None:
        mat = _readonly(np.asarray(self.matrix, dtype=complex))
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {mat.shape}")
        _num_qubits(mat.shape[0])
        atol = equality_atol()
        herm = float(np.max(np.abs(mat - dagger(mat))))
        if herm > atol:
            raise ValueError(f"matrix is not Hermitian: residual {herm}")
        eigs = np.linalg.eigvalsh(mat)
        if eigs[0] < -atol:
            raise ValueError(f"matrix is not positive semidefinite: min eigenvalue {eigs[0]}")
        tr = float(mat.trace().real)
        if not 0.0 < tr <= 1.0 + atol:
            raise ValueError(f"trace must lie in (0, 1], got {tr}")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "trace", tr)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_qubits(self) -> int:
        return _num_qubits(self.dim)

    def normalized(self) -> "DensityMatrix":
        """Unit-trace copy."""
        return DensityMatrix(self.matrix / self.trace)


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices (or vectors)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def tensor_all(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of a sequence of factors, left to right."""
    if not factors:
        raise ValueError("need at least one factor")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def embed(op: np.ndarray, targets: Sequence[int], m: int) -> np.ndarray:
    """Lift a local operator to the full register.

    Parameters
    ----------
    op : ndarray
        Operator of dimension ``2**len(targets)`` acting on the target
        qubits in the order listed.
    targets : sequence of int
        Distinct register positions, each < m.
    m : int
        Register size in qubits.

    Returns
    -------
    ndarray
        The ``2**m x 2**m`` operator acting as ``op`` on the targets and as
        the identity elsewhere.
    """
    targets = list(targets)
    op = np.asarray(op, dtype=complex)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target qubits: {targets}")
    if any(t < 0 or t >= m for t in targets):
        raise ValueError(f"target out of range for {m}-qubit register: {targets}")
    t = len(targets)
    if op.shape != (2**t, 2**t):
        raise ValueError(f"operator shape {op.shape} does not match {t} target qubit(s)")

    rest = [q for q in range(m) if q not in targets]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex))
    # Axis i of the (2,)*2m tensor currently corresponds to register
    # position (targets + rest)[i]; permute to ascending register order.
    order = targets + rest
    perm = [order.index(q) for q in range(m)]
    full = full.reshape((2,) * (2 * m))
    full = full.transpose(perm + [m + p for p in perm])
    return np.ascontiguousarray(full.reshape(2**m, 2**m))


def _partial_trace_matrix(mat: np.ndarray, keep: Sequence[int], m: int) -> np.ndarray:
    keep = list(keep)
    if len(set(keep)) != len(keep) or any(q < 0 or q >= m for q in keep):
        raise ValueError(f"invalid keep set {keep} for {m}-qubit register")
    if not keep:
        raise ValueError("must keep at least one qubit")
    traced = [q for q in range(m) if q not in keep]
    tens = mat.reshape((2,) * (2 * m))
    for q in sorted(traced, reverse=True):
        tens = np.trace(tens, axis1=q, axis2=q + tens.ndim // 2)
    k = len(keep)
    # np.trace leaves the kept axes in ascending register order; reorder to
    # the caller's listed order.
    ascending = sorted(keep)
    perm = [ascending.index(q) for q in keep]
    tens = tens.transpose(perm + [k + p for p in perm])
    return tens.reshape(2**k, 2**k)


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state on the kept qubits (listed order), trace preserved."""
    reduced = _partial_trace_matrix(rho.matrix, keep, rho.num_qubits)
    return DensityMatrix(reduced)


def max_eigenvalue(rho: DensityMatrix) -> float:
    """Largest eigenvalue of a state.

    For a single-qubit state this is the best overlap any unitary can
    achieve with a known pure target, so it upper-bounds every
    correction-based reconstruction fidelity.
    """
    return float(np.linalg.eigvalsh(rho.matrix)[-1])


def su2(theta: float, phi: float, lam: float) -> np.ndarray:
    """Single-qubit unitary from three angles.

    ``su2(0, 0, 0)`` is the identity and ``su2(pi, 0, pi)`` is the bit
    flip. Global phase is omitted; it never affects a fidelity.
    """
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ],
        dtype=complex,
    )


def is_unitary(u: np.ndarray, atol: float = LINALG_ATOL) -> bool:
    """Whether ``u`` is unitary within ``atol``."""
    u = np.asarray(u, dtype=complex)
    return bool(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))) <= atol)
