"""Sequential secret-sharing protocol over a small qubit register.

One iteration shares a single-qubit secret ``alpha|0> + beta|1>`` among
``n`` receivers:

1. the dealer builds an n-qubit GHZ resource by a chained XOR from
   ``|+>|0...0>``,
2. XORs the secret qubit onto it, producing an (n+1)-qubit entangled state,
3. keeps one qubit and transmits the rest (optionally through damping
   noise, optionally sandwiched between forward weak measurements and
   reversals),
4. measures her qubit in the computational basis while every receiver
   except the reconstructor measures in the Hadamard basis,
5. the reconstructor applies a Pauli correction keyed by the announced
   outcomes and ends up holding the secret.

Between iterations the helper receivers return their (collapsed) qubits;
the dealer resets each to ``|0>`` by a projective measurement plus a
conditional bit flip, adds a fresh ``|+>`` qubit, and rebuilds the resource
for the next secret.

Register layout: qubit 1 of the shared state is the first helper's, qubit 2
is the dealer's, the reconstructor holds the last qubit. All measurement
outcomes are enumerated exactly with their probabilities; nothing is
sampled.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .channels import (
    FORWARD_NULL,
    REVERSE,
    KrausChannel,
    _apply_channel_matrix,
    make_channel,
    weak_op,
)
from .linalg import (
    KET_0,
    KET_1,
    KET_MINUS,
    KET_PLUS,
    MINUS_I_PAULI_Y,
    PAULI_X,
    PAULI_Z,
    DensityMatrix,
    PureState,
    _partial_trace_matrix,
    dagger,
    embed,
)
from .tolerances import equality_atol

__all__ = [
    "Secret",
    "NoiseSpec",
    "Wmrqm",
    "ProtocolConfig",
    "MeasurementRecord",
    "IterationReport",
    "ProtocolState",
    "CORRECTION_TABLE",
    "make_resource",
    "encode_secret",
    "withheld_outcome_state",
    "measure_projective",
    "correction",
    "run_iteration",
    "recycle_and_rerun",
    "advance",
    "start_chain",
    "run_protocol",
    "success_probability",
    "aggregate_fidelity",
]

ALICE_QUBIT = 1

# Branches below this (per-iteration) probability are reported but carry no
# reconstructed state; they are never divided by.
ZERO_BRANCH_ATOL = 1e-14


@dataclass(frozen=True)
class Secret:
    """Single-qubit secret ``alpha|0> + beta|1>`` with unit norm."""

    alpha: complex
    beta: complex

    def __post_init__(self) -> None:
        norm2 = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm2 - 1.0) > equality_atol():
            raise ValueError(f"secret amplitudes are not normalized: {norm2}")

    @classmethod
    def from_k(cls, k: float) -> "Secret":
        """Real non-negative secret with ``|alpha|^2 = k``."""
        if not 0.0 <= k <= 1.0:
            raise ValueError(f"k must lie in [0, 1], got {k}")
        return cls(alpha=np.sqrt(k), beta=np.sqrt(1.0 - k))

    @property
    def k(self) -> float:
        """Population of ``|0>``: ``|alpha|^2``."""
        return float(abs(self.alpha) ** 2)

    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)


@dataclass(frozen=True)
class NoiseSpec:
    """Channel kind (``"pdc"`` or ``"adc"``) and strength."""

    kind: str
    strength: float

    def __post_init__(self) -> None:
        if self.kind not in ("pdc", "adc"):
            raise ValueError(f"channel kind must be 'pdc' or 'adc', got {self.kind!r}")
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError(f"channel strength must lie in [0, 1], got {self.strength}")

    def channel(self) -> KrausChannel:
        return make_channel(self.kind, self.strength)


@dataclass(frozen=True)
class Wmrqm:
    """Weak-measurement / reversal protection strengths.

    ``s`` is the forward weak-measurement strength applied before
    transmission, ``r`` the reversal strength applied after the noise.
    """

    s: float
    r: float

    def __post_init__(self) -> None:
        for name, value in (("s", self.s), ("r", self.r)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"measurement strength {name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class ProtocolConfig:
    """Full description of a protocol run.

    ``parties`` counts the receivers (the dealer is extra); ``channel``
    may be a single spec applied to every transmitted qubit, or one entry
    per transmitted qubit (``None`` = noiseless leg). ``return_channel``
    optionally adds noise to the helpers' qubits on their way back to the
    dealer between iterations; the reset makes it irrelevant, which is
    exactly what the sequential-independence tests demonstrate.
    """

    parties: int
    secrets: tuple[Secret, ...]
    channel: NoiseSpec | tuple[NoiseSpec | None, ...] | None = None
    wmrqm: Wmrqm | None = None
    iterations: int = 1
    return_channel: NoiseSpec | None = None

    def __post_init__(self) -> None:
        if self.parties < 2:
            raise ValueError(f"need at least 2 receivers, got {self.parties}")
        secrets = tuple(self.secrets)
        object.__setattr__(self, "secrets", secrets)
        if len(secrets) != self.iterations:
            raise ValueError(
                f"got {len(secrets)} secrets for {self.iterations} iteration(s)"
            )
        if isinstance(self.channel, (list, tuple)):
            channel = tuple(self.channel)
            if len(channel) != len(self.transmitted_qubits):
                raise ValueError(
                    f"per-qubit channel list must have {len(self.transmitted_qubits)}"
                    f" entries, got {len(channel)}"
                )
            object.__setattr__(self, "channel", channel)

    @property
    def num_qubits(self) -> int:
        return self.parties + 1

    @property
    def bob_qubit(self) -> int:
        """Register position of the reconstructor's qubit."""
        return self.parties

    @property
    def collaborator_qubits(self) -> tuple[int, ...]:
        """Register positions of the helper receivers, in order."""
        return (0,) + tuple(range(2, self.parties))

    @property
    def transmitted_qubits(self) -> tuple[int, ...]:
        """Every register position that leaves the dealer's lab."""
        return (0,) + tuple(range(2, self.parties + 1))

    def channel_for(self, index: int) -> NoiseSpec | None:
        """Noise spec for the ``index``-th transmitted qubit."""
        if self.channel is None:
            return None
        if isinstance(self.channel, NoiseSpec):
            return self.channel
        return self.channel[index]


@dataclass(frozen=True)
class MeasurementRecord:
    """One outcome branch of a projective measurement.

    ``state`` is the unnormalized projected register state; its trace is
    the branch probability. Zero-probability branches carry ``None``.
    """

    outcome: str
    probability: float
    state: DensityMatrix | None


@dataclass(frozen=True)
class IterationReport:
    """Result of one measurement-outcome branch of one iteration."""

    iteration_index: int
    alice_outcome: int
    collaborator_outcomes: tuple[str, ...]
    correction_applied: str
    reconstructed_state: DensityMatrix | None
    fidelity: float | None
    branch_probability: float


@dataclass(frozen=True)
class ProtocolState:
    """Carry-over between iterations: one entry per surviving branch.

    Each branch records its joint probability and the helpers' collapsed
    qubits (as Hadamard-basis outcome labels, which determine the returned
    pure states exactly).
    """

    parties: int
    next_iteration: int
    branches: tuple[tuple[float, tuple[str, ...]], ...]


# Correction applied by the reconstructor, keyed by the dealer's bit and the
# parity of '-' outcomes among the helpers. Phase kicks from individual '-'
# outcomes compose multiplicatively, so only the parity matters.
CORRECTION_TABLE: dict[tuple[int, int], np.ndarray] = {
    (0, 0): linalg.ID2,
    (0, 1): PAULI_Z,
    (1, 0): PAULI_X,
    (1, 1): MINUS_I_PAULI_Y,
}

_CORRECTION_LABELS: dict[tuple[int, int], str] = {
    (0, 0): "I",
    (0, 1): "Z",
    (1, 0): "X",
    (1, 1): "-iY",
}


def correction(alice: int, collaborators: Sequence[str]) -> np.ndarray:
    """Table lookup of the reconstructor's Pauli correction.

    ``alice`` is the dealer's computational-basis outcome (0 or 1),
    ``collaborators`` the helpers' Hadamard-basis outcomes (``"+"``/``"-"``).
    """
    if alice not in (0, 1):
        raise ValueError(f"dealer outcome must be 0 or 1, got {alice!r}")
    parity = 0
    for c in collaborators:
        if c == "-":
            parity ^= 1
        elif c != "+":
            raise ValueError(f"helper outcome must be '+' or '-', got {c!r}")
    return CORRECTION_TABLE[(alice, parity)]


def _correction_label(alice: int, collaborators: Sequence[str]) -> str:
    parity = sum(1 for c in collaborators if c == "-") % 2
    return _CORRECTION_LABELS[(alice, parity)]


def _cnot(control: int, target: int, m: int) -> np.ndarray:
    gate = np.zeros((4, 4), dtype=complex)
    gate[0, 0] = gate[1, 1] = gate[3, 2] = gate[2, 3] = 1.0
    return embed(gate, [control, target], m)


def make_resource(n: int) -> PureState:
    """n-qubit GHZ resource ``(|0...0> + |1...1>)/sqrt(2)``.

    Built constructively: start from ``|+>|0...0>`` and run the XOR chain
    ``CNOT(0,1), CNOT(1,2), ...`` down the register.
    """
    if n < 2:
        raise ValueError(f"resource needs at least 2 qubits, got {n}")
    amps = KET_PLUS.copy()
    for _ in range(n - 1):
        amps = np.kron(amps, KET_0)
    for q in range(n - 1):
        amps = _cnot(q, q + 1, n) @ amps
    return PureState(amps)


def encode_secret(secret: Secret, resource: PureState) -> PureState:
    """XOR the secret qubit onto the resource.

    The secret qubit is prepended at register position 0 and a single XOR
    between it and the dealer's qubit (position 1) produces the shared
    (n+1)-qubit state.
    """
    n = resource.num_qubits
    ghz = np.zeros(2**n, dtype=complex)
    ghz[0] = ghz[-1] = 1 / np.sqrt(2)
    if not np.allclose(resource.amplitudes, ghz, atol=equality_atol()):
        raise ValueError("resource is not the GHZ state produced by make_resource")
    amps = np.kron(secret.vector(), resource.amplitudes)
    amps = _cnot(0, 1, n + 1) @ amps
    return PureState(amps)


_BASIS_PROJECTORS = {
    "computational": (("0", np.outer(KET_0, KET_0)), ("1", np.outer(KET_1, KET_1))),
    "hadamard": (("+", np.outer(KET_PLUS, KET_PLUS)), ("-", np.outer(KET_MINUS, KET_MINUS))),
}


def withheld_outcome_state(state: DensityMatrix, cfg: ProtocolConfig) -> DensityMatrix:
    """Register state once all protocol measurements are done but no outcome
    has been announced.

    The dealer's computational measurement and every helper's Hadamard
    measurement are summed over their outcomes (a local dephasing). This is
    the state an outsider, or any single receiver ignoring their own
    outcome, assigns before classical communication; the secrecy of the
    scheme is the statement that each receiver's marginal of it is I/2.
    """
    mat = state.matrix
    m = cfg.num_qubits
    to_measure = [(ALICE_QUBIT, "computational")] + [
        (q, "hadamard") for q in cfg.collaborator_qubits
    ]
    for qubit, basis in to_measure:
        acc = np.zeros_like(mat)
        for _, proj in _BASIS_PROJECTORS[basis]:
            full = embed(proj, [qubit], m)
            acc += full @ mat @ full
        mat = acc
    return DensityMatrix(mat)


def measure_projective(
    rho: DensityMatrix, qubit: int, basis: str
) -> list[MeasurementRecord]:
    """Project one qubit onto a basis, returning every outcome branch.

    Branch probabilities sum to ``trace(rho)``; the recorded states stay
    unnormalized.
    """
    if basis not in _BASIS_PROJECTORS:
        raise ValueError(f"unknown basis {basis!r}")
    m = rho.num_qubits
    records = []
    for outcome, proj in _BASIS_PROJECTORS[basis]:
        full = embed(proj, [qubit], m)
        projected = full @ rho.matrix @ full
        prob = float(projected.trace().real)
        if prob <= ZERO_BRANCH_ATOL:
            records.append(MeasurementRecord(outcome, 0.0, None))
        else:
            records.append(MeasurementRecord(outcome, prob, DensityMatrix(projected)))
    return records


def _execute_iteration(
    rho: np.ndarray,
    cfg: ProtocolConfig,
    secret: Secret,
    iteration_index: int,
    scale: float,
) -> tuple[list[IterationReport], list[tuple[float, tuple[str, ...]]]]:
    """Run one iteration on an already-encoded register density matrix.

    ``scale`` multiplies every branch probability (joint weight of the
    history that produced ``rho``). Returns the per-branch reports plus the
    surviving branches for the next iteration.
    """
    m = cfg.num_qubits
    transmitted = cfg.transmitted_qubits

    if cfg.wmrqm is not None:
        fwd = weak_op(FORWARD_NULL, cfg.wmrqm.s)
        for q in transmitted:
            e = embed(fwd.matrix, [q], m)
            rho = e @ rho @ dagger(e)

    for i, q in enumerate(transmitted):
        spec = cfg.channel_for(i)
        if spec is not None:
            rho = _apply_channel_matrix(rho, spec.channel(), q, m)

    if cfg.wmrqm is not None:
        rev = weak_op(REVERSE, cfg.wmrqm.r)
        for q in transmitted:
            e = embed(rev.matrix, [q], m)
            rho = e @ rho @ dagger(e)

    proj_alice = {
        o: embed(p, [ALICE_QUBIT], m) for o, p in _BASIS_PROJECTORS["computational"]
    }
    proj_collab = [
        {o: embed(p, [q], m) for o, p in _BASIS_PROJECTORS["hadamard"]}
        for q in cfg.collaborator_qubits
    ]

    secret_vec = secret.vector()
    reports: list[IterationReport] = []
    chain: list[tuple[float, tuple[str, ...]]] = []
    for a in (0, 1):
        rho_a = proj_alice[str(a)] @ rho @ proj_alice[str(a)]
        for outcomes in itertools.product("+-", repeat=len(proj_collab)):
            branch = rho_a
            for projs, o in zip(proj_collab, outcomes):
                branch = projs[o] @ branch @ projs[o]
            bob = _partial_trace_matrix(branch, [cfg.bob_qubit], m)
            prob = float(bob.trace().real)
            if prob <= ZERO_BRANCH_ATOL:
                reports.append(
                    IterationReport(
                        iteration_index=iteration_index,
                        alice_outcome=a,
                        collaborator_outcomes=outcomes,
                        correction_applied=_correction_label(a, outcomes),
                        reconstructed_state=None,
                        fidelity=None,
                        branch_probability=0.0,
                    )
                )
                continue
            u = correction(a, outcomes)
            fixed = u @ (bob / prob) @ dagger(u)
            fid = float(np.real(secret_vec.conj() @ fixed @ secret_vec))
            reports.append(
                IterationReport(
                    iteration_index=iteration_index,
                    alice_outcome=a,
                    collaborator_outcomes=outcomes,
                    correction_applied=_correction_label(a, outcomes),
                    reconstructed_state=DensityMatrix(fixed),
                    fidelity=fid,
                    branch_probability=prob * scale,
                )
            )
            chain.append((prob * scale, outcomes))
    return reports, chain


def _encoded_density(secret: Secret, n: int) -> np.ndarray:
    return encode_secret(secret, make_resource(n)).density().matrix


def run_iteration(cfg: ProtocolConfig, secret: Secret) -> list[IterationReport]:
    """Single-shot run of one iteration on a fresh resource.

    One report per measurement-outcome branch, in deterministic order
    (dealer outcome 0 before 1, helper outcomes ``+`` before ``-``).
    Without protection the branch probabilities sum to one; with it they
    sum to the post-selection success probability.
    """
    reports, _ = _execute_iteration(
        _encoded_density(secret, cfg.parties), cfg, secret, iteration_index=0, scale=1.0
    )
    return reports


def start_chain(cfg: ProtocolConfig, secret: Secret | None = None) -> tuple[ProtocolState, list[IterationReport]]:
    """Run the first iteration and keep the carry-over state for recycling."""
    if secret is None:
        secret = cfg.secrets[0]
    reports, chain = _execute_iteration(
        _encoded_density(secret, cfg.parties), cfg, secret, iteration_index=0, scale=1.0
    )
    return ProtocolState(cfg.parties, 1, tuple(chain)), reports


def _reset_to_zero(state: DensityMatrix) -> list[tuple[float, np.ndarray]]:
    """Dealer's reset of a returned qubit: measure, flip to |0> if needed."""
    out = []
    for outcome, proj in _BASIS_PROJECTORS["computational"]:
        projected = proj @ state.matrix @ proj
        prob = float(projected.trace().real)
        if prob <= ZERO_BRANCH_ATOL:
            continue
        fixed = projected / prob
        if outcome == "1":
            fixed = PAULI_X @ fixed @ PAULI_X
        out.append((prob, fixed))
    return out


_OUTCOME_STATES = {"+": KET_PLUS, "-": KET_MINUS}


def advance(
    prev: ProtocolState, secret: Secret, cfg: ProtocolConfig
) -> tuple[ProtocolState, list[IterationReport]]:
    """Recycle the helpers' qubits and share the next secret.

    The returned qubits (optionally noisy on the way back) are measured and
    flipped to ``|0>``, a fresh ``|+>`` heads the XOR chain that rebuilds
    the resource, and the next iteration runs. Reset sub-branches whose
    register states coincide are merged; since every reset lands exactly on
    ``|0>``, the merge is exact.
    """
    if prev.parties != cfg.parties:
        raise ValueError("carry-over state and config disagree on party count")
    n = cfg.parties

    # Weight of each distinct post-reset register state. The reset makes all
    # of them identical, but the bookkeeping below does not assume it.
    merged: list[tuple[float, tuple[np.ndarray, ...]]] = []
    for weight, outcomes in prev.branches:
        per_qubit: list[list[tuple[float, np.ndarray]]] = []
        for o in outcomes:
            vec = _OUTCOME_STATES[o]
            returned = DensityMatrix(np.outer(vec, vec.conj()))
            if cfg.return_channel is not None:
                returned = DensityMatrix(
                    _apply_channel_matrix(
                        returned.matrix, cfg.return_channel.channel(), 0, 1
                    )
                )
            per_qubit.append(_reset_to_zero(returned))
        for combo in itertools.product(*per_qubit):
            sub_prob = weight * float(np.prod([p for p, _ in combo]))
            states = tuple(s for _, s in combo)
            for i, (w, existing) in enumerate(merged):
                if all(
                    np.allclose(a, b, atol=1e-12) for a, b in zip(existing, states)
                ):
                    merged[i] = (w + sub_prob, existing)
                    break
            else:
                merged.append((sub_prob, states))

    all_reports: list[IterationReport] = []
    next_branches: list[tuple[float, tuple[str, ...]]] = []
    for weight, reset_states in merged:
        resource = linalg.tensor_all(
            [np.outer(KET_PLUS, KET_PLUS.conj()), *reset_states]
        )
        for q in range(n - 1):
            gate = _cnot(q, q + 1, n)
            resource = gate @ resource @ dagger(gate)
        sv = secret.vector()
        rho = np.kron(np.outer(sv, sv.conj()), resource)
        gate = _cnot(0, 1, n + 1)
        rho = gate @ rho @ dagger(gate)
        reports, chain = _execute_iteration(
            rho, cfg, secret, iteration_index=prev.next_iteration, scale=weight
        )
        all_reports.extend(reports)
        next_branches.extend(chain)

    state = ProtocolState(n, prev.next_iteration + 1, tuple(next_branches))
    return state, all_reports


def recycle_and_rerun(
    prev: ProtocolState, next_secret: Secret, cfg: ProtocolConfig
) -> list[IterationReport]:
    """Reports of the next iteration after recycling (see ``advance``)."""
    _, reports = advance(prev, next_secret, cfg)
    return reports


def run_protocol(cfg: ProtocolConfig) -> list[list[IterationReport]]:
    """Run every configured iteration, recycling qubits in between."""
    state, reports = start_chain(cfg, cfg.secrets[0])
    out = [reports]
    for secret in cfg.secrets[1:]:
        state, reports = advance(state, secret, cfg)
        out.append(reports)
    return out


def success_probability(reports: Sequence[IterationReport]) -> float:
    """Total probability mass of the reported branches."""
    return float(sum(r.branch_probability for r in reports))


def aggregate_fidelity(reports: Sequence[IterationReport]) -> float:
    """Probability-weighted fidelity over surviving branches.

    With post-selection enabled this conditions on success (the weights are
    renormalized by the total surviving probability).
    """
    total = success_probability(reports)
    if total <= 0.0:
        raise ValueError("no surviving branch to aggregate over")
    return float(
        sum(r.branch_probability * r.fidelity for r in reports if r.fidelity is not None)
        / total
    )
