"""Derivative-free maximization used to validate the closed-form optima.

Two searches are provided:

* a scalar maximizer (coarse grid plus golden-section refinement) used to
  check the closed-form optimal reversal strength against a numeric argmax;
* a search over single-qubit correction unitaries (three-angle grid plus
  coordinatewise refinement) used to check that the Pauli correction table
  is optimal among secret-independent corrections.

The correction search scores a candidate unitary by the average fidelity it
achieves over the family of unknown secrets: uniform in the population
``k`` and uniform in the relative phase, i.e. Haar-distributed pure qubits.
Averaging over the real-amplitude slice alone would be too weak a notion of
"unknown" -- under amplitude damping a fixed small rotation exploits the
common phase of that slice and beats the Pauli table there, while over the
full family the Pauli table is optimal. A secret-dependent unitary would
score higher still (its ceiling is the largest eigenvalue of the branch
state) but is not operationally available to a reconstructor who does not
know the secret; ``max_eigenvalue`` exposes that bound as a diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .linalg import dagger, su2
from .protocol import (
    IterationReport,
    NoiseSpec,
    ProtocolConfig,
    Secret,
    Wmrqm,
    correction,
    run_iteration,
)
from .quadrature import _nodes

__all__ = [
    "ScalarObjective",
    "UnitaryObjective",
    "CorrectionSearchResult",
    "maximize_scalar",
    "correction_objective",
    "optimize_correction",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ScalarObjective:
    """Scalar function to maximize on a closed interval."""

    fn: Callable[[float], float]
    lower: float
    upper: float
    tolerance: float = 1e-10

    def __post_init__(self) -> None:
        if not self.upper > self.lower:
            raise ValueError(f"degenerate interval [{self.lower}, {self.upper}]")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


def _golden_max(f: Callable[[float], float], a: float, b: float, tol: float) -> tuple[float, float]:
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def maximize_scalar(obj: ScalarObjective, grid: int = 64) -> tuple[float, float]:
    """Global maximum via coarse grid plus golden-section refinement.

    Exact for unimodal objectives; for multimodal ones the grid picks the
    basin. Boundary maxima are found to the same tolerance.
    """
    xs = np.linspace(obj.lower, obj.upper, grid)
    values = [obj.fn(float(x)) for x in xs]
    best = int(np.argmax(values))
    step = (obj.upper - obj.lower) / (grid - 1)
    a = max(obj.lower, xs[best] - step)
    b = min(obj.upper, xs[best] + step)
    x, fx = _golden_max(obj.fn, a, b, obj.tolerance)
    if values[best] > fx:
        return float(xs[best]), values[best]
    return x, fx


@dataclass(frozen=True)
class UnitaryObjective:
    """Average reconstruction fidelity of one branch over the secret family.

    ``states[i]`` is the normalized branch state before any correction for
    the secret ``targets[i]``; ``weights`` are the quadrature weights of the
    uniform average over the family (they sum to one).
    ``branch_probabilities`` records how likely each node's branch was.
    """

    weights: np.ndarray
    targets: np.ndarray
    states: np.ndarray
    branch_probabilities: np.ndarray

    def value(self, unitary: np.ndarray) -> float:
        """Average ``<psi| U rho U^dag |psi>`` over the family."""
        return float(self.batch_values(unitary[np.newaxis])[0])

    def batch_values(self, unitaries: np.ndarray) -> np.ndarray:
        """Vectorized ``value`` over a stack of unitaries."""
        fid = np.einsum(
            "na,gab,nbc,gdc,nd->gn",
            self.targets.conj(),
            unitaries,
            self.states,
            unitaries.conj(),
            self.targets,
            optimize=True,
        ).real
        return fid @ self.weights


def _unit_interval_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = _nodes(n)
    return 0.5 * (x + 1.0), 0.5 * w


def correction_objective(
    alice_outcome: int,
    collaborator_outcomes: Sequence[str],
    channel: NoiseSpec | None = None,
    wmrqm: Wmrqm | None = None,
    parties: int = 2,
    nodes: int = 33,
    phases: int = 8,
) -> UnitaryObjective:
    """Build the search objective for one measurement branch.

    Runs the simulator at each quadrature node of the secret family
    (Gauss-Legendre in the population ``k``, uniform grid in the relative
    phase -- the integrand is a trigonometric polynomial of degree two in
    the phase, so five or more equispaced phases integrate it exactly),
    strips the table correction off the reported state and records the raw
    branch state alongside the target secret.
    """
    if phases < 5:
        raise ValueError("need at least 5 phase nodes for an exact phase average")
    ks, k_weights = _unit_interval_nodes(nodes)
    phis = 2.0 * np.pi * np.arange(phases) / phases
    table_u = correction(alice_outcome, collaborator_outcomes)
    weights, targets, states, probs = [], [], [], []
    for k, kw in zip(ks, k_weights):
        for phi in phis:
            secret = Secret(
                alpha=np.sqrt(float(k)), beta=np.sqrt(1.0 - float(k)) * np.exp(1j * phi)
            )
            cfg = ProtocolConfig(
                parties=parties, secrets=(secret,), channel=channel, wmrqm=wmrqm
            )
            report = _find_branch(
                run_iteration(cfg, secret), alice_outcome, collaborator_outcomes
            )
            if report.reconstructed_state is None:
                raise ValueError(
                    f"branch ({alice_outcome}, {collaborator_outcomes}) has zero probability"
                )
            raw = dagger(table_u) @ report.reconstructed_state.matrix @ table_u
            weights.append(kw / phases)
            targets.append(secret.vector())
            states.append(raw)
            probs.append(report.branch_probability)
    return UnitaryObjective(
        weights=np.asarray(weights),
        targets=np.asarray(targets),
        states=np.asarray(states),
        branch_probabilities=np.asarray(probs),
    )


def _find_branch(
    reports: Sequence[IterationReport], alice: int, collaborators: Sequence[str]
) -> IterationReport:
    collaborators = tuple(collaborators)
    for r in reports:
        if r.alice_outcome == alice and r.collaborator_outcomes == collaborators:
            return r
    raise ValueError(f"no branch ({alice}, {collaborators}) in reports")


@dataclass(frozen=True)
class CorrectionSearchResult:
    """Best correction found, with the per-restart maxima for diagnostics."""

    unitary: np.ndarray
    value: float
    restart_values: tuple[float, ...]


def optimize_correction(
    obj: UnitaryObjective, restarts: int = 8, grid: int = 16, sweeps: int = 4
) -> CorrectionSearchResult:
    """Best secret-independent single-qubit correction for a branch.

    Searches the three-angle unitary family on a coarse grid, then refines
    the ``restarts`` best grid points by cyclic golden-section sweeps over
    the angles. Global phase is not parameterized; it cannot change the
    objective.
    """
    thetas = np.linspace(0.0, np.pi, grid)
    phis = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
    lams = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
    combos = np.array(np.meshgrid(thetas, phis, lams, indexing="ij")).reshape(3, -1).T
    us = np.array([su2(*angles) for angles in combos])
    coarse = obj.batch_values(us)
    order = np.argsort(coarse)[::-1][:restarts]

    steps = (np.pi / (grid - 1), 2.0 * np.pi / grid, 2.0 * np.pi / grid)
    results = []
    for idx in order:
        angles = combos[idx].copy()
        value = coarse[idx]
        for _ in range(sweeps):
            for coord in range(3):
                def along(x: float, coord: int = coord, angles: np.ndarray = angles) -> float:
                    trial = angles.copy()
                    trial[coord] = x
                    return obj.value(su2(*trial))

                x, fx = _golden_max(
                    along, angles[coord] - steps[coord], angles[coord] + steps[coord], 1e-10
                )
                if fx >= value:
                    angles[coord], value = x, fx
        results.append((value, angles))

    best_value, best_angles = max(results, key=lambda t: t[0])
    return CorrectionSearchResult(
        unitary=su2(*best_angles),
        value=float(best_value),
        restart_values=tuple(float(v) for v, _ in results),
    )
