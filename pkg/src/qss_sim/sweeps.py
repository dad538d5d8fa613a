"""Parameter sweeps with deterministic CSV output.

A sweep evaluates one or more named quantities on a 1- or 2-axis grid and
writes one row per grid point, outer axis major. Floats are written with 12
significant digits; grid points where a quantity is undefined produce a
literal ``nan`` and are counted in the trailing ``# warnings: N`` comment
line. Output is bit-identical across repeated runs of the same spec:
workers only parallelize evaluation, rows are buffered and written in grid
order.

Ready-made specs reproducing the bundled figure datasets live in
``sweepspecs/`` (see the README for the column schema of each).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from . import analysis
from .analysis import FORMULAS, DomainError
from .config import SWEEP_PARAMS, ConfigValidationError, SweepSpec
from .protocol import NoiseSpec, ProtocolConfig, Secret, Wmrqm, aggregate_fidelity, run_iteration

__all__ = ["QUANTITIES", "Quantity", "run_sweep", "write_csv", "format_float"]


class Quantity:
    """A sweepable scalar: required parameter names plus an evaluator.

    ``evaluate`` receives the full binding dict so quantities with optional
    parameters (the simulator) can pick up what is present.
    """

    def __init__(self, name: str, params: tuple[str, ...], fn: Callable[[dict], float]):
        self.name = name
        self.params = params
        self._fn = fn

    def evaluate(self, bindings: dict[str, float | str]) -> float:
        missing = [p for p in self.params if p not in bindings]
        if missing:
            raise ConfigValidationError(f"{self.name} needs parameter(s) {missing}")
        return self._fn(bindings)


def _sim_fidelity(bindings: dict[str, float | str]) -> float:
    """Brute-force protocol fidelity (probability-weighted over branches)."""
    kind = bindings.get("channel", "none")
    if kind not in ("pdc", "adc", "none"):
        raise ConfigValidationError(f"sim_fidelity channel must be pdc, adc or none, got {kind!r}")
    if kind != "none" and "strength" not in bindings:
        raise ConfigValidationError("sim_fidelity with a channel needs strength")
    if ("s" in bindings) != ("r" in bindings):
        raise ConfigValidationError("sim_fidelity needs s and r together or neither")
    secret = Secret.from_k(float(bindings["k"]))
    cfg = ProtocolConfig(
        parties=2,
        secrets=(secret,),
        channel=None if kind == "none" else NoiseSpec(str(kind), float(bindings["strength"])),
        wmrqm=Wmrqm(float(bindings["s"]), float(bindings["r"])) if "s" in bindings else None,
    )
    return aggregate_fidelity(run_iteration(cfg, secret))


def _formula_quantity(name: str) -> Quantity:
    formula = FORMULAS[name]
    return Quantity(
        name, formula.params, lambda b: formula.fn(*(float(b[p]) for p in formula.params))
    )


QUANTITIES: dict[str, Quantity] = {name: _formula_quantity(name) for name in FORMULAS}
QUANTITIES["sim_fidelity"] = Quantity("sim_fidelity", ("k",), _sim_fidelity)


def _validate_spec(spec: SweepSpec) -> None:
    for q in spec.quantities:
        if q not in QUANTITIES:
            raise ConfigValidationError(
                f"unknown quantity {q!r}; known: {sorted(QUANTITIES)}"
            )
    seen = set()
    for name, lo, hi, steps in spec.axes:
        if name not in SWEEP_PARAMS:
            raise ConfigValidationError(f"unknown axis parameter {name!r}")
        if name in seen:
            raise ConfigValidationError(f"duplicate axis {name!r}")
        seen.add(name)
        if steps < 2:
            raise ConfigValidationError(f"axis {name}: steps must be >= 2, got {steps}")
        if not (0.0 <= lo < hi <= 1.0):
            raise ConfigValidationError(
                f"axis {name}: range [{lo}, {hi}] must satisfy 0 <= lo < hi <= 1"
            )
    for name in spec.fixed:
        if name == "channel":
            continue
        if name not in SWEEP_PARAMS:
            raise ConfigValidationError(f"unknown fixed parameter {name!r}")
        if name in seen:
            raise ConfigValidationError(f"{name!r} is both an axis and fixed")
        value = spec.fixed[name]
        if isinstance(value, float) and not 0.0 <= value <= 1.0:
            raise ConfigValidationError(f"fixed {name} = {value} outside [0, 1]")
    # Every quantity must see all the parameters it needs; a floating
    # reversal strength (r = r_opt) additionally needs (k, s, p) to resolve.
    available = seen | set(spec.fixed)
    if spec.fixed.get("r") == "r_opt" and not {"k", "s", "p"} <= available:
        raise ConfigValidationError("r = r_opt needs k, s and p bound")
    for q in spec.quantities:
        missing = set(QUANTITIES[q].params) - available
        if missing:
            raise ConfigValidationError(f"{q} needs parameter(s) {sorted(missing)}")


def _evaluate_point(spec: SweepSpec, bindings: dict[str, float | str]) -> tuple[list[float], int]:
    values: list[float] = []
    warnings = 0
    resolved = dict(bindings)
    if resolved.get("r") == "r_opt":
        try:
            resolved["r"] = analysis.r_opt(
                float(resolved["k"]), float(resolved["s"]), float(resolved["p"])
            )
        except (DomainError, KeyError):
            resolved["r"] = math.nan
    for q in spec.quantities:
        try:
            value = QUANTITIES[q].evaluate(resolved)
        except ConfigValidationError:
            raise
        except DomainError:
            value = math.nan
        except (ValueError, ZeroDivisionError):
            value = math.nan
        if isinstance(value, float) and math.isnan(value):
            warnings += 1
        values.append(value)
    return values, warnings


def run_sweep(spec: SweepSpec, workers: int = 1) -> tuple[list[str], list[list[float]], int]:
    """Evaluate a sweep; returns (header, rows, warning count)."""
    _validate_spec(spec)
    grids = [np.linspace(lo, hi, steps) for _, lo, hi, steps in spec.axes]
    names = [name for name, *_ in spec.axes]

    points: list[dict[str, float | str]] = []
    if len(grids) == 1:
        for x in grids[0]:
            points.append({names[0]: float(x), **spec.fixed})
    else:
        for x in grids[0]:
            for y in grids[1]:
                points.append({names[0]: float(x), names[1]: float(y), **spec.fixed})

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda b: _evaluate_point(spec, b), points))
    else:
        results = [_evaluate_point(spec, b) for b in points]

    header = names + list(spec.quantities)
    rows = [[float(p[n]) for n in names] + vals for p, (vals, _) in zip(points, results)]
    warnings = sum(w for _, w in results)
    return header, rows, warnings


def format_float(x: float) -> str:
    """12 significant digits, lowercase nan/inf."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[float]], warnings: int) -> None:
    """Write sweep output: comma separator, LF endings, trailing warning count."""
    lines = [",".join(header)]
    lines.extend(",".join(format_float(v) for v in row) for row in rows)
    lines.append(f"# warnings: {warnings}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
