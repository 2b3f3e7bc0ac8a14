"""Sweep tables comparing bounds, exact counts and Monte Carlo estimates.

A sweep walks a grid of (n, beta, s) cells, where s is the threshold
relative to the endpoint n^((beta-1)/beta), and reports every available
view of the same tail event side by side.  Rendering is deterministic:
floats at 12 significant digits, comma-separated CSV with LF line endings,
or a JSON array of flat records with the same keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .bounds import (
    INTERIOR,
    bound_bn,
    bound_corollary,
    bernstein_numeric,
    threshold_from_s,
)
from .oracle import FINAL_SUM, MAX_ENUM_N, RUNNING_MAX, exact_tail
from .simulate import DistributionSpec, estimate_tail

__all__ = ["COLUMNS", "SweepGrid", "run_sweep", "render_csv", "render_json", "parse_csv"]

COLUMNS = (
    "n",
    "beta",
    "s",
    "x",
    "bound_bn",
    "bound_corollary",
    "bernstein_numeric",
    "oracle_exact",
    "mc_p_hat",
    "mc_ci_low",
    "mc_ci_high",
    "trials",
    "seed",
)


@dataclass(frozen=True)
class SweepGrid:
    """Grid of sweep cells plus the estimation settings shared by all cells.

    stat must be a sum statistic ("running_max" or "final_sum"); dist = None
    or trials = 0 turns the Monte Carlo columns off.
    """

    n_values: tuple[int, ...]
    beta_values: tuple[float, ...]
    s_values: tuple[float, ...]
    stat: str = RUNNING_MAX
    dist: DistributionSpec | None = DistributionSpec.rademacher()
    trials: int = 10**6
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.n_values or not self.beta_values or not self.s_values:
            raise ValueError("sweep grid axes must be non-empty")
        if self.stat not in (RUNNING_MAX, FINAL_SUM):
            raise ValueError(
                f"sweep stat must be {RUNNING_MAX!r} or {FINAL_SUM!r}, got {self.stat!r}"
            )
        if any(s <= 0.0 or s > 1.0 for s in self.s_values):
            raise ValueError("sweep s values must lie in (0, 1]")
        if any(a >= b for a, b in zip(self.s_values, self.s_values[1:])):
            raise ValueError("sweep s values must be sorted ascending")
        if self.trials < 0:
            raise ValueError(f"trials must be >= 0, got {self.trials}")


def _oracle_cell(grid: SweepGrid, n: int, beta: float, x: float, workers) -> float | None:
    dist = grid.dist
    if dist is None or not dist.supports_exact() or n > MAX_ENUM_N:
        return None
    if dist.kind == "fixed_magnitudes" and len(dist.magnitudes) != n:
        return None
    return exact_tail(dist.exact_magnitudes(n), beta, x, grid.stat, workers).probability




def run_sweep(grid: SweepGrid, workers: int | None = None) -> list[dict]:
    """Evaluate every grid cell; returns one flat record per cell.

    Unavailable entries (enumeration over the budget, random-magnitude
    laws, endpoint cells for the numeric minimizer, Monte Carlo turned
    off) are None.
    """
    rows = []
    for n in grid.n_values:
        for beta in grid.beta_values:
            for s in grid.s_values:
                x = threshold_from_s(n, beta, s)
                evaluation = bound_bn(n, beta, x)
                row = {
                    "n": n,
                    "beta": beta,
                    "s": s,
                    "x": x,
                    "bound_bn": evaluation.value,
                    "bound_corollary": bound_corollary(n, beta, x),
                    "bernstein_numeric": (
                        bernstein_numeric(n, beta, x).objective_value
                        if evaluation.regime == INTERIOR
                        else None
                    ),
                    "oracle_exact": _oracle_cell(grid, n, beta, x, workers),
                    "mc_p_hat": None,
                    "mc_ci_low": None,
                    "mc_ci_high": None,
                    "trials": grid.trials,
                    "seed": grid.seed,
                }
                if grid.dist is not None and grid.trials > 0:
                    est = estimate_tail(
                        grid.dist, n, beta, x, grid.stat, grid.trials, grid.seed, workers
                    )
                    row["mc_p_hat"] = est.p_hat
                    row["mc_ci_low"] = est.ci_low
                    row["mc_ci_high"] = est.ci_high
                rows.append(row)
    return rows


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return f"{value:.12g}"


def render_csv(rows: list[dict]) -> str:
    """Rows as CSV text: fixed header, '.' decimals, LF line endings."""
    lines = [",".join(COLUMNS)]
    for row in rows:
        lines.append(",".join(_format_cell(row[col]) for col in COLUMNS))
    return "\n".join(lines) + "\n"


def render_json(rows: list[dict]) -> str:
    """Rows as a JSON array of flat records, floats at 12 significant digits."""
    out = []
    for row in rows:
        rec = {}
        for col in COLUMNS:
            value = row[col]
            if isinstance(value, float):
                value = float(f"{value:.12g}")
            rec[col] = value
        out.append(rec)
    return json.dumps(out, indent=2) + "\n"


def parse_csv(text: str) -> list[dict]:
    """Inverse of render_csv; empty cells become None."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    header = tuple(lines[0].split(","))
    if header != COLUMNS:
        raise ValueError(f"unexpected sweep header {header!r}")
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        row = {}
        for col, cell in zip(COLUMNS, cells):
            if cell == "":
                row[col] = None
            elif col in ("n", "trials", "seed"):
                row[col] = int(cell)
            else:
                row[col] = float(cell)
        rows.append(row)
    return rows
