"""Grid sweep classifying which invariant set each initial condition reaches.

For every (alpha, delta_d) cell of a parameter grid, the shifted switched
loop is run from a grid of initial states.  A trajectory is classified as
soon as it either hits the capture region (from which containment in the
minimal invariant set is guaranteed) or revisits an exact state, at which
point its terminal cycle of quantized pairs is known.  Grid coordinates
are sampled as exact rationals so the classification itself is exact,
including the delicate |delta_d| = 1/2 boundary.

Cells are independent work items; the sweep optionally fans them out over
a process pool and aggregates deterministically in grid order.
"""

from __future__ import annotations

import csv
import multiprocessing
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .analysis import (
    EntryRegion,
    amplitude2_pairs,
    in_entry_region,
    minimal_invariant_pairs,
)
from .dynamics import _switched_law
from .numerics import Scalar, format_scalar, round_half_away

TAG_THEOREM1 = "theorem1-set"
TAG_ALT_UNIT = "alt-unit-set"
TAG_AMPLITUDE2 = "amplitude2-set"
TAG_UNRESOLVED = "unresolved"

GRID_CSV_COLUMNS = ("alpha", "delta_d", "n_inits", "n_theorem1", "n_alt",
                    "n_amp2", "n_unresolved")
REGION_CSV_COLUMNS = ("alpha", "delta_d", "in_region")

#: Above this bound on total simulation steps a sweep gets a slowness
#: warning.  The bound assumes every trajectory exhausts its budget, which
#: desk-scale sweeps never do, so the threshold sits well above them.
_FULL_SCALE_STEPS = 10 ** 10


@dataclass(frozen=True)
class GridSpec:
    """Sweep description: parameter grid, initial-state grid, step budget.

    Defaults are the desk-scale study (50 x 101 parameter cells, 21x21
    initial conditions, 10^4 steps per trajectory).  Full-scale values are
    accepted but warned about, since the run time grows accordingly.
    """

    alpha_lo: Scalar = Fraction(1001, 1000)
    alpha_hi: Scalar = Fraction(1499, 1000)
    alpha_count: int = 50
    delta_d_lo: Scalar = Fraction(-1, 2)
    delta_d_hi: Scalar = Fraction(1, 2)
    delta_d_count: int = 101
    init_box: Scalar = 10
    init_count: int = 21
    budget: int = 10_000
    mode: str = "exact"

    def __post_init__(self):
        for name in ("alpha_count", "delta_d_count", "init_count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.mode not in ("exact", "float"):
            raise ValueError(f"unknown arithmetic mode: {self.mode!r}")

    def alphas(self) -> list:
        return grid_values(self.alpha_lo, self.alpha_hi, self.alpha_count)

    def delta_ds(self) -> list:
        return grid_values(self.delta_d_lo, self.delta_d_hi, self.delta_d_count)

    def inits(self) -> list:
        axis = grid_values(-self.init_box, self.init_box, self.init_count)
        return [(e0, u0) for e0 in axis for u0 in axis]

    def total_steps_bound(self) -> int:
        return (self.alpha_count * self.delta_d_count
                * self.init_count ** 2 * self.budget)


def grid_values(lo: Scalar, hi: Scalar, count: int) -> list:
    """``count`` equally spaced exact rationals from ``lo`` to ``hi``
    inclusive (just ``lo`` when count is 1)."""
    lo = Fraction(lo)
    hi = Fraction(hi)
    if count == 1:
        return [lo]
    return [lo + (hi - lo) * Fraction(i, count - 1) for i in range(count)]


@dataclass(frozen=True)
class AttractorClass:
    """Classification of one trajectory.

    ``witness_pairs`` is the quantized-pair set of the terminal cycle (for
    capture-classified runs, the guaranteed minimal set).  ``steps_to_entry``
    is the capture step, or the first step on the terminal cycle.
    """

    tag: str
    witness_pairs: frozenset
    steps_to_entry: Optional[int] = None


def classify_trajectory(
    alpha: Scalar,
    delta_d: Scalar,
    e0: Scalar,
    u_bar0: Scalar,
    budget: int,
    mode: str = "exact",
) -> AttractorClass:
    """Classify the attractor reached from one initial condition.

    Capture-region entry classifies immediately.  Otherwise the run
    continues until an exact state revisit reveals the terminal cycle, or
    the budget is exhausted (tag ``unresolved``).  No escape radius is
    enforced: far from the origin the loop contracts like its unquantized
    version, so excursions outside the initial box return on their own.
    """
    if not 1 < alpha < Fraction(3, 2):
        raise ValueError("classification requires a gain in (1, 3/2)")
    region = EntryRegion(alpha, delta_d)
    if mode == "float":
        alpha, delta_d, e, u = (float(alpha), float(delta_d),
                                float(e0), float(u_bar0))
    else:
        alpha, delta_d, e, u = (Fraction(alpha), Fraction(delta_d),
                                Fraction(e0), Fraction(u_bar0))
    seen: dict = {}
    pairs: list = []
    for k in range(budget + 1):
        if in_entry_region(e, u, region):
            return AttractorClass(TAG_THEOREM1,
                                  minimal_invariant_pairs(delta_d), k)
        state = (e, u)
        j = seen.get(state)
        if j is not None:
            return _classify_cycle(delta_d, frozenset(pairs[j:k]), j)
        seen[state] = k
        pairs.append((round_half_away(e), round_half_away(u)))
        if k < budget:
            e, u = _switched_law(e, u, delta_d, alpha, round_half_away)
    return AttractorClass(TAG_UNRESOLVED, frozenset(pairs[-8:]), None)


def _classify_cycle(delta_d, cycle_pairs, entry) -> AttractorClass:
    if cycle_pairs <= minimal_invariant_pairs(delta_d):
        return AttractorClass(TAG_THEOREM1, cycle_pairs, entry)
    amp2 = amplitude2_pairs(delta_d)
    if amp2 is not None and cycle_pairs == amp2:
        return AttractorClass(TAG_AMPLITUDE2, cycle_pairs, entry)
    rho_es = [p[0] for p in cycle_pairs]
    if max(rho_es) - min(rho_es) <= 1:
        return AttractorClass(TAG_ALT_UNIT, cycle_pairs, entry)
    return AttractorClass(TAG_UNRESOLVED, cycle_pairs, entry)


@dataclass(frozen=True)
class CellResult:
    """Classification tally over all sampled initial conditions of one cell."""

    alpha: Scalar
    delta_d: Scalar
    n_inits: int
    n_theorem1: int
    n_alt: int
    n_amp2: int
    n_unresolved: int


@dataclass(frozen=True)
class GridResult:
    spec: GridSpec
    cells: tuple

    def cell(self, alpha: Scalar, delta_d: Scalar) -> CellResult:
        for c in self.cells:
            if c.alpha == alpha and c.delta_d == delta_d:
                return c
        raise KeyError((alpha, delta_d))


def _evaluate_cell(args) -> CellResult:
    spec, alpha, delta_d = args
    counts = {TAG_THEOREM1: 0, TAG_ALT_UNIT: 0, TAG_AMPLITUDE2: 0,
              TAG_UNRESOLVED: 0}
    inits = spec.inits()
    for e0, u0 in inits:
        result = classify_trajectory(alpha, delta_d, e0, u0,
                                     spec.budget, spec.mode)
        counts[result.tag] += 1
    return CellResult(alpha, delta_d, len(inits), counts[TAG_THEOREM1],
                      counts[TAG_ALT_UNIT], counts[TAG_AMPLITUDE2],
                      counts[TAG_UNRESOLVED])


def sweep(spec: GridSpec, jobs: int = 1) -> GridResult:
    """Run the full grid sweep.

    Deterministic for a given spec regardless of ``jobs``: cells are
    independent and results are aggregated in grid order (alpha-major).
    """
    if spec.total_steps_bound() > _FULL_SCALE_STEPS:
        warnings.warn(
            "sweep upper bound exceeds 1e9 simulation steps; "
            "expect a very long run", stacklevel=2)
    work = [(spec, a, dd) for a in spec.alphas() for dd in spec.delta_ds()]
    if jobs > 1:
        with multiprocessing.Pool(jobs) as pool:
            cells = pool.map(_evaluate_cell, work, chunksize=1)
    else:
        cells = [_evaluate_cell(item) for item in work]
    return GridResult(spec, tuple(cells))


def attraction_region(result: GridResult) -> list:
    """Cells whose every sampled initial condition reached the guaranteed
    minimal set; the empirical global-attractiveness region."""
    return [(c.alpha, c.delta_d) for c in result.cells
            if c.n_inits > 0 and c.n_theorem1 == c.n_inits]


def write_grid_csv(result: GridResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GRID_CSV_COLUMNS)
        for c in result.cells:
            writer.writerow([format_scalar(c.alpha), format_scalar(c.delta_d),
                             c.n_inits, c.n_theorem1, c.n_alt, c.n_amp2,
                             c.n_unresolved])


def write_region_csv(result: GridResult, path) -> None:
    region = set(attraction_region(result))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REGION_CSV_COLUMNS)
        for c in result.cells:
            flag = 1 if (c.alpha, c.delta_d) in region else 0
            writer.writerow([format_scalar(c.alpha),
                             format_scalar(c.delta_d), flag])
