"""Invariant-set predicates and limit-cycle analysis for the switched loop.

Everything here works on shifted-coordinate trajectories (the ``u`` column
holds the residual control input ``u_bar``, the ``d`` column the constant
disturbance rounding error ``delta_d``).

For gains in (1, 3/2), once the state enters the capture region

    -1/2 < e < 1/2
    1 <= alpha - u_bar * sign(delta_d) < 3/2
    -1/2 < u_bar < 1/2

the quantized pair (rho(e), rho(u_bar)) stays forever in the minimal
invariant set {(0, 0), (s, -s)} with s = sign(delta_d), and from two steps
after entry the residual control is locked to ``-alpha * rho(e)``.  Inside
that set the loop is a pure drift-and-reset map, which is periodic exactly
when ``|delta_d|`` is rational: ``|delta_d| = n/m`` in lowest terms gives a
cycle of ``m`` steps containing ``n`` switch steps, with the error confined
to a half-open band of width 1 around ``delta_d``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .dynamics import Trajectory
from .numerics import Scalar, format_scalar, is_exact, sign

_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class EntryRegion:
    """Capture region of the shifted switched loop for one (alpha, delta_d)."""

    alpha: Scalar
    delta_d: Scalar

    @property
    def valid(self) -> bool:
        """The region is meaningful only for gains in (1, 3/2)."""
        return 1 < self.alpha < Fraction(3, 2)


def in_entry_region(e: Scalar, u_bar: Scalar, region: EntryRegion) -> bool:
    """True iff (e, u_bar) satisfies all three capture inequalities,
    with their exact strict/non-strict senses."""
    if not region.valid:
        raise ValueError(
            f"alpha={region.alpha} outside (1, 3/2); capture region undefined")
    if not -_HALF < e < _HALF:
        return False
    if not -_HALF < u_bar < _HALF:
        return False
    x = region.alpha - u_bar * sign(region.delta_d)
    return 1 <= x < Fraction(3, 2)


def minimal_invariant_pairs(delta_d: Scalar) -> frozenset:
    """Smallest invariant set of quantized pairs reached from the capture
    region: {(0,0)} for zero residual, {(0,0), (s,-s)} otherwise."""
    s = sign(delta_d)
    if s == 0:
        return frozenset({(0, 0)})
    return frozenset({(0, 0), (s, -s)})


def amplitude2_pairs(delta_d: Scalar) -> Optional[frozenset]:
    """The excursion-2 invariant set that exists only at |delta_d| = 1/2."""
    if delta_d == _HALF:
        return frozenset({(-1, 1), (1, -2)})
    if delta_d == -_HALF:
        return frozenset({(-1, 2), (1, -1)})
    return None


@dataclass(frozen=True)
class Verdict:
    """Outcome of a trajectory check."""

    check: str
    status: str  # "pass" | "fail" | "not-entered"
    entry_step: Optional[int] = None
    violations: tuple = ()

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_record(self) -> dict:
        return {
            "check": self.check,
            "status": self.status,
            "entry_step": self.entry_step,
            "violations": list(self.violations),
        }


def verify_capture(traj: Trajectory, region: EntryRegion) -> Verdict:
    """Check that once the capture region is hit, every later quantized
    pair stays in the minimal invariant set.

    Expects a shifted-coordinate trajectory with constant residual
    disturbance.  Returns status ``not-entered`` when the region is never
    reached within the horizon.
    """
    entry = None
    for r in traj.records:
        if in_entry_region(r.e, r.u, region):
            entry = r.k
            break
    if entry is None:
        return Verdict("capture", "not-entered")
    allowed = minimal_invariant_pairs(region.delta_d)
    violations = tuple(
        r.k for r in traj.records[entry + 1:] if (r.rho_e, r.rho_u) not in allowed
    )
    status = "pass" if not violations else "fail"
    return Verdict("capture", status, entry, violations)


def verify_control_lock(
    traj: Trajectory,
    alpha: Scalar,
    entry_step: int,
    tol: float = 1e-12,
) -> Verdict:
    """Check that from two steps after capture the residual control equals
    ``-alpha * rho(e)`` (exactly in exact mode, within ``tol`` in float)."""
    violations = []
    for r in traj.records:
        if r.k <= entry_step + 1:
            continue
        expected = -alpha * r.rho_e
        if traj.mode == "exact":
            ok = r.u == expected
        else:
            ok = abs(r.u - expected) <= tol
        if not ok:
            violations.append(r.k)
    status = "pass" if not violations else "fail"
    return Verdict("control-lock", status, entry_step, tuple(violations))


def steps_to_switch(delta_d: Scalar, e_start: Scalar) -> int:
    """Number of pure-drift steps from ``e_start`` until the quantized
    error first leaves zero: ceil((sign(delta_d)/2 - e_start) / delta_d).

    Exact for exact inputs.  Undefined for zero residual (the error then
    never leaves zero).
    """
    if delta_d == 0:
        raise ValueError("zero residual disturbance never triggers a switch")
    if not -_HALF < e_start < _HALF:
        raise ValueError("e_start must lie strictly inside (-1/2, 1/2)")
    return math.ceil((_HALF * sign(delta_d) - e_start) / delta_d)


@dataclass(frozen=True)
class Interval:
    """Interval with individually open/closed endpoints."""

    lo: Scalar
    hi: Scalar
    lo_closed: bool
    hi_closed: bool

    def __contains__(self, x: Scalar) -> bool:
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above and below

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{format_scalar(self.lo)}, {format_scalar(self.hi)}{right}"

    def to_record(self) -> dict:
        return {"lo": format_scalar(self.lo), "hi": format_scalar(self.hi),
                "lo_closed": self.lo_closed, "hi_closed": self.hi_closed}


def cycle_error_band(delta_d: Scalar) -> Interval:
    """Band containing the error while the loop lives in the minimal set:
    [-1/2+dd, 1/2+dd) for dd > 0 and (-1/2+dd, 1/2+dd] for dd < 0.

    The degenerate dd = 0 case returns [-1/2, 1/2), matching the capture
    bound on the error.
    """
    if abs(delta_d) >= _HALF:
        raise ValueError("error band defined only for |delta_d| < 1/2")
    if delta_d < 0:
        return Interval(-_HALF + delta_d, _HALF + delta_d, False, True)
    return Interval(-_HALF + delta_d, _HALF + delta_d, True, False)


def verify_band(traj: Trajectory, band: Interval, start: int) -> Verdict:
    """Check that every error sample from step ``start`` on lies in ``band``."""
    violations = tuple(
        r.k for r in traj.records if r.k >= start and r.e not in band
    )
    status = "pass" if not violations else "fail"
    return Verdict("band", status, start, violations)


@dataclass(frozen=True)
class CycleReport:
    """Detected or predicted periodicity of a run.

    ``n`` counts the switch steps per period (steps taken on the nonzero
    branch, i.e. with nonzero quantized error); ``m`` is the period in
    steps; ``entry_step`` the first step from which the state recurs.
    ``witness`` holds one full period of (e, u) states for detected cycles.
    """

    periodic: bool
    n: Optional[int] = None
    m: Optional[int] = None
    entry_step: Optional[int] = None
    error_band: Optional[Interval] = None
    witness: Optional[tuple] = None

    def to_record(self) -> dict:
        return {
            "periodic": self.periodic,
            "n": self.n,
            "m": self.m,
            "entry_step": self.entry_step,
            "error_band": self.error_band.to_record() if self.error_band else None,
        }


def predict_cycle(delta_d: Scalar) -> CycleReport:
    """Predict the cycle from the residual disturbance alone.

    ``|delta_d| = n/m`` in lowest terms yields an n-switch cycle of period
    m; zero residual is a degenerate fixed point (n=0, m=1).  Only exact
    rationals are accepted: the rational/irrational dichotomy is
    meaningless for binary floats, which are all rational.
    """
    if not is_exact(delta_d):
        raise TypeError("cycle prediction requires an exact rational delta_d")
    dd = Fraction(delta_d)
    if abs(dd) > _HALF:
        raise ValueError("a disturbance rounding error satisfies |delta_d| <= 1/2")
    if dd == 0:
        return CycleReport(periodic=True, n=0, m=1,
                           error_band=cycle_error_band(0))
    if abs(dd) == _HALF:
        warnings.warn(
            "|delta_d| = 1/2 is outside the error-band hypotheses; "
            "no band attached", stacklevel=2)
        band = None
    else:
        band = cycle_error_band(dd)
    return CycleReport(periodic=True, n=abs(dd.numerator), m=dd.denominator,
                       error_band=band)


def _count_switches(traj: Trajectory, start: int, period: int) -> int:
    return sum(1 for r in traj.records[start:start + period] if r.rho_e != 0)


def detect_cycle(traj: Trajectory) -> CycleReport:
    """Find the smallest period and entry step with an exact state
    recurrence sustained to the end of the trajectory.

    First-recurrence hashing of the exact (e, u) states gives the
    candidate (entry, period); a confirmation pass then checks the
    recurrence holds for every remaining step, which guards against
    coincidental collisions on trajectories that are not autonomous
    (e.g. under a time-varying disturbance).  Float trajectories are
    rejected; use :func:`detect_cycle_approx`.
    """
    if traj.mode != "exact":
        raise TypeError("exact-state detection needs an exact trajectory; "
                        "use detect_cycle_approx for float runs")
    states = traj.states()
    seen: dict = {}
    for k, state in enumerate(states):
        j = seen.get(state)
        if j is not None:
            period = k - j
            if all(states[i] == states[i + period]
                   for i in range(j, len(states) - period)):
                return CycleReport(
                    periodic=True,
                    n=_count_switches(traj, j, period),
                    m=period,
                    entry_step=j,
                    witness=tuple(states[j:j + period]),
                )
        else:
            seen[state] = k
    return CycleReport(periodic=False)


def detect_cycle_approx(traj: Trajectory, tol: float = 1e-9) -> CycleReport:
    """Near-recurrence detection for float trajectories.

    States are bucketed on a grid of cell size ``tol``; any pair within
    ``tol`` in max-norm lands in the same or an adjacent cell, so scanning
    the 3x3 neighbourhood finds all candidates.  A candidate (entry,
    period) is reported only if the near-recurrence is sustained to the
    end of the trajectory.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    states = traj.states()

    def close(a, b):
        return abs(a[0] - b[0]) <= tol and abs(a[1] - b[1]) <= tol

    cells: dict = {}
    for k, state in enumerate(states):
        ci = math.floor(state[0] / tol)
        cj = math.floor(state[1] / tol)
        candidates = []
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                candidates.extend(cells.get((ci + di, cj + dj), ()))
        for j in sorted(candidates):
            period = k - j
            if close(states[j], state) and all(
                close(states[i], states[i + period])
                for i in range(j, len(states) - period)
            ):
                return CycleReport(
                    periodic=True,
                    n=_count_switches(traj, j, period),
                    m=period,
                    entry_step=j,
                    witness=tuple(states[j:j + period]),
                )
        cells.setdefault((ci, cj), []).append(k)
    return CycleReport(periodic=False)
