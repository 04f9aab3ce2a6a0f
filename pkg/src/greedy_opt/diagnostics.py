"""Rate fitting and machine-checkable verdicts over run traces.

The convergence and rate guarantees assert existence of a constant; verdicts
therefore calibrate the constant on the first few iterations and test whether
the remaining gaps stay under constant * bound_shape.  The decay shape is the
falsifiable part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RateFit",
    "fit_rate",
    "FIXED_SUMMABLE_CONVERGENCE",
    "POWER_SCHEDULE_RATE",
    "SPHERE_POWER_SCHEDULE_RATE",
    "ADAPTIVE_CONVERGENCE",
    "ADAPTIVE_RATE",
    "ADAPTIVE_SPHERE_RATE",
    "LINE_SEARCH_CONVERGENCE",
    "ALL_CLAIMS",
    "ClaimVerdict",
    "claim_verdict",
    "smallest_dominating_constant",
    "bound_holds",
    "SummabilityReport",
    "summability_report",
]


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log gap versus log m."""

    status: str  # "ok" or "degenerate"
    window: tuple
    n_points: int
    exponent: float | None = None
    intercept: float | None = None
    r_squared: float | None = None

    def describe(self):
        return {"status": self.status, "window": list(self.window),
                "n_points": self.n_points, "exponent": self.exponent,
                "intercept": self.intercept, "r_squared": self.r_squared}


def fit_rate(trace, window=None, min_points=10):
    """Fit gap_m ~ exp(intercept) * m^exponent over a window of iterations.

    Only iterations with positive gaps enter the fit.  Fewer than
    ``min_points`` usable points (e.g. after exact convergence) yields a
    DEGENERATE fit instead of a slope.
    """
    gaps = trace.gaps()
    if gaps is None:
        raise ValueError("rate fit needs a trace with a known or reference infimum")
    total = len(gaps)
    if window is None:
        window = (max(1, total // 10), total)
    lo, hi = int(window[0]), int(window[1])
    if lo < 1 or hi > total or hi <= lo:
        raise ValueError(f"window {window} outside trace of length {total}")
    m = np.arange(lo, hi + 1, dtype=float)
    a = gaps[lo - 1:hi]
    usable = a > 0.0
    n = int(np.sum(usable))
    if n < min_points:
        return RateFit(status="degenerate", window=(lo, hi), n_points=n)
    x = np.log(m[usable])
    y = np.log(a[usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.dot(resid, resid))
    ybar = y - np.mean(y)
    ss_tot = float(np.dot(ybar, ybar))
    r2 = 1.0 if ss_tot == 0.0 and ss_res == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(status="ok", window=(lo, hi), n_points=n,
                   exponent=float(slope), intercept=float(intercept),
                   r_squared=float(r2))


FIXED_SUMMABLE_CONVERGENCE = "fixed-summable-convergence"
POWER_SCHEDULE_RATE = "power-schedule-rate"
SPHERE_POWER_SCHEDULE_RATE = "sphere-power-schedule-rate"
ADAPTIVE_CONVERGENCE = "adaptive-convergence"
ADAPTIVE_RATE = "adaptive-rate"
ADAPTIVE_SPHERE_RATE = "adaptive-sphere-rate"
LINE_SEARCH_CONVERGENCE = "line-search-convergence"

ALL_CLAIMS = (
    FIXED_SUMMABLE_CONVERGENCE,
    POWER_SCHEDULE_RATE,
    SPHERE_POWER_SCHEDULE_RATE,
    ADAPTIVE_CONVERGENCE,
    ADAPTIVE_RATE,
    ADAPTIVE_SPHERE_RATE,
    LINE_SEARCH_CONVERGENCE,
)


@dataclass
class ClaimVerdict:
    """Outcome of checking one convergence/rate claim against a run.

    ``bound_satisfied`` is meaningful only when ``preconditions_met``; the
    reasons list explains any unmet hypothesis.
    """

    claim: str
    preconditions_met: bool
    reasons: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    bound_satisfied: bool | None = None
    details: dict = field(default_factory=dict)

    def describe(self):
        return {"claim": self.claim, "preconditions_met": self.preconditions_met,
                "reasons": list(self.reasons), "notes": list(self.notes),
                "bound_satisfied": self.bound_satisfied,
                "details": dict(self.details)}


def smallest_dominating_constant(gaps, bounds, upto):
    """Smallest C with gap_m <= C * bound_m for the first ``upto`` iterations."""
    upto = min(int(upto), len(gaps))
    ratios = [gaps[i] / bounds[i] for i in range(upto) if gaps[i] > 0.0]
    return max(ratios) if ratios else 0.0


def bound_holds(gaps, bounds, C, start):
    """gap_m <= C * bound_m for every m > start (monotone in C by construction)."""
    for i in range(int(start), len(gaps)):
        if gaps[i] > C * bounds[i]:
            return False
    return True


def _first_violation(gaps, bounds, C, start):
    for i in range(int(start), len(gaps)):
        if gaps[i] > C * bounds[i]:
            return i + 1
    return None


def _power_series_budget(gamma, q, c, s, terms=1_000_000):
    """Upper bound on gamma * sum_k (c k^-s)^q via partial sum plus integral tail."""
    a = s * q
    if a <= 1.0:
        return math.inf
    k = np.arange(1, terms + 1, dtype=float)
    return gamma * c**q * (float(np.sum(k ** (-a)))
                           + terms ** (1.0 - a) / (a - 1.0))


def _tau_array(trace):
    if trace.t_used is None:
        return None
    return np.asarray(trace.t_used, dtype=float)


def _mu_params(trace):
    """(gamma, q) of the majorant governing the run, from its config."""
    mu = trace.config.get("mu")
    if mu is None:
        mu = trace.config.get("objective", {}).get("majorant")
    if mu and mu.get("kind") == "power":
        return float(mu["gamma"]), float(mu["q"])
    return None


def claim_verdict(claim, trace, r=None, hull_radius=None, tolerance=1e-2,
                  calibration=10):
    """Check one convergence/rate claim against a finished run.

    Hypotheses are verified mechanically where possible (coefficient series via
    partial sums plus tail bounds, monotone weakness sequences, dictionary
    type); anything unverifiable lands in the reasons (blocking) or notes
    (informational).  For rate claims the constant is calibrated on the first
    ``calibration`` iterations and the remaining gaps are tested against
    C * bound_m.  Convergence claims instead require the final gap to fall
    below ``tolerance``.
    """
    if claim not in ALL_CLAIMS:
        raise ValueError(f"unknown claim {claim!r}")
    v = ClaimVerdict(claim=claim, preconditions_met=True)
    cfg = trace.config
    algorithm = cfg.get("algorithm")
    gaps = trace.gaps()
    if gaps is None:
        v.preconditions_met = False
        v.reasons.append("no known or reference infimum on the trace")
        return v
    if len(gaps) == 0:
        v.bound_satisfied = True
        v.notes.append("empty trace: stopped before the first iteration")
        return v

    if claim == FIXED_SUMMABLE_CONVERGENCE:
        _check_fixed_summable(v, trace, algorithm)
        if v.preconditions_met:
            final = float(gaps[-1])
            v.bound_satisfied = final <= tolerance
            v.details.update({"final_gap": final, "tolerance": tolerance})
        return v

    if claim in (ADAPTIVE_CONVERGENCE, LINE_SEARCH_CONVERGENCE):
        wanted = "GGA_ADAPTIVE" if claim == ADAPTIVE_CONVERGENCE else "GEGA"
        if algorithm != wanted:
            v.preconditions_met = False
            v.reasons.append(f"algorithm {algorithm} is not {wanted}")
            return v
        final = float(gaps[-1])
        v.bound_satisfied = final <= tolerance
        v.details.update({"final_gap": final, "tolerance": tolerance})
        return v

    bounds = _rate_bounds(v, trace, claim, algorithm, r=r,
                          hull_radius=hull_radius)
    if not v.preconditions_met:
        return v
    C = smallest_dominating_constant(gaps, bounds, calibration)
    start = min(calibration, len(gaps))
    ok = bound_holds(gaps, bounds, C, start)
    v.bound_satisfied = bool(ok)
    v.details.update({
        "constant": C,
        "calibration": calibration,
        "first_violation": _first_violation(gaps, bounds, C, start),
        "final_gap": float(gaps[-1]),
    })
    return v


def _check_fixed_summable(v, trace, algorithm):
    if algorithm not in ("GGA_FIXED", "EGA", "GBE"):
        v.preconditions_met = False
        v.reasons.append(f"algorithm {algorithm} is not a fixed-coefficient scheme")
        return
    ts = _tau_array(trace)
    if ts is not None and len(ts) and not np.all(ts == ts[0]):
        v.preconditions_met = False
        v.reasons.append("weakness sequence is not constant")
    coeffs = trace.config.get("coefficients")
    if coeffs is None:
        v.preconditions_met = False
        v.reasons.append("run carries no coefficient schedule")
        return
    mu = _mu_params(trace)
    if mu is None:
        v.preconditions_met = False
        v.reasons.append("no power majorant available to budget the series")
        return
    gamma, q = mu
    if coeffs.get("kind") != "power":
        v.preconditions_met = False
        v.reasons.append("explicit coefficient list: series tail unverifiable")
        return
    c, s = float(coeffs["c"]), float(coeffs["s"])
    if c > 1.0 + 1e-12:
        v.preconditions_met = False
        v.reasons.append(f"c = {c} exceeds 1, coefficients leave [0, 1]")
    # s <= 1 makes sum c k^-s diverge, which is the required mass condition
    if s > 1.0:
        v.preconditions_met = False
        v.reasons.append(f"s = {s} > 1: coefficient mass is summable")
    budget = _power_series_budget(gamma, q, c, s)
    v.details["mu_series_budget"] = budget
    if not budget <= 1.0 + 1e-12:
        v.preconditions_met = False
        v.reasons.append(f"sum of mu(c_k) bounded by {budget:.6g} > 1")


def _rate_bounds(v, trace, claim, algorithm, r=None, hull_radius=None):
    """Bound shape per claim, with hypothesis checks recorded on the verdict."""
    cfg = trace.config
    M = len(trace)
    dict_kind = cfg.get("dictionary", {}).get("kind")
    mu = _mu_params(trace)
    if mu is None:
        v.preconditions_met = False
        v.reasons.append("claim needs a power majorant")
        return None
    gamma, q = mu

    if claim in (POWER_SCHEDULE_RATE, SPHERE_POWER_SCHEDULE_RATE):
        if algorithm not in ("GGA_FIXED", "EGA", "GBE"):
            v.preconditions_met = False
            v.reasons.append(f"algorithm {algorithm} is not a fixed-coefficient scheme")
            return None
        coeffs = cfg.get("coefficients", {})
        if coeffs.get("kind") != "power":
            v.preconditions_met = False
            v.reasons.append("rate claims need a power coefficient schedule")
            return None
        c, s = float(coeffs["c"]), float(coeffs["s"])
        budget = gamma * c**q  # times series sum, checked below
        series = _power_series_budget(gamma, q, c, s)
        v.details["mu_series_budget"] = series
        if not series <= 1.0 + 1e-12:
            v.preconditions_met = False
            v.reasons.append(f"schedule violates the series budget ({series:.6g} > 1)")
        ts = _tau_array(trace)
        t = float(ts[0]) if ts is not None and len(ts) else 1.0
        if ts is not None and len(ts) and not np.all(ts == ts[0]):
            v.preconditions_met = False
            v.reasons.append("weakness sequence is not constant")

        if claim == POWER_SCHEDULE_RATE:
            s_wanted = (t + 1.0) / (t + q)
            if abs(s - s_wanted) > 1e-12:
                v.preconditions_met = False
                v.reasons.append(f"s mismatch: schedule has s = {s}, "
                                 f"(t+1)/(t+q) = {s_wanted}")
            r_max = t * (1.0 - s)
            if r is None:
                r = 0.9 * r_max  # harness convention, not part of the claim
            if not (0.0 < r < r_max):
                v.preconditions_met = False
                v.reasons.append(f"exponent r = {r} outside (0, {r_max})")
            _check_hull(v, trace, hull_radius)
            v.details.update({"r": r, "t": t, "s": s})
            m = np.arange(1, M + 1, dtype=float)
            return m ** (-float(r))

        # sphere variant
        if dict_kind != "sphere":
            v.preconditions_met = False
            v.reasons.append("sphere rate claim needs the sphere dictionary")
        if not (0.0 < s < 1.0):
            v.preconditions_met = False
            v.reasons.append(f"s = {s} outside (0, 1)")
        if not math.isfinite(cfg.get("objective", {}).get("region_radius",
                                                          math.inf)):
            v.preconditions_met = False
            v.reasons.append("objective region is unbounded")
        expo = s * (q - 1.0)
        v.details.update({"exponent": expo, "s": s})
        m = np.arange(1, M + 1, dtype=float)
        return m ** (-expo)

    # adaptive rate claims
    if algorithm != "GGA_ADAPTIVE":
        v.preconditions_met = False
        v.reasons.append(f"algorithm {algorithm} is not the adaptive scheme")
        return None
    b = cfg.get("b")
    if b is None or not (0.0 < b < 1.0):
        v.preconditions_met = False
        v.reasons.append("tuning parameter b outside (0, 1)")
        return None
    ts = _tau_array(trace)
    if ts is None or len(ts) != M:
        v.preconditions_met = False
        v.reasons.append("trace carries no realized weakness values")
        return None
    p = q / (q - 1.0)
    mass = 1.0 + np.cumsum(ts ** p)

    if claim == ADAPTIVE_RATE:
        if np.any(np.diff(ts) > 0):
            v.preconditions_met = False
            v.reasons.append("weakness sequence is not nonincreasing")
        _check_hull(v, trace, hull_radius)
        expo = ts * (1.0 - b) * (q - 1.0) / (q + ts * (1.0 - b))
        v.details["exponent_final"] = float(expo[-1])
        return mass ** (-expo)

    # ADAPTIVE_SPHERE_RATE
    if dict_kind != "sphere":
        v.preconditions_met = False
        v.reasons.append("sphere rate claim needs the sphere dictionary")
    if not math.isfinite(cfg.get("objective", {}).get("region_radius",
                                                      math.inf)):
        v.preconditions_met = False
        v.reasons.append("objective region is unbounded")
    v.details["exponent"] = 1.0 - q
    return mass ** (1.0 - q)


def _check_hull(v, trace, hull_radius):
    """Gap is measured against the infimum over the scaled dictionary hull; when
    the known minimizer provably lies inside that hull the two coincide."""
    if hull_radius is None:
        v.notes.append("hull radius not supplied; gap assumed to match the "
                       "hull-constrained infimum")
        return
    v.details["hull_radius"] = hull_radius
    cfg = trace.config
    target = cfg.get("objective", {}).get("target")
    kind = cfg.get("dictionary", {}).get("kind")
    if target is not None and kind == "coordinate":
        l1 = float(np.sum(np.abs(np.asarray(target, dtype=float))))
        if l1 > hull_radius * (1.0 + 1e-12):
            v.preconditions_met = False
            v.reasons.append(f"minimizer l1 norm {l1:.6g} exceeds hull radius "
                             f"{hull_radius:.6g}")
    else:
        v.notes.append("hull membership of the minimizer not verified")


@dataclass
class SummabilityReport:
    """Partial-sum growth of step masses and mass-weighted scores.

    Growth labels compare the whole sum against its value a decade of
    iterations earlier; a heuristic, clearly not a proof of (non)summability.
    ``min_weighted_score`` is min over n of (sum_{j<=n} c_j) * score(G_n), the
    quantity a convergent run drives toward zero.
    """

    sum_c: np.ndarray
    sum_cED: np.ndarray
    sum_c_class: str
    sum_cED_class: str
    min_weighted_score: float | None
    argmin_weighted: int | None

    def describe(self):
        return {"sum_c_class": self.sum_c_class,
                "sum_cED_class": self.sum_cED_class,
                "min_weighted_score": self.min_weighted_score,
                "argmin_weighted": self.argmin_weighted}


def _classify_growth(series):
    n = len(series)
    if n < 10:
        return "too-short"
    earlier = series[n // 10 - 1]
    if earlier <= 0:
        return "diverging-looking" if series[-1] > 0 else "bounded-looking"
    return "diverging-looking" if series[-1] / earlier >= 1.05 else "bounded-looking"


def summability_report(trace):
    if len(trace) == 0:
        return SummabilityReport(np.array([]), np.array([]), "empty", "empty",
                                 None, None)
    sum_c = np.asarray(trace.sum_c, dtype=float)
    sum_ced = np.asarray(trace.sum_cED, dtype=float)
    weighted = sum_c * np.asarray(trace.ED, dtype=float)
    k = int(np.argmin(weighted))
    return SummabilityReport(
        sum_c=sum_c,
        sum_cED=sum_ced,
        sum_c_class=_classify_growth(sum_c),
        sum_cED_class=_classify_growth(sum_ced),
        min_weighted_score=float(weighted[k]),
        argmin_weighted=k + 1,
    )
