"""Greedy expansion runs: atom selection plus per-step coefficient rules.

All five schemes share one driver.  A run repeatedly scores the negative
gradient against the dictionary, picks an atom, chooses a step coefficient
(prescribed, solved from the majorant, or by exact line search), and adds the
scaled atom to the approximant; coefficients, once chosen, are never revised.
Traces capture everything the rate diagnostics need downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import dual_norm, lp_norm, pairing
from .dictionaries import (
    ARGMAX,
    FiniteDictionary,
    SphereDictionary,
    argmin_atom_by_objective,
    greedy_score,
    select_atom,
)

__all__ = [
    "StopRule",
    "WeaknessSequence",
    "CoefficientSequence",
    "make_power_coefficients",
    "solve_stepsize",
    "LineSearchResult",
    "line_search_exact",
    "MajorantViolationError",
    "ExpansionState",
    "RunTrace",
    "run_gbe",
    "run_ega",
    "run_gga_fixed",
    "run_gga_adaptive",
    "run_gega",
    "iter_states",
    "BoundCheck",
    "score_gap_bound",
    "check_rate_bound",
]


@dataclass(frozen=True)
class StopRule:
    """When to end a run.

    ``grad_tol`` is the dual-norm threshold standing in for an exactly zero
    gradient; None defaults to 1e-12 * (1 + |E(0)|) at run start.  ``target_gap``
    stops once E(G_m) - known_inf falls below it (ignored when the objective
    has no known infimum).
    """

    max_iter: int
    grad_tol: float | None = None
    target_gap: float | None = None

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.grad_tol is not None and self.grad_tol < 0:
            raise ValueError("grad_tol must be nonnegative")


class WeaknessSequence:
    """Per-iteration weakness parameters t_m in (0, 1]."""

    def __init__(self, kind, t=None, values=None, fn=None):
        self.kind = kind
        self._t = t
        self._values = list(values) if values is not None else None
        self._fn = fn

    @classmethod
    def constant(cls, t):
        t = float(t)
        if not (0.0 < t <= 1.0):
            raise ValueError("t must lie in (0, 1]")
        return cls("constant", t=t)

    @classmethod
    def explicit(cls, values):
        vals = [float(v) for v in values]
        if not vals:
            raise ValueError("empty weakness sequence")
        return cls("explicit", values=vals)

    @classmethod
    def formula(cls, fn):
        return cls("formula", fn=fn)

    def __call__(self, m):
        if self.kind == "constant":
            t = self._t
        elif self.kind == "explicit":
            if m > len(self._values):
                raise IndexError(f"weakness sequence exhausted at m={m}")
            t = self._values[m - 1]
        else:
            t = float(self._fn(m))
        if not (0.0 < t <= 1.0):
            raise ValueError(f"t_{m} = {t} outside (0, 1]")
        return t

    def describe(self):
        if self.kind == "constant":
            return {"kind": "constant", "t": self._t}
        if self.kind == "explicit":
            return {"kind": "explicit", "values": self._values}
        return {"kind": "formula"}


def _as_weakness(tau):
    if isinstance(tau, WeaknessSequence):
        return tau
    return WeaknessSequence.constant(float(tau))


class CoefficientSequence:
    """Prescribed step coefficients c_k.

    POWER holds c_k = c * k^(-s); EXPLICIT holds a finite list (zeros are
    tolerated and show up as no-progress flags in traces).
    """

    def __init__(self, kind, c=None, s=None, values=None, meta=None):
        self.kind = kind
        self.c = c
        self.s = s
        self._values = list(values) if values is not None else None
        self.meta = dict(meta or {})

    @classmethod
    def power(cls, c, s, meta=None):
        c, s = float(c), float(s)
        if c <= 0:
            raise ValueError("c must be positive")
        if not (0.0 < s <= 1.0):
            raise ValueError("s must lie in (0, 1]")
        return cls("power", c=c, s=s, meta=meta)

    @classmethod
    def explicit(cls, values):
        vals = [float(v) for v in values]
        if any(v < 0 for v in vals):
            raise ValueError("coefficients must be nonnegative")
        return cls("explicit", values=vals)

    def value(self, k):
        if self.kind == "power":
            return self.c * float(k) ** (-self.s)
        if k > len(self._values):
            raise IndexError(f"coefficient sequence exhausted at k={k}")
        return self._values[k - 1]

    def describe(self):
        if self.kind == "power":
            out = {"kind": "power", "c": self.c, "s": self.s}
            out.update(self.meta)
            return out
        return {"kind": "explicit", "values": self._values}


def make_power_coefficients(t, q, gamma, terms=1_000_000):
    """Power-decay schedule c * k^(-s) calibrated against the majorant.

    Sets s = (t + 1) / (t + q) and picks c so that gamma * c^q * Z = 1, where Z
    upper-bounds the full series sum_k k^(-s q) by ``terms`` exact terms plus an
    integral tail.  The summability budget gamma * sum_k mu(c_k) <= 1 then holds
    by construction.
    """
    t, q, gamma = float(t), float(q), float(gamma)
    if not (0.0 < t <= 1.0):
        raise ValueError("t must lie in (0, 1]")
    if not (1.0 < q <= 2.0):
        raise ValueError("q must lie in (1, 2]")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    s = (t + 1.0) / (t + q)
    a = s * q
    if a <= 1.0 + 1e-12:
        raise ValueError(f"series exponent s*q = {a} must exceed 1; "
                         "the coefficient series would diverge")
    k = np.arange(1, terms + 1, dtype=float)
    series_bound = float(np.sum(k ** (-a))) + terms ** (1.0 - a) / (a - 1.0)
    c = (gamma * series_bound) ** (-1.0 / q)
    meta = {"t": t, "q": q, "gamma": gamma, "series_bound": series_bound}
    return CoefficientSequence.power(c, s, meta=meta)


def solve_stepsize(majorant, slope, c_max=None):
    """Positive c solving mu(c)/c = slope, or None when no solution exists.

    Power majorants solve in closed form, c = (slope/gamma)^(1/(q-1)).
    Tabulated majorants bisect the nondecreasing map mu(c)/c over (0, c_max]
    (c_max defaults to the majorant's domain bound, which must then be finite);
    if mu(c)/c stays below the slope everywhere, returns None and the caller
    falls back to a unit step.
    """
    slope = float(slope)
    if slope <= 0:
        raise ValueError("slope must be positive (stopping fires upstream)")
    if majorant.is_power:
        return float((slope / majorant.gamma) ** (1.0 / (majorant.q - 1.0)))
    top = float(c_max) if c_max is not None else majorant.domain_bound
    if not math.isfinite(top) or top <= 0:
        raise ValueError("tabulated majorants need a finite positive search bound")
    f = majorant.slope
    if f(top) < slope:
        return None
    hi = top
    lo = top
    while f(lo) > slope:
        hi = lo
        lo *= 0.5
        if lo < 1e-300:
            return lo
    if f(lo) == slope:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == slope:
            return mid
        if fm < slope:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class LineSearchResult:
    c: float
    value: float
    clamped: bool = False


def line_search_exact(E, start, direction, c_hi=1.0, tol=1e-12, bound=None):
    """Exact minimization of the convex section c -> E(start + c * direction).

    Brackets by doubling from [0, c_hi] on the side the derivative points to
    (signed steps are allowed), then bisects on the directional derivative until
    the minimizer is located within ``tol``.  If the derivative never changes
    sign before |c| reaches ``bound`` (default twice the objective's region
    radius), the bound is returned with ``clamped=True``.
    """
    if bound is None:
        bound = 2.0 * E.region_radius
    if bound <= 0 or c_hi <= 0:
        raise ValueError("bound and c_hi must be positive")

    def deriv(c):
        return pairing(E.gradient(start + c * direction), direction)

    d0 = deriv(0.0)
    if d0 == 0.0:
        return LineSearchResult(0.0, E(start), False)
    if d0 > 0.0:
        res = line_search_exact(E, start, -direction, c_hi=c_hi, tol=tol,
                                bound=bound)
        return LineSearchResult(-res.c, res.value, res.clamped)

    lo, hi = 0.0, float(c_hi)
    while True:
        if hi > bound:
            hi = bound
        dh = deriv(hi)
        if dh == 0.0:
            return LineSearchResult(hi, E(start + hi * direction), False)
        if dh > 0.0:
            break
        if hi >= bound:
            return LineSearchResult(bound, E(start + bound * direction), True)
        lo, hi = hi, 2.0 * hi

    for _ in range(200):
        if (hi - lo) <= 2.0 * tol:
            break
        mid = 0.5 * (lo + hi)
        dm = deriv(mid)
        if dm == 0.0:
            return LineSearchResult(mid, E(start + mid * direction), False)
        if dm < 0.0:
            lo = mid
        else:
            hi = mid
    c = 0.5 * (lo + hi)
    return LineSearchResult(c, E(start + c * direction), False)


class MajorantViolationError(RuntimeError):
    """The per-step energy decrease fell short of t (1-b) c * score.

    This indicates the declared majorant does not dominate the actual
    smoothness modulus along the run.
    """

    def __init__(self, iteration, observed, required):
        self.iteration = iteration
        self.observed = observed
        self.required = required
        super().__init__(
            f"energy decrease violated at iteration {iteration}: "
            f"E(G_m) = {observed!r} exceeds the required bound {required!r}; "
            "the declared majorant does not dominate the smoothness modulus")


@dataclass
class ExpansionState:
    """Live state of an expansion after m iterations."""

    G: np.ndarray
    coeffs: list
    atoms: list
    m: int
    A: float  # sum of |c_j|


@dataclass
class RunTrace:
    """Per-iteration log of an expansion run.

    Row j (0-based) describes iteration m = j + 1: the objective value and
    greedy score at the *new* iterate G_m, the applied coefficient, the chosen
    atom, the cumulative coefficient mass A_m = sum |c_j|, the raw partial sums
    sum c_j and sum c_j * score(G_j), and any flags.  E0/ED0 hold the m = 0
    values.  ``t_used`` records the realized weakness parameters for runs that
    have them.
    """

    algorithm: str
    status: str
    E0: float
    ED0: float
    E: list = field(default_factory=list)
    ED: list = field(default_factory=list)
    c: list = field(default_factory=list)
    atoms: list = field(default_factory=list)
    A: list = field(default_factory=list)
    sum_c: list = field(default_factory=list)
    sum_cED: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    infimum: float | None = None
    config: dict = field(default_factory=dict)
    t_used: list | None = None

    def __len__(self):
        return len(self.E)

    def gaps(self):
        """E(G_m) - infimum per iteration, or None when no infimum is known."""
        if self.infimum is None:
            return None
        return np.asarray(self.E, dtype=float) - self.infimum

    @property
    def final_E(self):
        return self.E[-1] if self.E else self.E0

    @property
    def final_gap(self):
        g = self.gaps()
        if g is None:
            return None
        return float(g[-1]) if len(g) else self.E0 - self.infimum


def _run(E, dictionary, stop, algorithm, config, pick, post=None):
    G = np.zeros(E.dim)
    e_cur = E(G)
    e0 = e_cur
    grad = E.gradient(G)
    gtol = stop.grad_tol if stop.grad_tol is not None else 1e-12 * (1.0 + abs(e0))
    score_val, score_atom = greedy_score(-grad, dictionary)
    trace = RunTrace(algorithm=algorithm, status="max-iter", E0=e0,
                     ED0=score_val, infimum=E.infimum, config=config)
    a_mass = 0.0
    s_c = 0.0
    s_ced = 0.0
    for m in range(1, stop.max_iter + 1):
        if dual_norm(grad, dictionary.norm) <= gtol:
            trace.status = "gradient"
            break
        if score_val <= 0.0:
            trace.status = "zero-score"
            break
        atom, c_m, iter_flags = pick(m, G, grad, score_val, score_atom)
        prev_e, prev_score = e_cur, score_val
        G = G + c_m * dictionary.resolve(atom)
        e_cur = E(G)
        grad = E.gradient(G)
        score_val, score_atom = greedy_score(-grad, dictionary)
        if post is not None:
            post(m, prev_e, e_cur, c_m, prev_score)
        if c_m == 0.0:
            iter_flags = iter_flags + ["no-progress"]
        if e_cur > e0 + 2.0:
            iter_flags = iter_flags + ["left-sublevel-2"]
        a_mass += abs(c_m)
        s_c += c_m
        s_ced += c_m * score_val
        trace.E.append(e_cur)
        trace.ED.append(score_val)
        trace.c.append(c_m)
        trace.atoms.append(atom)
        trace.A.append(a_mass)
        trace.sum_c.append(s_c)
        trace.sum_cED.append(s_ced)
        trace.flags.append(";".join(iter_flags))
        if (stop.target_gap is not None and trace.infimum is not None
                and e_cur - trace.infimum <= stop.target_gap):
            trace.status = "target-gap"
            break
    return trace


def _base_config(E, dictionary, stop, seed=None):
    cfg = {
        "objective": E.describe(),
        "dictionary": dictionary.describe(),
        "stop": {"max_iter": stop.max_iter, "grad_tol": stop.grad_tol,
                 "target_gap": stop.target_gap},
    }
    if seed is not None:
        cfg["seed"] = seed
    return cfg


def run_gbe(E, dictionary, t, coeff_rule, stop, mode=ARGMAX, seed=None):
    """Generic expansion: weak-greedy atom, externally prescribed positive steps.

    ``coeff_rule`` maps the iteration index m (1-based) to a positive c_m.
    """
    t = float(t)

    def pick(m, G, grad, sval, satom):
        atom, _ = select_atom(-grad, dictionary, t=t, mode=mode,
                              score=(sval, satom))
        c = float(coeff_rule(m))
        if c <= 0:
            raise ValueError(f"coefficient rule must yield positive steps, "
                             f"got c_{m} = {c}")
        return atom, c, []

    config = _base_config(E, dictionary, stop, seed)
    config.update({"algorithm": "GBE", "tau": {"kind": "constant", "t": t},
                   "mode": mode})
    trace = _run(E, dictionary, stop, "GBE", config, pick)
    trace.t_used = [t] * len(trace)
    return trace


def run_ega(E, dictionary, coeffs, stop, seed=None):
    """Pure objective-greedy expansion with prescribed coefficients.

    Each iteration scans all signed atoms for the one minimizing
    E(G + c_m * atom) and applies exactly that step.  Finite dictionaries only.
    """
    if isinstance(dictionary, SphereDictionary):
        raise TypeError("objective-greedy runs need a finite dictionary")

    def pick(m, G, grad, sval, satom):
        c = float(coeffs.value(m))
        atom, _ = argmin_atom_by_objective(E, G, c, dictionary)
        return atom, c, []

    config = _base_config(E, dictionary, stop, seed)
    config.update({"algorithm": "EGA", "coefficients": coeffs.describe()})
    return _run(E, dictionary, stop, "EGA", config, pick)


def run_gga_fixed(E, dictionary, tau, coeffs, stop, mode=ARGMAX, seed=None):
    """Weak gradient-greedy selection with prescribed coefficients."""
    tau = _as_weakness(tau)
    ts = []

    def pick(m, G, grad, sval, satom):
        t_m = tau(m)
        ts.append(t_m)
        atom, _ = select_atom(-grad, dictionary, t=t_m, mode=mode,
                              score=(sval, satom))
        return atom, float(coeffs.value(m)), []

    config = _base_config(E, dictionary, stop, seed)
    config.update({"algorithm": "GGA_FIXED", "tau": tau.describe(),
                   "coefficients": coeffs.describe(), "mode": mode})
    trace = _run(E, dictionary, stop, "GGA_FIXED", config, pick)
    trace.t_used = ts[:len(trace)]
    return trace


def run_gga_adaptive(E, dictionary, tau, b, stop, majorant=None, mode=ARGMAX,
                     energy_slack=1e-10, seed=None):
    """Gradient-greedy selection with steps solved from the majorant.

    The step solves mu(c)/c = (t_m b / 2) * score, falling back to c = 1 when
    the equation has no solution (flagged).  Every step must satisfy the energy
    decrease E(G_m) <= E(G_{m-1}) - t_m (1-b) c_m * score(G_{m-1}) within
    ``energy_slack``; a violation aborts with MajorantViolationError, since it
    means the majorant fails to dominate the true modulus.
    """
    b = float(b)
    if not (0.0 < b < 1.0):
        raise ValueError("b must lie in (0, 1)")
    tau = _as_weakness(tau)
    mu = majorant if majorant is not None else E.majorant
    c_cap = mu.domain_bound if math.isfinite(mu.domain_bound) else None
    ts = []

    def pick(m, G, grad, sval, satom):
        t_m = tau(m)
        ts.append(t_m)
        atom, _ = select_atom(-grad, dictionary, t=t_m, mode=mode,
                              score=(sval, satom))
        c = solve_stepsize(mu, 0.5 * t_m * b * sval, c_max=c_cap)
        flags = []
        if c is None:
            c = 1.0
            flags.append("unit-step-fallback")
        return atom, float(c), flags

    def post(m, prev_e, new_e, c_m, prev_score):
        required = prev_e - tau(m) * (1.0 - b) * c_m * prev_score
        if new_e > required + energy_slack:
            raise MajorantViolationError(m, new_e, required)

    config = _base_config(E, dictionary, stop, seed)
    config.update({"algorithm": "GGA_ADAPTIVE", "tau": tau.describe(), "b": b,
                   "mu": mu.describe(), "mode": mode,
                   "energy_slack": energy_slack})
    trace = _run(E, dictionary, stop, "GGA_ADAPTIVE", config, pick, post=post)
    trace.t_used = ts[:len(trace)]
    return trace


def run_gega(E, dictionary, tau, stop, mode=ARGMAX, line_tol=1e-12, seed=None):
    """Gradient-greedy selection with exact line search along the chosen atom.

    The one-dimensional minimization runs over all real c (the dictionary is
    symmetric, so signed steps are legitimate); line-search clamping is flagged.
    """
    tau = _as_weakness(tau)
    ts = []

    def pick(m, G, grad, sval, satom):
        t_m = tau(m)
        ts.append(t_m)
        atom, _ = select_atom(-grad, dictionary, t=t_m, mode=mode,
                              score=(sval, satom))
        res = line_search_exact(E, G, dictionary.resolve(atom), tol=line_tol)
        flags = ["clamped"] if res.clamped else []
        return atom, float(res.c), flags

    config = _base_config(E, dictionary, stop, seed)
    config.update({"algorithm": "GEGA", "tau": tau.describe(), "mode": mode,
                   "line_tol": line_tol})
    trace = _run(E, dictionary, stop, "GEGA", config, pick)
    trace.t_used = ts[:len(trace)]
    return trace


def iter_states(trace, dictionary):
    """Replay a trace into per-iteration expansion states.

    Reconstruction applies the same update in the same order as the run, so the
    yielded iterates match the run's bit for bit.  The coeff/atom lists grow in
    place; consume them immediately or copy.
    """
    if not len(trace):
        return
    if dictionary.dim is not None:
        G = np.zeros(dictionary.dim)
    else:
        G = np.zeros(trace.atoms[0].vec.size)
    coeffs, atoms = [], []
    a_mass = 0.0
    for k, (atom, c) in enumerate(zip(trace.atoms, trace.c), start=1):
        G = G + c * dictionary.resolve(atom)
        coeffs.append(c)
        atoms.append(atom)
        a_mass += abs(c)
        yield ExpansionState(G=G, coeffs=coeffs, atoms=atoms, m=k, A=a_mass)


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool


def score_gap_bound(E, dictionary, state, reference, hull_radius, slack=1e-10):
    """Check that the greedy score dominates the scaled optimality gap:

        score(G_k) >= (E(G_k) - E(reference)) / (hull_radius + A_k).

    Valid when reference / hull_radius lies in the closed convex hull of the
    dictionary.  Membership is verified exactly for coordinate dictionaries
    (l1 norm) and the sphere (lp norm); for general finite dictionaries it is
    the caller's responsibility (deciding it exactly is a linear program) and a
    warning is emitted.
    """
    hull_radius = float(hull_radius)
    if hull_radius <= 0:
        raise ValueError("hull_radius must be positive")
    reference = np.asarray(reference, dtype=float)
    if isinstance(dictionary, SphereDictionary):
        if lp_norm(reference, dictionary.norm) > hull_radius * (1.0 + 1e-12):
            raise ValueError("reference lies outside the scaled unit ball")
    elif isinstance(dictionary, FiniteDictionary) and dictionary.kind == "coordinate":
        if float(np.sum(np.abs(reference))) > hull_radius * (1.0 + 1e-12):
            raise ValueError("reference l1 norm exceeds hull_radius")
    else:
        import warnings
        warnings.warn("hull membership not verified for general finite "
                      "dictionaries", RuntimeWarning, stacklevel=2)
    grad = E.gradient(state.G)
    lhs, _ = greedy_score(-grad, dictionary)
    rhs = (E(state.G) - E(reference)) / (hull_radius + state.A)
    return BoundCheck(lhs=lhs, rhs=rhs, holds=bool(lhs >= rhs - slack))


def check_rate_bound(trace, alpha, C, burn_in=0):
    """True iff gap_m <= C * m^(-alpha) for every m > burn_in.

    Returns None when the trace has no infimum to measure gaps against.
    """
    gaps = trace.gaps()
    if gaps is None:
        return None
    if alpha <= 0 or C <= 0:
        raise ValueError("alpha and C must be positive")
    m = np.arange(1, len(gaps) + 1, dtype=float)
    sel = m > burn_in
    return bool(np.all(gaps[sel] <= C * m[sel] ** (-alpha)))
