"""The acceptance suite: each verification criterion as a callable pass/fail check.

The CLI ``verify`` subcommand and the acceptance tests both run these.  Every
criterion is deterministic; the ones that execute runs also write their traces
(when an output directory is supplied) so two invocations can be compared file
by file.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    Majorant,
    NormTag,
    dual_norm,
    lp_norm,
    majorant_domination_witness,
    sample_ball,
    smoothness_gap_check,
    unit_direction,
)
from .dictionaries import FiniteDictionary, SphereDictionary, greedy_score
from .diagnostics import (
    ADAPTIVE_RATE,
    FIXED_SUMMABLE_CONVERGENCE,
    POWER_SCHEDULE_RATE,
    claim_verdict,
    fit_rate,
)
from .greedy import (
    StopRule,
    iter_states,
    make_power_coefficients,
    run_ega,
    run_gega,
    run_gga_adaptive,
    run_gga_fixed,
    score_gap_bound,
    solve_stepsize,
)
from .instances import (
    logistic_20x5,
    p_power_instance,
    quadratic_2d,
    quadratic_2d_unit_l1,
    quadratic_geometric,
    quadratic_nd,
)
from .objectives import reference_infimum, validate_objective, with_majorant
from .traceio import write_trace_csv

__all__ = ["CriterionResult", "VerifyContext", "criterion_names", "run_all"]


@dataclass
class CriterionResult:
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0


@dataclass
class VerifyContext:
    """Where to put traces and which faults (if any) to inject."""

    out_dir: Path | None = None
    fault_gamma_half: bool = False

    def quadratic(self, builder, *args, **kwargs):
        obj = builder(*args, **kwargs)
        if self.fault_gamma_half:
            mu = obj.majorant
            obj = with_majorant(obj, Majorant.power(mu.gamma / 2.0, mu.q))
        return obj

    def write(self, trace, name):
        if self.out_dir is not None:
            write_trace_csv(trace, Path(self.out_dir) / name)


_REFERENCE_CACHE = {}


def _logistic_reference():
    if "logistic-20x5" not in _REFERENCE_CACHE:
        _REFERENCE_CACHE["logistic-20x5"] = reference_infimum(logistic_20x5())
    return _REFERENCE_CACHE["logistic-20x5"]


def _energy_inequality_ok(trace, b, slack=1e-10):
    """Recheck E(G_m) <= E(G_{m-1}) - t_m (1-b) c_m score(G_{m-1}) from the trace."""
    prev_e, prev_score = trace.E0, trace.ED0
    for i in range(len(trace)):
        t_m = trace.t_used[i]
        required = prev_e - t_m * (1.0 - b) * trace.c[i] * prev_score
        if trace.E[i] > required + slack:
            return False, i + 1
        prev_e, prev_score = trace.E[i], trace.ED[i]
    return True, None


def _shipped_objectives(ctx):
    return [
        ("quadratic-2d", ctx.quadratic(quadratic_2d)),
        ("quadratic-64d", ctx.quadratic(quadratic_geometric, 64)),
        ("logistic-20x5", logistic_20x5()),
        ("p-power-1.5", p_power_instance()),
    ]


# --- numbered criteria -----------------------------------------------------


def c01_gradient_method_equivalence(ctx):
    """Adaptive run on the Euclidean sphere must reproduce plain gradient descent."""
    start = time.perf_counter()
    E = ctx.quadratic(quadratic_nd, 10, seed=3)
    gamma = E.majorant.gamma
    b = 0.5
    steps = 100
    trace = run_gga_adaptive(E, SphereDictionary(), 1.0, b,
                             StopRule(max_iter=steps, grad_tol=0.0))
    ctx.write(trace, "c01_gradient_method.csv")

    step = b / (2.0 * gamma)
    x = np.zeros(E.dim)
    iterates = []
    for _ in range(steps):
        x = x - step * E.gradient(x)
        iterates.append(x)

    worst = 0.0
    for state, ref in zip(iter_states(trace, SphereDictionary()), iterates):
        denom = np.maximum(np.abs(ref), 1e-300)
        worst = max(worst, float(np.max(np.abs(state.G - ref) / denom)))
    if len(trace) < steps:
        # run stopped on an exactly zero gradient; descent must have frozen too
        tail = iterates[len(trace):]
        final = trace.E[-1] if len(trace) else trace.E0
        for ref in tail:
            if abs(E(ref) - final) > 1e-12 * (1.0 + abs(final)):
                return CriterionResult("01-gradient-method-equivalence", False,
                                       "greedy run stopped but descent kept moving")
    elapsed = time.perf_counter() - start
    ok = (worst <= 1e-12 and len(trace.flags) == trace.flags.count("")
          and elapsed < 1.0)
    return CriterionResult(
        "01-gradient-method-equivalence", ok,
        f"max per-coordinate relative deviation {worst:.3e} over "
        f"{len(trace)} iterations (tol 1e-12); {elapsed:.2f}s", elapsed)


def c02_adaptive_energy_inequality(ctx):
    """Per-step energy decrease on every shipped adaptive instance."""
    start = time.perf_counter()
    checks = []
    for name, E in _shipped_objectives(ctx):
        dim = E.dim
        trace = run_gga_adaptive(E, FiniteDictionary.coordinate(dim), 1.0, 0.5,
                                 StopRule(max_iter=400))
        ctx.write(trace, f"c02_adaptive_{name}.csv")
        ok, where = _energy_inequality_ok(trace, b=0.5)
        fallback = any("unit-step-fallback" in f for f in trace.flags)
        checks.append((name, ok and not fallback, where, len(trace)))
    elapsed = time.perf_counter() - start
    bad = [c for c in checks if not c[1]]
    detail = "; ".join(f"{n}: {m} iterations" for n, _ok, _w, m in checks)
    if bad:
        detail = "violated at " + ", ".join(f"{n} (iteration {w})"
                                            for n, _ok, w, _m in bad)
    return CriterionResult("02-adaptive-energy-inequality",
                           not bad and elapsed < 10.0,
                           detail + f" (slack 1e-10); {elapsed:.2f}s", elapsed)


def c03_smoothness_gap_sweep(ctx):
    """Convexity/smoothness sandwich on 10^3 random triples per objective."""
    rng = np.random.default_rng(11)
    failures = []
    for name, E in _shipped_objectives(ctx):
        bad = 0
        for _ in range(1000):
            x = sample_ball(rng, E.dim, radius=E.region_radius)
            y = unit_direction(rng, E.dim)
            u = float(rng.uniform(0.0, 2.0))
            if smoothness_gap_check(E, x, y, u, tol=1e-9) is False:
                bad += 1
        if bad:
            failures.append((name, bad))
    ok = not failures
    detail = ("zero violations across 4 objectives x 1000 triples (tol 1e-9)"
              if ok else f"violations: {failures}")
    return CriterionResult("03-smoothness-gap-sweep", ok, detail)


def c04_score_gap_bound_sweep(ctx):
    """Greedy score dominates the scaled gap along a 10^3-iteration run."""
    E = ctx.quadratic(quadratic_geometric, 64)
    dictionary = FiniteDictionary.coordinate(64)
    coeffs = make_power_coefficients(1.0, 2.0, 0.5)
    trace = run_gga_fixed(E, dictionary, 1.0, coeffs, StopRule(max_iter=1000))
    ctx.write(trace, "c04_score_gap_run.csv")
    target = E.minimizer
    hull = float(np.sum(np.abs(target)))
    worst_margin = np.inf
    bad_at = None
    for state in iter_states(trace, dictionary):
        chk = score_gap_bound(E, dictionary, state, target, hull)
        worst_margin = min(worst_margin, chk.lhs - chk.rhs)
        if not chk.holds:
            bad_at = state.m
            break
    ok = bad_at is None and len(trace) == 1000
    return CriterionResult(
        "04-score-gap-bound-sweep", ok,
        f"worst margin {worst_margin:.3e} over {len(trace)} iterations "
        "(slack 1e-10)" if ok else f"bound failed at iteration {bad_at}")


def c05_fixed_schedule_convergence(ctx):
    """Both fixed-coefficient schemes converge on the unit-l1 2-D quadratic."""
    start = time.perf_counter()
    E = ctx.quadratic(quadratic_2d_unit_l1)
    dictionary = FiniteDictionary.coordinate(2)
    coeffs = make_power_coefficients(1.0, 2.0, E.majorant.gamma)
    stop = StopRule(max_iter=10_000)
    gga = run_gga_fixed(E, dictionary, 1.0, coeffs, stop)
    ega = run_ega(E, dictionary, coeffs, stop)
    ctx.write(gga, "c05_fixed_gga.csv")
    ctx.write(ega, "c05_fixed_ega.csv")
    gga_gap = gga.final_gap
    ega_gap = ega.final_gap
    confined = (not any("left-sublevel-2" in f for f in gga.flags)
                and not any("left-sublevel-2" in f for f in ega.flags))
    verdict = claim_verdict(FIXED_SUMMABLE_CONVERGENCE, gga, tolerance=1e-2)
    elapsed = time.perf_counter() - start
    ok = (gga_gap <= 1e-2 and ega_gap <= 1e-2 and confined
          and verdict.preconditions_met and verdict.bound_satisfied
          and elapsed < 5.0)
    return CriterionResult(
        "05-fixed-schedule-convergence", ok,
        f"gaps at m=10^4: greedy-selection {gga_gap:.3e}, objective-scan "
        f"{ega_gap:.3e} (target 1e-2); sublevel confinement {confined}; "
        f"{elapsed:.2f}s", elapsed)


def c06_power_schedule_rate(ctx):
    """Calibrated m^-0.3 envelope for the fixed power schedule (t=1, q=2)."""
    start = time.perf_counter()
    E = ctx.quadratic(quadratic_geometric, 64)
    dictionary = FiniteDictionary.coordinate(64)
    coeffs = make_power_coefficients(1.0, 2.0, 0.5)
    trace = run_gga_fixed(E, dictionary, 1.0, coeffs, StopRule(max_iter=5000))
    ctx.write(trace, "c06_power_rate.csv")
    verdict = claim_verdict(POWER_SCHEDULE_RATE, trace, r=0.3, hull_radius=1.0,
                            calibration=10)
    elapsed = time.perf_counter() - start
    ok = (verdict.preconditions_met and bool(verdict.bound_satisfied)
          and elapsed < 10.0)
    return CriterionResult(
        "06-power-schedule-rate", ok,
        f"C = {verdict.details.get('constant', float('nan')):.4g}, "
        f"preconditions {verdict.preconditions_met} {verdict.reasons}, "
        f"bound {verdict.bound_satisfied}; {elapsed:.2f}s", elapsed)


def c07_adaptive_rate(ctx):
    """Calibrated m^-0.2 envelope for the adaptive scheme (t=1, b=1/2, q=2)."""
    E = ctx.quadratic(quadratic_geometric, 64)
    dictionary = FiniteDictionary.coordinate(64)
    trace = run_gga_adaptive(E, dictionary, 1.0, 0.5,
                             StopRule(max_iter=5000, grad_tol=0.0))
    ctx.write(trace, "c07_adaptive_rate.csv")
    gaps = trace.gaps()
    m = np.arange(1, len(gaps) + 1, dtype=float)
    bounds = m ** (-0.2)
    upto = min(10, len(gaps))
    ratios = [gaps[i] / bounds[i] for i in range(upto) if gaps[i] > 0]
    C = max(ratios) if ratios else 0.0
    ok = bool(np.all(gaps[upto:] <= C * bounds[upto:]))
    fallback = any("unit-step-fallback" in f for f in trace.flags)
    verdict = claim_verdict(ADAPTIVE_RATE, trace, hull_radius=1.0)
    ok = ok and not fallback and verdict.preconditions_met \
        and bool(verdict.bound_satisfied)
    return CriterionResult(
        "07-adaptive-rate", ok,
        f"C = {C:.4g} calibrated on 10 iterations, tail of {len(gaps)} under "
        f"C m^-0.2: {ok}; general-form verdict {verdict.bound_satisfied}")


def c08_adaptive_sphere_rate(ctx):
    """Sphere-dictionary adaptive run decays at least like 1/m."""
    E = ctx.quadratic(quadratic_nd, 10, seed=3)
    trace = run_gga_adaptive(E, SphereDictionary(), 1.0, 0.5,
                             StopRule(max_iter=1000, grad_tol=0.0))
    ctx.write(trace, "c08_sphere_rate.csv")
    gaps = trace.gaps()
    if len(gaps) == 0 or gaps[0] <= 0:
        return CriterionResult("08-adaptive-sphere-rate", False,
                               "degenerate first iteration")
    m = np.arange(1, len(gaps) + 1, dtype=float)
    limit = 10.0 * gaps[0]
    worst = float(np.max(gaps * m))
    ok = worst <= limit and not any("unit-step-fallback" in f
                                    for f in trace.flags)
    return CriterionResult(
        "08-adaptive-sphere-rate", ok,
        f"max over m of gap*m = {worst:.3e} vs 10*gap_1 = {limit:.3e} "
        f"({len(gaps)} iterations)")


def c09_exact_line_search_two_step(ctx):
    """The separable 2-D quadratic is solved exactly in two line-search steps."""
    E = ctx.quadratic(quadratic_2d)
    trace = run_gega(E, FiniteDictionary.coordinate(2), 1.0,
                     StopRule(max_iter=10))
    ctx.write(trace, "c09_line_search_two_step.csv")
    ok = (len(trace) == 2 and trace.status == "gradient"
          and trace.E[-1] <= 1e-18
          and trace.atoms[0].index == 1 and trace.atoms[1].index == 0)
    detail = (f"{len(trace)} iterations, status {trace.status}, "
              f"E(G_2) = {trace.E[-1] if len(trace) >= 2 else float('nan'):.3e}"
              " (tol 1e-18)")
    return CriterionResult("09-exact-line-search-two-step", ok, detail)


def c10_line_search_logistic_convergence(ctx):
    """Exact-line-search run closes the gap on the logistic instance."""
    start = time.perf_counter()
    E = logistic_20x5()
    reference = _logistic_reference()
    trace = run_gega(E, FiniteDictionary.coordinate(E.dim), 1.0,
                     StopRule(max_iter=10_000))
    ctx.write(trace, "c10_gega_logistic.csv")
    gap = trace.final_E - reference
    elapsed = time.perf_counter() - start
    ok = gap <= 1e-4 and elapsed < 30.0
    return CriterionResult(
        "10-line-search-logistic-convergence", ok,
        f"gap to reference infimum {gap:.3e} after {len(trace)} iterations "
        f"(target 1e-4); {elapsed:.1f}s", elapsed)


def c11_oracle_equivalences(ctx):
    """Selection scan, rate fit, and step solver against independent oracles."""
    problems = []

    # full scan versus a naive signed double loop, bit-exact
    rng = np.random.default_rng(21)
    dictionary = FiniteDictionary.gaussian(16, 1000, seed=5)
    for _ in range(100):
        v = rng.standard_normal(16)
        value, atom = greedy_score(v, dictionary)
        best, best_j, best_sign = -1.0, -1, 1
        for j in range(dictionary.size):
            pair = float(np.dot(dictionary.column(j), v))
            for sign in (1, -1):
                if sign * pair > best:
                    best, best_j, best_sign = sign * pair, j, sign
        if not (value == best and atom.index == best_j
                and atom.sign == best_sign):
            problems.append(f"scan mismatch: {value} vs {best}")
            break

    # rate fit on exact power laws
    from .greedy import RunTrace
    for expo, scale in ((-1.0, 1.0), (-0.2, 5.0)):
        m = np.arange(1, 201, dtype=float)
        gaps = scale * m**expo
        trace = RunTrace(algorithm="synthetic", status="max-iter",
                         E0=scale + 1.0, ED0=1.0, E=list(gaps), infimum=0.0)
        fit = fit_rate(trace, window=(1, 200))
        if abs(fit.exponent - expo) > 1e-10:
            problems.append(f"fit exponent {fit.exponent} vs {expo}")

    # closed-form step versus bisection on the same power law
    for gamma in (0.25, 0.5, 2.0):
        for q in (1.5, 1.8, 2.0):
            mu_pow = Majorant.power(gamma, q)
            mu_tab = Majorant.tabulated(lambda u, g=gamma, qq=q: g * u**qq,
                                        domain_bound=1e6)
            for slope in (1e-4, 0.1, 0.5, 3.0):
                closed = solve_stepsize(mu_pow, slope)
                bisected = solve_stepsize(mu_tab, slope)
                if abs(closed - bisected) > 1e-12 * closed:
                    problems.append(
                        f"step solver: {closed} vs {bisected} "
                        f"(gamma={gamma}, q={q}, slope={slope})")

    ok = not problems
    return CriterionResult(
        "11-oracle-equivalences", ok,
        "scan/fit/step-solver all match their oracles" if ok
        else "; ".join(problems[:3]))


def c12_trace_determinism(ctx):
    """Repeating representative runs reproduces their serialized traces byte-for-byte."""
    from .traceio import trace_csv_text

    def both(make):
        return trace_csv_text(make()), trace_csv_text(make())

    E64 = ctx.quadratic(quadratic_geometric, 64)
    d64 = FiniteDictionary.coordinate(64)
    coeffs = make_power_coefficients(1.0, 2.0, 0.5)
    a, b = both(lambda: run_gga_fixed(E64, d64, 1.0, coeffs,
                                      StopRule(max_iter=500)))
    c, d = both(lambda: run_gga_adaptive(logistic_20x5(),
                                         FiniteDictionary.coordinate(5), 1.0,
                                         0.5, StopRule(max_iter=200)))
    ok = a == b and c == d
    return CriterionResult("12-trace-determinism", ok,
                           "repeat runs serialize identically" if ok
                           else "serialized traces differ between repeats")


# --- invariant sweeps ------------------------------------------------------


def inv_objective_contracts(ctx):
    """Convexity, gradients, and supporting hyperplanes on every shipped objective."""
    bad = []
    for name, E in _shipped_objectives(ctx):
        report = validate_objective(E, samples=200, seed=13)
        for key in ("convexity", "supporting_hyperplane", "gradient"):
            if not report[key]:
                bad.append(f"{name}:{key}")
    return CriterionResult("inv-objective-contracts", not bad,
                           "all objectives pass sampling audits" if not bad
                           else "failed: " + ", ".join(bad))


def inv_majorant_domination(ctx):
    """Declared majorants dominate the sampled modulus (the fault injection target)."""
    bad = []
    for name, E in _shipped_objectives(ctx):
        witness = majorant_domination_witness(E, samples=125, seed=17)
        if not witness.ok:
            bad.append(f"{name} ({len(witness.violations)} sampled violations)")
    ok = not bad
    detail = ("declared majorants dominate 10^3 sampled second differences "
              "per objective" if ok
              else "MAJORANT_VIOLATION: majorant fails to dominate the "
                   "sampled modulus for " + ", ".join(bad))
    return CriterionResult("inv-majorant-domination", ok, detail)


def inv_hoelder_duality(ctx):
    """Pairings never exceed dual norm times primal norm; the map attains it."""
    rng = np.random.default_rng(23)
    worst = 0.0
    for p in (1.2, 1.5, 2.0, 3.0, 6.0):
        norm = NormTag(p)
        for _ in range(200):
            v = rng.standard_normal(8)
            w = rng.standard_normal(8)
            bound = dual_norm(v, norm) * lp_norm(w, norm)
            if bound > 0:
                worst = max(worst, float(np.dot(v, w)) / bound)
    ok = worst <= 1.0 + 1e-12
    return CriterionResult("inv-hoelder-duality", ok,
                           f"max pairing/bound ratio {worst:.15f}")


CRITERIA = [
    c01_gradient_method_equivalence,
    c02_adaptive_energy_inequality,
    c03_smoothness_gap_sweep,
    c04_score_gap_bound_sweep,
    c05_fixed_schedule_convergence,
    c06_power_schedule_rate,
    c07_adaptive_rate,
    c08_adaptive_sphere_rate,
    c09_exact_line_search_two_step,
    c10_line_search_logistic_convergence,
    c11_oracle_equivalences,
    c12_trace_determinism,
    inv_objective_contracts,
    inv_majorant_domination,
    inv_hoelder_duality,
]


def criterion_names():
    return [_name_of(fn) for fn in CRITERIA]


def _name_of(fn):
    mapping = {
        "c01_gradient_method_equivalence": "01-gradient-method-equivalence",
        "c02_adaptive_energy_inequality": "02-adaptive-energy-inequality",
        "c03_smoothness_gap_sweep": "03-smoothness-gap-sweep",
        "c04_score_gap_bound_sweep": "04-score-gap-bound-sweep",
        "c05_fixed_schedule_convergence": "05-fixed-schedule-convergence",
        "c06_power_schedule_rate": "06-power-schedule-rate",
        "c07_adaptive_rate": "07-adaptive-rate",
        "c08_adaptive_sphere_rate": "08-adaptive-sphere-rate",
        "c09_exact_line_search_two_step": "09-exact-line-search-two-step",
        "c10_line_search_logistic_convergence":
            "10-line-search-logistic-convergence",
        "c11_oracle_equivalences": "11-oracle-equivalences",
        "c12_trace_determinism": "12-trace-determinism",
        "inv_objective_contracts": "inv-objective-contracts",
        "inv_majorant_domination": "inv-majorant-domination",
        "inv_hoelder_duality": "inv-hoelder-duality",
    }
    return mapping[fn.__name__]


def run_all(ctx=None):
    """Execute every criterion, catching per-criterion failures."""
    ctx = ctx or VerifyContext()
    results = []
    for fn in CRITERIA:
        started = time.perf_counter()
        try:
            result = fn(ctx)
        except Exception as exc:  # a crash is a failed criterion, not a crash of verify
            result = CriterionResult(_name_of(fn), False,
                                     f"{type(exc).__name__}: {exc}")
        if not result.elapsed:
            result.elapsed = time.perf_counter() - started
        results.append(result)
    return results
