"""lp-norm machinery and empirical smoothness checks for smooth convex objectives.

Everything operates on dense 1-D float64 arrays over R^n.  Norm exponents are
restricted to p in (1, inf) so that the duality map stays single-valued; l1 and
l-infinity are rejected on purpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "NumericFailure",
    "NormTag",
    "EUCLIDEAN",
    "as_vector",
    "lp_norm",
    "dual_norm",
    "pairing",
    "Majorant",
    "sample_ball",
    "unit_direction",
    "empirical_modulus",
    "smoothness_gap_check",
    "finite_difference_gradient_check",
    "SmoothnessWitness",
    "majorant_domination_witness",
]


class NumericFailure(RuntimeError):
    """An objective (or gradient) evaluation stopped being finite."""


def as_vector(x, dim=None):
    """Coerce to a finite 1-D float array, validating the dimension if given."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


@dataclass(frozen=True)
class NormTag:
    """lp norm exponent, p in (1, inf).  p = 2 is the Euclidean fast path."""

    p: float = 2.0

    def __post_init__(self):
        p = float(self.p)
        if not (1.0 < p < math.inf) or math.isnan(p):
            raise ValueError("norm exponent must lie in (1, inf)")
        object.__setattr__(self, "p", p)

    @property
    def dual_p(self):
        """Conjugate exponent p' = p / (p - 1)."""
        return self.p / (self.p - 1.0)

    @property
    def is_euclidean(self):
        return self.p == 2.0


EUCLIDEAN = NormTag(2.0)


def lp_norm(v, norm=EUCLIDEAN):
    v = np.asarray(v, dtype=float)
    if norm.is_euclidean:
        return math.sqrt(float(np.dot(v, v)))
    return float(np.sum(np.abs(v) ** norm.p) ** (1.0 / norm.p))


def dual_norm(v, norm=EUCLIDEAN):
    """Norm of a gradient-side vector: the l_{p'} norm with p' = p/(p-1)."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("dual_norm rejects non-finite input")
    if norm.is_euclidean:
        return math.sqrt(float(np.dot(v, v)))
    return lp_norm(v, NormTag(norm.dual_p))


def pairing(f, x):
    """Euclidean pairing <f, x> between a gradient and a direction.

    Gradients live in the dual identified with R^n, so the pairing is the plain
    dot product regardless of which lp norm tags the ambient space.
    """
    return float(np.dot(f, x))


@dataclass(frozen=True)
class Majorant:
    """Continuous upper bound mu(u) on the smoothness modulus, mu(u)/u nondecreasing.

    Power majorants mu(u) = gamma * u**q with q in (1, 2] admit a closed-form
    step-size solve; arbitrary monotone tables go through bisection instead.
    ``domain_bound`` is the largest u for which mu is trusted.
    """

    gamma: float | None = None
    q: float | None = None
    table: Callable[[float], float] | None = field(default=None, compare=False)
    domain_bound: float = math.inf

    def __post_init__(self):
        power = self.gamma is not None or self.q is not None
        if power and self.table is not None:
            raise ValueError("majorant is either a power law or a table, not both")
        if power:
            if self.gamma is None or self.q is None:
                raise ValueError("power majorant needs both gamma and q")
            if self.gamma <= 0:
                raise ValueError("gamma must be positive")
            if not (1.0 < self.q <= 2.0):
                raise ValueError("q must lie in (1, 2]")
        elif self.table is None:
            raise ValueError("majorant needs either (gamma, q) or a table")
        if not self.domain_bound > 0:
            raise ValueError("domain_bound must be positive")

    @classmethod
    def power(cls, gamma, q, domain_bound=math.inf):
        return cls(gamma=float(gamma), q=float(q), domain_bound=domain_bound)

    @classmethod
    def tabulated(cls, func, domain_bound):
        return cls(table=func, domain_bound=float(domain_bound))

    @property
    def is_power(self):
        return self.table is None

    def __call__(self, u):
        u = float(u)
        if u < 0:
            raise ValueError("majorant argument must be nonnegative")
        if u == 0.0:
            return 0.0
        if self.is_power:
            return self.gamma * u**self.q
        return float(self.table(u))

    def slope(self, u):
        """mu(u)/u, the quantity the step-size equation inverts."""
        u = float(u)
        if u <= 0:
            raise ValueError("slope needs u > 0")
        return self(u) / u

    def describe(self):
        if self.is_power:
            return {"kind": "power", "gamma": self.gamma, "q": self.q,
                    "domain_bound": self.domain_bound}
        return {"kind": "tabulated", "domain_bound": self.domain_bound}


def sample_ball(rng, dim, radius=1.0, norm=EUCLIDEAN):
    """Uniform draw from the lp ball of the given radius, rejection-free.

    Coordinates with density proportional to exp(-|t|^p) plus an independent
    exponential slack in the normalization give exactly the uniform law on the
    ball, for every p.
    """
    p = norm.p
    g = rng.gamma(1.0 / p, size=dim) ** (1.0 / p)
    g *= rng.choice([-1.0, 1.0], size=dim)
    w = rng.standard_exponential()
    denom = (np.sum(np.abs(g) ** p) + w) ** (1.0 / p)
    return radius * g / denom


def unit_direction(rng, dim, norm=EUCLIDEAN):
    """Random direction of unit lp norm (normalized standard normal)."""
    while True:
        z = rng.standard_normal(dim)
        nz = lp_norm(z, norm)
        if nz > 0.0:
            return z / nz


def empirical_modulus(E, radius, u, samples=200, seed=0, norm=EUCLIDEAN):
    """Sampled lower bound on the smoothness modulus of E at scale u.

    Maximizes half the symmetrized second difference
    |E(x + u y) + E(x - u y) - 2 E(x)| / 2 over ``samples`` random pairs with x
    uniform in the lp ball of the given radius and y of unit norm.
    Deterministic for a fixed seed.  Raises NumericFailure if any evaluation
    stops being finite.
    """
    u = float(u)
    if u < 0:
        raise ValueError("u must be nonnegative")
    if samples < 1:
        raise ValueError("need at least one sample")
    if u == 0.0:
        return 0.0
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x = sample_ball(rng, E.dim, radius=radius, norm=norm)
        y = unit_direction(rng, E.dim, norm=norm)
        second = E(x + u * y) + E(x - u * y) - 2.0 * E(x)
        if not math.isfinite(second):
            raise NumericFailure("objective overflowed while sampling the modulus")
        worst = max(worst, 0.5 * abs(second))
    return worst


def smoothness_gap_check(E, x, y, u, majorant=None, tol=1e-9, norm=EUCLIDEAN):
    """Two-sided check of the convexity/smoothness sandwich along a ray.

    The increment E(x + u y) - E(x) - u <E'(x), y> must be nonnegative
    (convexity) and at most 2 mu(u ||y||) (smoothness), both within ``tol``.
    Returns True/False, or None when x lies outside the objective's declared
    region or u ||y|| exceeds the majorant domain, where the bound is not
    asserted.
    """
    majorant = majorant if majorant is not None else E.majorant
    x = as_vector(x, E.dim)
    y = as_vector(y, E.dim)
    ny = lp_norm(y, norm)
    if ny == 0.0:
        raise ValueError("direction must be nonzero")
    if lp_norm(x, norm) > E.region_radius:
        return None
    scaled = abs(float(u)) * ny
    if scaled > majorant.domain_bound:
        return None
    gap = E(x + u * y) - E(x) - u * pairing(E.gradient(x), y)
    return bool(-tol <= gap <= 2.0 * majorant(scaled) + tol)


def finite_difference_gradient_check(E, x, h=1e-5, tol=1e-6):
    """Coordinate-wise central-difference validation of the analytic gradient."""
    x = as_vector(x, E.dim)
    g = E.gradient(x)
    step = np.zeros_like(x)
    for i in range(x.size):
        step[i] = h
        approx = (E(x + step) - E(x - step)) / (2.0 * h)
        step[i] = 0.0
        if abs(approx - g[i]) > tol:
            return False
    return True


@dataclass
class SmoothnessWitness:
    """Record of an empirical majorant-domination sweep."""

    sampled_u: list
    sampled_rho: list
    violations: list  # (x, y, u) triples where the majorant failed

    @property
    def ok(self):
        return not self.violations


def majorant_domination_witness(E, u_grid=None, samples=200, seed=0, tol=1e-9,
                                norm=EUCLIDEAN):
    """Sweep scales u and record any sampled point whose second difference
    exceeds the declared majorant.

    The sweep is evidence, not proof: an empty violation list certifies the
    majorant only at the sampled points.
    """
    majorant = E.majorant
    if u_grid is None:
        top = min(2.0, majorant.domain_bound)
        u_grid = np.geomspace(1e-3, top, 8)
    rng = np.random.default_rng(seed)
    sampled_u, sampled_rho, violations = [], [], []
    for u in u_grid:
        u = float(u)
        bound = majorant(u)
        worst = 0.0
        for _ in range(samples):
            x = sample_ball(rng, E.dim, radius=E.region_radius, norm=norm)
            y = unit_direction(rng, E.dim, norm=norm)
            rho_hat = 0.5 * abs(E(x + u * y) + E(x - u * y) - 2.0 * E(x))
            worst = max(worst, rho_hat)
            if rho_hat > bound + tol:
                violations.append((x, y, u))
        sampled_u.append(u)
        sampled_rho.append(worst)
    return SmoothnessWitness(sampled_u, sampled_rho, violations)
