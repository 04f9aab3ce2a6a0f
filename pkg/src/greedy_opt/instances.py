"""Canned deterministic problem instances shared by the verification suite and tests."""

from __future__ import annotations

import numpy as np

from .objectives import logistic_objective, p_power_objective, quadratic_objective

__all__ = [
    "quadratic_2d",
    "quadratic_2d_unit_l1",
    "quadratic_nd",
    "quadratic_geometric",
    "logistic_20x5",
    "p_power_instance",
]


def quadratic_2d(scale=1.0):
    """The worked 2-D example: target (1, 2)."""
    return quadratic_objective([1.0, 2.0], scale=scale)


def quadratic_2d_unit_l1():
    """2-D quadratic whose minimizer has unit l1 norm (target (1, 2)/3)."""
    return quadratic_objective([1.0 / 3.0, 2.0 / 3.0])


def quadratic_nd(n=10, seed=3):
    """Generic n-dimensional quadratic with a seeded Gaussian target."""
    rng = np.random.default_rng(seed)
    return quadratic_objective(rng.standard_normal(n))


def quadratic_geometric(n=64, ratio=0.9):
    """n-dimensional quadratic, geometrically decaying target with ||target||_1 = 1.

    The spread of coordinate scales keeps the greedy run busy at every stage,
    which makes it a good rate-measurement instance.
    """
    t = ratio ** np.arange(n)
    return quadratic_objective(t / np.sum(t))


def logistic_20x5(seed=7):
    """20 x 5 logistic instance, non-separable by construction.

    Fifteen rows get labels from a noisy linear model; the first five rows are
    then repeated with flipped labels.  Any weight vector misclassifies one row
    of each repeated pair, so the loss is coercive and the infimum is attained.
    """
    rng = np.random.default_rng(seed)
    base = rng.standard_normal((15, 5))
    w = rng.standard_normal(5)
    margins = base @ w + 0.4 * rng.standard_normal(15)
    labels = np.where(margins >= 0, 1.0, -1.0)
    design = np.vstack([base, base[:5]])
    labels = np.concatenate([labels, -labels[:5]])
    return logistic_objective(design, labels, region_radius=10.0)


def p_power_instance(p=1.5, rows=10, cols=4, seed=9):
    """Random full-rank p-power regression instance (smoothness exponent q = p)."""
    rng = np.random.default_rng(seed)
    design = rng.standard_normal((rows, cols))
    response = rng.standard_normal(rows)
    return p_power_objective(design, response, p)
