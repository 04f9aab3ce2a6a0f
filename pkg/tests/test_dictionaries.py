"""Dictionary construction and the three selection primitives."""

import numpy as np
import pytest

from greedy_opt import (
    ARGMAX,
    FIRST_ABOVE,
    FiniteDictionary,
    NormTag,
    SphereDictionary,
    argmin_atom_by_objective,
    dual_norm,
    greedy_score,
    lp_norm,
    quadratic_objective,
    select_atom,
)


def naive_best_pairing(dictionary, v):
    """Transparent signed double loop with the same tie-breaking contract."""
    best, best_j, best_sign = -1.0, -1, 1
    for j in range(dictionary.size):
        pair = float(np.dot(dictionary.column(j), v))
        for sign in (1, -1):
            if sign * pair > best:
                best, best_j, best_sign = sign * pair, j, sign
    return best, best_j, best_sign


class TestConstruction:
    def test_atoms_are_normalized(self):
        rng = np.random.default_rng(0)
        for p in (1.5, 2.0, 3.0):
            d = FiniteDictionary(rng.standard_normal((6, 10)) * 7.0,
                                 norm=NormTag(p))
            for j in range(d.size):
                np.testing.assert_allclose(lp_norm(d.column(j), d.norm), 1.0,
                                           rtol=1e-12)

    def test_zero_atom_rejected(self):
        atoms = np.array([[1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(ValueError):
            FiniteDictionary(atoms)

    def test_coordinate_and_gaussian(self):
        d = FiniteDictionary.coordinate(3)
        assert d.kind == "coordinate" and d.size == 3
        np.testing.assert_array_equal(d.column(1), [0.0, 1.0, 0.0])
        g1 = FiniteDictionary.gaussian(4, 9, seed=5)
        g2 = FiniteDictionary.gaussian(4, 9, seed=5)
        np.testing.assert_array_equal(g1._atoms, g2._atoms)

    def test_csv_loading_with_and_without_header(self, tmp_path):
        atoms = np.array([[3.0, 0.0], [4.0, 2.0]])
        bare = tmp_path / "atoms.csv"
        bare.write_text("3.0,0.0\n4.0,2.0\n")
        headed = tmp_path / "atoms_h.csv"
        headed.write_text("a1,a2\n3.0,0.0\n4.0,2.0\n")
        d1 = FiniteDictionary.from_csv(bare)
        d2 = FiniteDictionary.from_csv(headed)
        np.testing.assert_array_equal(d1._atoms, d2._atoms)
        np.testing.assert_allclose(d1.column(0), [0.6, 0.8], rtol=1e-15)


class TestGreedyScore:
    def test_worked_example(self):
        value, atom = greedy_score(np.array([1.0, 2.0]),
                                   FiniteDictionary.coordinate(2))
        assert value == 2.0
        assert (atom.index, atom.sign) == (1, 1)

    def test_zero_gradient_sentinel(self):
        for d in (FiniteDictionary.coordinate(2), SphereDictionary()):
            value, atom = greedy_score(np.zeros(2), d)
            assert value == 0.0 and atom is None

    def test_orthogonal_gradient_sentinel(self):
        d = FiniteDictionary(np.array([[1.0], [0.0]]))
        value, atom = greedy_score(np.array([0.0, 3.0]), d)
        assert value == 0.0 and atom is None

    def test_negative_side_selected(self):
        value, atom = greedy_score(np.array([-5.0, 2.0]),
                                   FiniteDictionary.coordinate(2))
        assert value == 5.0
        assert (atom.index, atom.sign) == (0, -1)

    def test_tie_breaks_to_lowest_index(self):
        value, atom = greedy_score(np.array([2.0, -2.0]),
                                   FiniteDictionary.coordinate(2))
        assert value == 2.0
        assert (atom.index, atom.sign) == (0, 1)

    def test_exact_agreement_with_naive_double_loop(self):
        """Full-scan selection must match a transparent loop bit for bit."""
        rng = np.random.default_rng(1)
        d = FiniteDictionary.gaussian(16, 1000, seed=2)
        for _ in range(100):
            v = rng.standard_normal(16)
            value, atom = greedy_score(v, d)
            best, best_j, best_sign = naive_best_pairing(d, v)
            assert value == best
            assert (atom.index, atom.sign) == (best_j, best_sign)

    def test_symmetry_under_negation(self):
        rng = np.random.default_rng(3)
        d = FiniteDictionary.gaussian(8, 50, seed=4)
        for _ in range(50):
            v = rng.standard_normal(8)
            assert greedy_score(v, d)[0] == greedy_score(-v, d)[0]

    def test_sphere_euclidean(self):
        value, atom = greedy_score(np.array([1.0, 2.0]), SphereDictionary())
        np.testing.assert_allclose(value, np.sqrt(5.0), rtol=1e-15)
        np.testing.assert_allclose(atom.vec, np.array([1.0, 2.0]) / np.sqrt(5.0),
                                   rtol=1e-15)

    def test_sphere_hoelder_equality_general_p(self):
        """The duality-map atom attains the dual norm and has unit norm."""
        rng = np.random.default_rng(5)
        for p in (1.3, 1.5, 2.0, 3.0, 5.0):
            sphere = SphereDictionary(NormTag(p))
            for _ in range(50):
                v = rng.standard_normal(6)
                value, atom = greedy_score(v, sphere)
                np.testing.assert_allclose(float(np.dot(v, atom.vec)),
                                           dual_norm(v, sphere.norm),
                                           rtol=1e-12)
                np.testing.assert_allclose(lp_norm(atom.vec, sphere.norm), 1.0,
                                           rtol=1e-12)


class TestSelectAtom:
    def test_argmax_matches_score(self):
        d = FiniteDictionary.coordinate(2)
        atom, pair = select_atom(np.array([1.0, 2.0]), d, t=1.0, mode=ARGMAX)
        assert (atom.index, atom.sign, pair) == (1, 1, 2.0)

    def test_first_above_worked_example(self):
        # threshold 0.5 * 2.0 = 1.0; +e1 pairs at exactly 1.0 and comes first
        d = FiniteDictionary.coordinate(2)
        atom, pair = select_atom(np.array([1.0, 2.0]), d, t=0.5,
                                 mode=FIRST_ABOVE)
        assert (atom.index, atom.sign, pair) == (0, 1, 1.0)

    def test_first_above_at_t_one_equals_argmax(self):
        rng = np.random.default_rng(6)
        d = FiniteDictionary.gaussian(5, 40, seed=7)
        for _ in range(50):
            v = rng.standard_normal(5)
            a1, _ = select_atom(v, d, t=1.0, mode=ARGMAX)
            a2, _ = select_atom(v, d, t=1.0, mode=FIRST_ABOVE)
            assert (a1.index, a1.sign) == (a2.index, a2.sign)

    def test_first_above_meets_threshold(self):
        rng = np.random.default_rng(8)
        d = FiniteDictionary.gaussian(6, 30, seed=9)
        for t in (0.2, 0.5, 0.9):
            for _ in range(30):
                v = rng.standard_normal(6)
                value, _ = greedy_score(v, d)
                _, pair = select_atom(v, d, t=t, mode=FIRST_ABOVE)
                assert pair >= t * value

    def test_t_range_enforced(self):
        d = FiniteDictionary.coordinate(2)
        for t in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                select_atom(np.array([1.0, 0.0]), d, t=t)

    def test_zero_score_rejected(self):
        with pytest.raises(ValueError):
            select_atom(np.zeros(2), FiniteDictionary.coordinate(2))


class TestArgminAtom:
    def test_worked_example(self):
        # values over (+-e1, +-e2) are {2, 4, 1, 5}; +e2 wins with 1.0
        E = quadratic_objective([1.0, 2.0])
        atom, value = argmin_atom_by_objective(E, np.zeros(2), 1.0,
                                               FiniteDictionary.coordinate(2))
        assert (atom.index, atom.sign) == (1, 1)
        np.testing.assert_allclose(value, 1.0, rtol=1e-15)

    def test_zero_step_degenerate_tie(self):
        E = quadratic_objective([1.0, 2.0])
        atom, value = argmin_atom_by_objective(E, np.zeros(2), 0.0,
                                               FiniteDictionary.coordinate(2))
        assert (atom.index, atom.sign) == (0, 1)
        assert value == E(np.zeros(2))

    def test_linear_objective_matches_greedy_score(self):
        from greedy_opt.core import Majorant
        from greedy_opt.objectives import Objective
        rng = np.random.default_rng(10)
        d = FiniteDictionary.gaussian(4, 15, seed=11)
        for _ in range(25):
            a = rng.standard_normal(4)
            E = Objective(4, lambda x, a=a: float(np.dot(a, x)),
                          lambda x, a=a: a, Majorant.power(1.0, 2.0),
                          region_radius=10.0)
            atom_min, _ = argmin_atom_by_objective(E, np.zeros(4), 1.0, d)
            _, atom_score = greedy_score(-a, d)
            assert (atom_min.index, atom_min.sign) == (atom_score.index,
                                                       atom_score.sign)

    def test_agrees_with_independent_scan(self):
        rng = np.random.default_rng(12)
        d = FiniteDictionary.gaussian(5, 20, seed=13)
        E = quadratic_objective(rng.standard_normal(5))
        G = rng.standard_normal(5) * 0.3
        atom, value = argmin_atom_by_objective(E, G, 0.7, d)
        candidates = [(E(G + 0.7 * sign * d.column(j)), j, sign)
                      for j in range(d.size) for sign in (1, -1)]
        best = min(candidates, key=lambda c: c[0])
        assert value == best[0] and (atom.index, atom.sign) == (best[1], best[2])

    def test_rerun_is_identical(self):
        d = FiniteDictionary.gaussian(4, 12, seed=14)
        E = quadratic_objective(np.ones(4))
        first = argmin_atom_by_objective(E, np.zeros(4), 0.5, d)
        second = argmin_atom_by_objective(E, np.zeros(4), 0.5, d)
        assert first == second

    def test_sphere_unsupported(self):
        E = quadratic_objective([1.0, 2.0])
        with pytest.raises(TypeError):
            argmin_atom_by_objective(E, np.zeros(2), 1.0, SphereDictionary())
