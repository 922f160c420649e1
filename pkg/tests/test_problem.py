import json

import numpy as np
import pytest

from akkt.analytic import NonIntegrableError, PiecewiseAnalytic, exact_inner, exact_norm
from akkt.families import (SpecError, build, example35_data, load_problem, problem_hash,
                           qp_2d_spec, serialize)
from akkt.problem import Problem, discretize_interval, fd_check
from akkt.sets import WeightedSpace, WholeSpace, Zero

FAMILY_SPECS = [
    qp_2d_spec(),
    {"name": "qp-nonneg", "family": "qp-box",
     "params": {"H": [[2.0, 0.5], [0.5, 1.0]], "c": [1.0, -1.0], "A": [[1.0, -1.0]],
                "b": [0.2], "cone": "nonneg"}},
    {"name": "aff", "family": "affine-equality",
     "params": {"A": [[1.0, 2.0, 0.0], [0.0, 1.0, -1.0]], "b": [1.0, 0.0]}},
    {"name": "sphere", "family": "nonlinear-equality", "params": {"n": 4}},
    {"name": "control", "family": "l2-box-control", "params": {"n": 128, "grading": 2.0}},
    {"name": "ex35", "family": "example35", "params": {"n": 256}},
]


def _linear_problem(a):
    n = a.size
    return Problem.from_dense("lin", WeightedSpace.euclidean(n), WeightedSpace.euclidean(0),
                              lambda x: float(a @ x), lambda x: a.copy(), lambda x: np.zeros(0),
                              lambda x: np.zeros((0, n)), WholeSpace(n), Zero(0))


class TestFdCheck:
    def test_linear_objective_exact(self, rng):
        # no truncation error, so a large step keeps roundoff below 1e-12
        a = rng.standard_normal(5)
        assert fd_check(_linear_problem(a), rng.standard_normal(5), h=0.1).max_error <= 1e-12

    def test_quadratic_objective(self, rng):
        p = Problem.from_dense("q", WeightedSpace.euclidean(4), WeightedSpace.euclidean(0),
                               lambda x: 0.5 * float(x @ x), lambda x: x.copy(),
                               lambda x: np.zeros(0), lambda x: np.zeros((0, 4)),
                               WholeSpace(4), Zero(0))
        assert fd_check(p, rng.standard_normal(4)).max_error <= 1e-10

    def test_wrong_gradient_detected(self, rng):
        p = Problem.from_dense("bad", WeightedSpace.euclidean(3), WeightedSpace.euclidean(0),
                               lambda x: 0.5 * float(x @ x), lambda x: 2 * x,
                               lambda x: np.zeros(0), lambda x: np.zeros((0, 3)),
                               WholeSpace(3), Zero(0))
        assert fd_check(p, np.ones(3)).max_error > 0.1

    @pytest.mark.parametrize("spec", FAMILY_SPECS, ids=lambda s: s["name"])
    def test_every_family_at_random_points(self, spec, rng):
        p = build(spec)
        for _ in range(10):
            x = p.set_c.project(rng.standard_normal(p.n), p.space_x)
            assert fd_check(p, x, rng=rng).max_error <= 1e-5


class TestDiscretization:
    def test_uniform(self):
        np.testing.assert_allclose(discretize_interval(4, 1.0).weights, [0.25] * 4)

    def test_graded_hand_values(self):
        g = discretize_interval(2, 2.0)
        np.testing.assert_allclose(g.edges, [0, 0.25, 1])
        np.testing.assert_allclose(g.weights, [0.25, 0.75])

    @pytest.mark.parametrize("n,grading", [(7, 1.0), (100, 1.0), (64, 4.0)])
    def test_partition(self, n, grading):
        g = discretize_interval(n, grading)
        assert g.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(g.nodes) > 0) and np.all(g.weights > 0)

    @pytest.mark.parametrize("n,grading", [(1, 1.0), (4, 0.5)])
    def test_invalid(self, n, grading):
        with pytest.raises(ValueError):
            discretize_interval(n, grading)

    def test_sampled_inner_product_converges(self):
        f1 = PiecewiseAnalytic.from_pieces([(0.0, 0.5, [(1.0, 2.0)]), (0.5, 1.0, [(0.5, 1.0)])])
        f2 = PiecewiseAnalytic.power(3.0, 1.0)
        exact = exact_inner(f1, f2)
        errs = []
        for n in (64, 128, 256, 512):
            g = discretize_interval(n)
            errs.append(abs(np.dot(g.weights, f1(g.nodes) * f2(g.nodes)) - exact) / abs(exact))
        # midpoint rule: error drops by at least half per refinement
        for e0, e1 in zip(errs, errs[1:]):
            assert e1 <= 0.5 * e0


class TestAnalytic:
    def test_constant(self):
        one = PiecewiseAnalytic.constant(1.0)
        assert exact_inner(one, one) == 1.0

    def test_power_quarter(self):
        q = PiecewiseAnalytic.power(1.0, -0.25)
        assert exact_inner(q, q) == pytest.approx(2.0, abs=1e-15)

    @pytest.mark.parametrize("k", [1, 2, 3, 5, 16])
    def test_indicator_norm(self, k):
        lam = PiecewiseAnalytic.constant(0.75 * k**3, 0.0, float(k) ** -4)
        assert exact_norm(lam) == pytest.approx(0.75 * k, abs=1e-12)

    def test_not_integrable(self):
        f = PiecewiseAnalytic.power(1.0, -0.5)
        with pytest.raises(NonIntegrableError):
            exact_inner(f, f)

    def test_algebra(self):
        a = PiecewiseAnalytic.power(2.0, 1.0, 0.0, 0.5)
        b = PiecewiseAnalytic.constant(1.0)
        t = np.array([0.1, 0.4, 0.7])
        np.testing.assert_allclose((a - b)(t), a(t) - b(t))
        assert (a + b).integral() == pytest.approx(a.integral() + b.integral())

    def test_cell_averages(self):
        q = PiecewiseAnalytic.power(1.0, -0.25)
        g = discretize_interval(8, 4.0)
        assert np.dot(g.weights, q.cell_averages(g.edges)) == pytest.approx(4.0 / 3.0)

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            PiecewiseAnalytic.from_pieces([(0.0, 0.6, [(1.0, 0.0)]), (0.5, 1.0, [(1.0, 0.0)])])


class TestFamilies:
    def test_qp2d_structure(self, qp2d):
        assert (qp2d.n, qp2d.m) == (2, 1)
        x = np.array([0.5, 0.5])
        assert qp2d.feasibility(x) == 0.0
        np.testing.assert_allclose(qp2d.jacobian(x), [[1.0, 1.0]])

    def test_affine_adjoint_range(self):
        p = build(FAMILY_SPECS[2])
        lam = np.array([1.0, -2.0])
        np.testing.assert_allclose(p.vjp(np.zeros(3), lam), np.array(
            FAMILY_SPECS[2]["params"]["A"]).T @ lam)

    def test_example35_weights(self):
        p = build(FAMILY_SPECS[5])
        grid, q = example35_data(256)
        np.testing.assert_allclose(p.space_x.weights[1:], grid.weights)
        assert np.dot(grid.weights, q) == pytest.approx(4.0 / 3.0, rel=1e-12)

    @pytest.mark.parametrize("spec", FAMILY_SPECS, ids=lambda s: s["name"])
    def test_round_trip(self, spec):
        p = build(spec)
        again = build(serialize(p))
        assert serialize(again) == serialize(p)
        assert problem_hash(again) == problem_hash(p)

    def test_defaults_filled(self):
        s = serialize(build({"name": "c", "family": "l2-box-control"}))
        assert s["params"]["alpha"] == 1e-2 and s["seed"] == 42

    def test_load_from_path_and_string(self, tmp_path):
        path = tmp_path / "qp.json"
        path.write_text(json.dumps(qp_2d_spec()))
        assert load_problem(path).n == 2
        assert load_problem(json.dumps(qp_2d_spec())).m == 1

    @pytest.mark.parametrize("spec", [
        {"family": "qp-box"},
        {"name": "x", "family": "unknown"},
        {"name": "x", "family": "qp-box", "extra": 1},
        {"name": "x", "family": "qp-box", "solver": {"bogus": 1}},
        {"name": "x", "family": "qp-box", "params": {"H": [[1.0, 0.0]]}},
        {"name": "x", "family": "affine-equality", "params": {}},
    ])
    def test_malformed(self, spec):
        with pytest.raises(SpecError):
            build(spec)

    def test_bad_json(self):
        with pytest.raises(SpecError):
            load_problem("{not json")
