import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signet.errors import AllWeightsZero, DidNotConverge, SignetError
from signet.estimators import EdgeSet, estimate_glasso, estimate_thr, sample_covariance
from signet.metrics import hamming
from signet.tuning import (
    CvConfig,
    ScalePath,
    bic_glasso_path,
    bic_select_glasso,
    cv_calibrated_edges,
    cv_select_scale,
    fold_assignments,
    lambda_max,
    lambda_max_matrix,
    match_edge_count_threshold,
    oracle_threshold,
    oracle_tune,
)


class TestScalePath:
    def test_geometric_endpoints_exact(self):
        path = ScalePath.geometric(3.0, size=25, floor_ratio=0.01)
        assert path.values[0] == 3.0
        assert path.values[-1] == 3.0 * 0.01
        assert path.size == 25
        assert np.all(np.diff(path.values) < 0)

    def test_geometric_ratios_constant(self):
        v = ScalePath.geometric(1.0, size=10, floor_ratio=0.1).values
        ratios = v[1:] / v[:-1]
        assert np.allclose(ratios, ratios[0])

    def test_single_point(self):
        path = ScalePath.geometric(2.0, size=1)
        assert path.values.tolist() == [2.0]

    def test_rejects_bad_shapes_and_values(self):
        with pytest.raises(SignetError):
            ScalePath(values=np.array([1.0, 2.0]), origin=1.0)
        with pytest.raises(SignetError):
            ScalePath(values=np.array([2.0, 1.0]), origin=1.0)
        with pytest.raises(SignetError):
            ScalePath(values=np.array([1.0, -0.5]), origin=1.0)
        with pytest.raises(SignetError):
            ScalePath.geometric(0.0)
        with pytest.raises(SignetError):
            ScalePath.geometric(1.0, size=0)
        with pytest.raises(SignetError):
            ScalePath.geometric(1.0, floor_ratio=1.5)

    @settings(max_examples=40)
    @given(
        st.floats(1e-6, 1e6),
        st.integers(2, 60),
        st.floats(1e-6, 0.99),
    )
    def test_geometric_always_valid(self, origin, size, ratio):
        path = ScalePath.geometric(origin, size=size, floor_ratio=ratio)
        assert path.values[0] == origin
        assert path.values[-1] == pytest.approx(origin * ratio, rel=1e-12)


class TestCvConfig:
    def test_validation(self):
        with pytest.raises(SignetError):
            CvConfig(seed=0, folds=1)
        with pytest.raises(SignetError):
            CvConfig(seed=0, grid_size=0)
        with pytest.raises(SignetError):
            CvConfig(seed=0, grid_floor_ratio=1.0)


class TestFolds:
    def test_balanced_and_deterministic(self):
        a = fold_assignments(23, 5, seed=9)
        b = fold_assignments(23, 5, seed=9)
        assert np.array_equal(a, b)
        counts = np.bincount(a, minlength=5)
        assert counts.max() - counts.min() <= 1
        assert counts.sum() == 23

    def test_seed_changes_assignment(self):
        assert not np.array_equal(
            fold_assignments(40, 4, seed=0), fold_assignments(40, 4, seed=1)
        )

    def test_leave_one_out(self):
        a = fold_assignments(7, 7, seed=1)
        assert sorted(a.tolist()) == list(range(7))

    def test_bounds(self):
        with pytest.raises(SignetError):
            fold_assignments(5, 1, seed=0)
        with pytest.raises(SignetError):
            fold_assignments(5, 6, seed=0)


class TestLambdaMax:
    def test_hand_example(self):
        x = np.array([[1.0, 2.0], [-1.0, -2.0]])  # already centered
        assert lambda_max(x, 0, np.array([0.0, 2.0])) == pytest.approx(2.0)
        assert lambda_max(x, 0, np.array([0.0, 1.0])) == pytest.approx(4.0)

    def test_beta_zero_exactly_at_anchor(self, rng):
        from signet.penalty import uniform_penalty_field
        from signet.estimators import fit_neighborhoods

        x = rng.standard_normal((30, 4))
        lm = lambda_max_matrix(x, np.ones((4, 4)) - np.eye(4))
        at = fit_neighborhoods(x, uniform_penalty_field(4, lm * 1.0001))
        below = fit_neighborhoods(x, uniform_penalty_field(4, lm * 0.95))
        assert all(np.all(f.coefficients == 0.0) for f in at)
        assert any(np.any(f.coefficients != 0.0) for f in below)

    def test_scaling_homogeneity(self, rng):
        x = rng.standard_normal((25, 5))
        w = rng.uniform(0.5, 2.0, 5)
        w[2] = 0.0
        base = lambda_max(x, 2, w)
        assert lambda_max(x, 2, 3.0 * w) == pytest.approx(base / 3.0)

    def test_matrix_matches_per_node(self, rng):
        x = rng.standard_normal((30, 5))
        shape = rng.uniform(0.5, 2.0, (5, 5))
        out = lambda_max_matrix(x, shape)
        for j in range(5):
            assert out[j] == pytest.approx(lambda_max(x, j, shape[j]))

    def test_all_zero_weights_rejected(self, rng):
        x = rng.standard_normal((20, 3))
        with pytest.raises(AllWeightsZero):
            lambda_max(x, 0, np.zeros(3))


class TestCvSelection:
    def test_noise_node_gets_large_scale(self):
        hits = 0
        for rep in range(15):
            rng = np.random.default_rng(1000 + rep)
            x = rng.standard_normal((200, 10))
            w = np.ones(10)
            w[0] = 0.0
            scale, curve = cv_select_scale(
                x, 0, w, CvConfig(seed=rep, folds=10, grid_size=50)
            )
            lm = lambda_max(x, 0, w)
            grid = ScalePath.geometric(lm, size=50).values
            if int(np.argmin(np.abs(grid - scale))) < 25:
                hits += 1
        assert hits >= 12

    def test_dependent_node_gets_small_scale(self):
        hits = 0
        for rep in range(15):
            rng = np.random.default_rng(2000 + rep)
            x = rng.standard_normal((200, 10))
            x[:, 0] = x[:, 1] + x[:, 2] + 0.1 * rng.standard_normal(200)
            w = np.ones(10)
            w[0] = 0.0
            scale, _ = cv_select_scale(
                x, 0, w, CvConfig(seed=rep, folds=10, grid_size=50)
            )
            lm = lambda_max(x, 0, w)
            grid = ScalePath.geometric(lm, size=50).values
            if int(np.argmin(np.abs(grid - scale))) >= 40:
                hits += 1
        assert hits >= 12

    def test_curve_shape_and_determinism(self, rng):
        x = rng.standard_normal((60, 6))
        w = np.ones(6)
        w[1] = 0.0
        cfg = CvConfig(seed=4, folds=5, grid_size=20)
        s1, c1 = cv_select_scale(x, 1, w, cfg)
        s2, c2 = cv_select_scale(x, 1, w, cfg)
        assert s1 == s2
        assert c1.shape == (20,)
        assert np.array_equal(c1, c2)

    def test_calibrated_edges_recovers_strong_pair(self):
        rng = np.random.default_rng(11)
        n, p = 300, 6
        x = rng.standard_normal((n, p))
        x[:, 1] = x[:, 0] + 0.2 * rng.standard_normal(n)
        shape = np.ones((p, p)) - np.eye(p)
        edges, scales, curves = cv_calibrated_edges(
            x, shape, CvConfig(seed=0, folds=5, grid_size=40)
        )
        assert curves.shape == (40, p)
        assert scales.shape == (p,)
        assert (0, 1) in edges.edges

    def test_needs_enough_rows(self, rng):
        x = rng.standard_normal((4, 3))
        with pytest.raises(SignetError):
            cv_select_scale(x, 0, np.array([0.0, 1.0, 1.0]), CvConfig(seed=0, folds=10))


class TestBicGlasso:
    def make_grid(self, x):
        s = sample_covariance(x)
        anchor = float(np.max(np.abs(s - np.diag(np.diag(s))))) * 1.001
        return ScalePath.geometric(anchor, size=30)

    def test_independent_data_stays_sparse(self):
        for rep in range(3):
            rng = np.random.default_rng(500 + rep)
            x = rng.standard_normal((500, 10))
            lam, curve = bic_select_glasso(x, self.make_grid(x))
            edges, _ = estimate_glasso(x, lam)
            assert edges.n_edges <= 2
            assert np.all(np.isfinite(curve) | np.isinf(curve))

    def test_curve_matches_formula_at_one_point(self, rng):
        x = rng.standard_normal((120, 5))
        grid = self.make_grid(x)
        best, curve, path = bic_glasso_path(x, grid)
        t = grid.size // 2
        edges, theta = path[t]
        s = sample_covariance(x)
        sign, logdet = np.linalg.slogdet(theta)
        want = 120 * (float(np.sum(s * theta)) - logdet) + np.log(120) * edges.n_edges
        assert curve[t] == pytest.approx(want, rel=1e-8)
        assert curve[best] == curve.min()


class TestThresholdMatching:
    def test_conventions(self, rng):
        x = rng.standard_normal((40, 5))
        assert match_edge_count_threshold(x, 0) == 1.0
        assert match_edge_count_threshold(x, -3) == 1.0
        assert match_edge_count_threshold(x, 10) == 0.0
        assert match_edge_count_threshold(x, 99) == 0.0

    def test_exact_count_with_distinct_magnitudes(self, rng):
        x = rng.standard_normal((60, 7))
        for target in (1, 3, 10, 20):
            tau = match_edge_count_threshold(x, target)
            assert estimate_thr(x, tau).n_edges == target


def prefix_method(truth):
    """Toy method: param above 0.5 returns the truth, below returns empty."""

    def run(data, value):
        if value >= 0.5:
            return truth
        return EdgeSet.from_pairs(truth.dim, [])

    return run


class TestOracles:
    def test_tie_resolves_to_largest(self):
        truth = EdgeSet.from_pairs(4, [(0, 1), (2, 3)])
        grid = ScalePath.geometric(1.0, size=10, floor_ratio=0.1)
        x = np.zeros((5, 4))
        param, h = oracle_tune(prefix_method(truth), x, truth, grid)
        assert h == 0
        assert param == 1.0

    def test_failing_points_skipped(self):
        truth = EdgeSet.from_pairs(3, [(0, 1)])

        def flaky(data, value):
            if value > 0.3:
                raise SignetError("no fit here")
            return truth

        grid = ScalePath.geometric(1.0, size=8, floor_ratio=0.05)
        param, h = oracle_tune(flaky, np.zeros((4, 3)), truth, grid)
        assert h == 0
        assert param <= 0.3

    def test_all_failures_raise(self):
        truth = EdgeSet.from_pairs(3, [(0, 1)])

        def broken(data, value):
            raise SignetError("always")

        grid = ScalePath.geometric(1.0, size=5)
        with pytest.raises(DidNotConverge):
            oracle_tune(broken, np.zeros((4, 3)), truth, grid)

    def test_threshold_oracle_beats_grid(self, rng):
        from signet.simulate import make_pa_condnum_instance

        inst = make_pa_condnum_instance(8, 200, seed=3)
        tau, h = oracle_threshold(inst.data, inst.truth)
        got = estimate_thr(inst.data, tau)
        assert hamming(got, inst.truth) == h
        # No candidate threshold does better.
        best = min(
            hamming(estimate_thr(inst.data, t), inst.truth)
            for t in np.linspace(0.0, 1.0, 2001)
        )
        assert h <= best
