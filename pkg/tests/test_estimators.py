import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signet.errors import (
    DimensionMismatch,
    NotPositiveDefinite,
    RequiresMoreSamples,
    SignetError,
)
from signet.estimators import (
    EdgeSet,
    center_columns,
    combine,
    edges_from_support,
    estimate_glasso,
    estimate_mb,
    estimate_si,
    estimate_thr,
    fit_neighborhoods,
    glasso_path,
    neighborhood_path_supports,
    partial_correlations,
    partial_correlations_from_precision,
    sample_covariance,
)
from signet.penalty import (
    DistanceInfo,
    LinkFunction,
    uniform_penalty_field,
)
from signet.simulate import make_pa_condnum_instance
from signet.solver import WeightedLassoProblem, solve_weighted_lasso
from signet.tuning import lambda_max_matrix

CONSTANT_LINK = LinkFunction.table(np.array([0.0, 1e6]), np.array([1.0, 1.0]))


def random_coords(rng, p):
    return DistanceInfo.from_coordinates(rng.uniform(0.0, 60.0, (p, 3)))


class TestEdgeSet:
    def test_from_pairs_normalizes(self):
        e = EdgeSet.from_pairs(5, [(3, 1), (1, 3), (0, 4)])
        assert e.edges == frozenset({(1, 3), (0, 4)})
        assert e.n_edges == 2
        assert e.sorted_edges() == [(0, 4), (1, 3)]

    def test_rejects_self_loops_and_out_of_range(self):
        with pytest.raises(SignetError):
            EdgeSet.from_pairs(4, [(2, 2)])
        with pytest.raises(SignetError):
            EdgeSet.from_pairs(4, [(1, 4)])

    def test_adjacency_symmetric(self):
        e = EdgeSet.from_pairs(4, [(0, 1), (2, 3)])
        a = e.adjacency()
        assert np.array_equal(a, a.T)
        assert a[0, 1] == 1 and a[1, 0] == 1 and a[0, 2] == 0
        assert np.all(np.diag(a) == 0)

    def test_permuted_relabels(self):
        e = EdgeSet.from_pairs(4, [(0, 1), (1, 2)])
        perm = [3, 0, 2, 1]
        got = e.permuted(perm)
        assert got.edges == frozenset({(0, 3), (0, 2)})


class TestSampleCovariance:
    def test_hand_example(self):
        x = np.array([[1.0, 2.0], [3.0, 2.0], [5.0, 8.0]])
        c = center_columns(x)
        want = c.T @ c / 3.0
        got = sample_covariance(x)
        assert np.allclose(got, want)
        assert np.allclose(got, got.T)

    def test_centering_removes_means(self):
        x = np.array([[1.0, 10.0], [3.0, 30.0]])
        assert np.allclose(center_columns(x).mean(axis=0), 0.0)

    def test_divides_by_n_not_n_minus_one(self):
        x = np.array([[1.0], [-1.0]])
        assert sample_covariance(x)[0, 0] == pytest.approx(1.0)


class TestNeighborhoods:
    def test_matches_single_node_solves(self, rng):
        n, p = 40, 6
        x = rng.standard_normal((n, p))
        field = uniform_penalty_field(p, np.full(p, 0.05 * n))
        fits = fit_neighborhoods(x, field)
        xc = center_columns(x)
        for j in range(p):
            idx = [i for i in range(p) if i != j]
            prob = WeightedLassoProblem(
                design=xc[:, idx],
                response=xc[:, j],
                weights=field.weights[j, idx],
            )
            want = solve_weighted_lasso(prob).values
            assert np.allclose(fits[j].coefficients[idx], want, atol=1e-5)
            assert fits[j].coefficients[j] == 0.0

    def test_combine_needs_all_nodes(self, rng):
        x = rng.standard_normal((20, 4))
        fits = fit_neighborhoods(x, uniform_penalty_field(4, np.full(4, 1.0)))
        with pytest.raises(SignetError):
            combine(fits[:3], "and")

    def test_rule_validated(self, rng):
        x = rng.standard_normal((20, 4))
        fits = fit_neighborhoods(x, uniform_penalty_field(4, np.full(4, 1.0)))
        with pytest.raises(SignetError):
            combine(fits, "xor")


class TestRules:
    def test_edges_from_support_hand_case(self):
        support = np.zeros((3, 3), dtype=bool)
        support[0, 1] = True
        support[1, 0] = True
        support[2, 0] = True
        and_edges = edges_from_support(support, "and")
        or_edges = edges_from_support(support, "or")
        assert and_edges.edges == frozenset({(0, 1)})
        assert or_edges.edges == frozenset({(0, 1), (0, 2)})

    @settings(max_examples=60)
    @given(st.integers(0, 2**32 - 1))
    def test_and_subset_of_or(self, seed):
        rng = np.random.default_rng(seed)
        p = int(rng.integers(2, 10))
        support = rng.random((p, p)) < 0.4
        np.fill_diagonal(support, False)
        and_edges = edges_from_support(support, "and")
        or_edges = edges_from_support(support, "or")
        assert and_edges.edges <= or_edges.edges


class TestSiMbIdentity:
    def test_constant_link_reduces_to_mb(self, rng):
        for _ in range(5):
            p, n = 8, 30
            x = rng.standard_normal((n, p))
            dist = random_coords(rng, p)
            anchors = lambda_max_matrix(x, np.ones((p, p)) - np.eye(p))
            scales = 0.3 * anchors
            for rule in ("and", "or"):
                si = estimate_si(x, dist, CONSTANT_LINK, scales, rule=rule)
                mb = estimate_mb(x, scales, rule=rule)
                assert si.edges == mb.edges

    def test_si_and_within_or(self, rng):
        p, n = 8, 35
        x = rng.standard_normal((n, p))
        dist = random_coords(rng, p)
        anchors = lambda_max_matrix(x, np.ones((p, p)) - np.eye(p))
        si_and = estimate_si(x, dist, LinkFunction.power(3.0), 0.2 * anchors, rule="and")
        si_or = estimate_si(x, dist, LinkFunction.power(3.0), 0.2 * anchors, rule="or")
        assert si_and.edges <= si_or.edges

    def test_overpenalized_is_empty(self, rng):
        x = np.asarray(np.random.default_rng(3).standard_normal((30, 5)))
        assert estimate_mb(x, np.full(5, 1e9)).n_edges == 0


class TestPartialCorrelations:
    def test_two_by_two_closed_form(self):
        theta = np.array([[2.0, -1.0], [-1.0, 2.0]])
        rho = partial_correlations_from_precision(theta)
        assert rho[0, 1] == pytest.approx(0.5)
        assert rho[0, 0] == 1.0

    def test_rejects_bad_diagonal(self):
        with pytest.raises(NotPositiveDefinite):
            partial_correlations_from_precision(np.array([[0.0, 1.0], [1.0, 2.0]]))

    def test_needs_more_rows_than_columns(self, rng):
        with pytest.raises(RequiresMoreSamples):
            partial_correlations(rng.standard_normal((5, 5)))

    def test_consistent_at_large_n(self):
        inst = make_pa_condnum_instance(10, 4000, seed=7)
        rho_hat = partial_correlations(inst.data)
        rho_true = partial_correlations_from_precision(inst.precision)
        assert np.max(np.abs(rho_hat - rho_true)) < 0.12


class TestThr:
    def test_threshold_picks_strong_pairs(self):
        inst = make_pa_condnum_instance(6, 3000, seed=1)
        rho = partial_correlations(inst.data)
        iu, ju = np.triu_indices(6, k=1)
        mags = np.abs(rho[iu, ju])
        tau = float(np.sort(mags)[-3])  # keep exactly the two largest
        edges = estimate_thr(inst.data, tau)
        assert edges.n_edges == 2
        kept = sorted(mags[[i for i, (a, b) in enumerate(zip(iu, ju))
                            if (a, b) in edges.edges]])
        assert kept[0] > tau

    def test_threshold_range_validated(self, rng):
        x = rng.standard_normal((20, 3))
        with pytest.raises(SignetError):
            estimate_thr(x, 1.5)
        with pytest.raises(SignetError):
            estimate_thr(x, -0.1)

    def test_refuses_high_dimension(self, rng):
        with pytest.raises(RequiresMoreSamples):
            estimate_thr(rng.standard_normal((10, 12)), 0.5)

    def test_threshold_one_gives_empty(self, rng):
        x = rng.standard_normal((30, 4))
        assert estimate_thr(x, 1.0).n_edges == 0


def orthogonal_columns_data(rng, n, p):
    """Centered data whose sample covariance is exactly diagonal."""
    x = center_columns(rng.standard_normal((n, p)))
    q, _ = np.linalg.qr(x)
    return q * rng.uniform(1.0, 3.0, p)


class TestGlasso:
    def test_zero_penalty_is_inverse_covariance(self, rng):
        x = rng.standard_normal((60, 8))
        edges, theta = estimate_glasso(x, 0.0)
        s = sample_covariance(x)
        assert np.max(np.abs(theta @ s - np.eye(8))) < 1e-8

    def test_tiny_penalty_approaches_mle(self, rng):
        x = rng.standard_normal((80, 6))
        s = sample_covariance(x)
        _, theta = estimate_glasso(x, 1e-5, tol=1e-8)
        want = np.linalg.inv(s)
        assert np.max(np.abs(theta - want)) < 1e-2

    def test_diagonal_covariance_gives_diagonal_precision(self, rng):
        x = orthogonal_columns_data(rng, 50, 6)
        edges, theta = estimate_glasso(x, 0.05)
        assert edges.n_edges == 0
        off = theta[~np.eye(6, dtype=bool)]
        assert np.max(np.abs(off)) < 1e-12

    def test_saturating_penalty_empties_graph(self, rng):
        x = rng.standard_normal((50, 5))
        s = sample_covariance(x)
        lam = float(np.max(np.abs(s - np.diag(np.diag(s))))) * 1.01
        edges, theta = estimate_glasso(x, lam)
        assert edges.n_edges == 0

    def test_negative_penalty_rejected(self, rng):
        with pytest.raises(SignetError):
            estimate_glasso(rng.standard_normal((20, 3)), -0.1)

    def test_path_matches_single_solves(self, rng):
        x = rng.standard_normal((60, 5))
        s = sample_covariance(x)
        anchor = float(np.max(np.abs(s - np.diag(np.diag(s)))))
        lams = anchor * np.array([0.9, 0.5, 0.2])
        path = glasso_path(x, lams)
        for lam, entry in zip(lams, path):
            assert entry is not None
            edges, theta = entry
            _, theta_alone = estimate_glasso(x, float(lam))
            assert np.max(np.abs(theta - theta_alone)) < 1e-3


class TestPathSupports:
    def test_matches_pointwise_fits(self, rng):
        n, p = 40, 5
        x = rng.standard_normal((n, p))
        shape = np.ones((p, p)) - np.eye(p)
        anchors = lambda_max_matrix(x, shape)
        multipliers = np.array([0.8, 0.4, 0.1])
        supports = neighborhood_path_supports(
            x, shape, multipliers[:, None] * anchors[None, :]
        )
        for t, c in enumerate(multipliers):
            field = uniform_penalty_field(p, c * anchors)
            fits = fit_neighborhoods(x, field)
            for j in range(p):
                want = np.abs(fits[j].coefficients) > 1e-10
                assert np.array_equal(supports[t, j], want)
