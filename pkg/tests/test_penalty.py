import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from signet.errors import DimensionMismatch, SignetError
from signet.penalty import (
    DistanceInfo,
    LinkFunction,
    build_penalty_field,
    uniform_penalty_field,
)


def coords_grid(p):
    side = int(np.ceil(p ** (1 / 3)))
    pts = [(i, j, k) for i in range(side) for j in range(side) for k in range(side)]
    return np.array(pts[:p], dtype=np.float64) * 10.0


class TestDistanceInfo:
    def test_from_coordinates(self):
        c = np.array([[0.0, 0.0, 0.0], [3.0, 4.0, 0.0]])
        d = DistanceInfo.from_coordinates(c)
        assert d.dim == 2
        assert d.matrix[0, 1] == pytest.approx(5.0)
        assert d.matrix[0, 0] == 0.0

    def test_matrix_must_match_coordinates(self):
        c = np.array([[0.0, 0.0, 0.0], [3.0, 4.0, 0.0]])
        bad = np.array([[0.0, 6.0], [6.0, 0.0]])
        with pytest.raises(SignetError):
            DistanceInfo(matrix=bad, coordinates=c)

    def test_rejects_asymmetry_and_negatives(self):
        with pytest.raises(SignetError):
            DistanceInfo.from_matrix(np.array([[0.0, 1.0], [2.0, 0.0]]))
        with pytest.raises(SignetError):
            DistanceInfo.from_matrix(np.array([[0.0, -1.0], [-1.0, 0.0]]))

    def test_rejects_nonzero_diagonal(self):
        with pytest.raises(SignetError):
            DistanceInfo.from_matrix(np.array([[1.0, 2.0], [2.0, 0.0]]))

    def test_rejects_bad_coordinate_shape(self):
        with pytest.raises(DimensionMismatch):
            DistanceInfo.from_coordinates(np.zeros((3, 2)))


class TestLinkFunction:
    def test_power(self):
        f = LinkFunction.power(3.0)
        assert f(np.array([2.0]))[0] == pytest.approx(8.0)
        assert f.name == "power:3"

    def test_identity(self):
        f = LinkFunction.identity()
        x = np.array([0.0, 1.5, 7.0])
        assert np.array_equal(f(x), x)
        assert f.name == "identity"

    def test_table_interpolates_and_clamps(self):
        f = LinkFunction.table(np.array([0.0, 10.0]), np.array([1.0, 3.0]))
        assert f(np.array([5.0]))[0] == pytest.approx(2.0)
        assert f(np.array([100.0]))[0] == pytest.approx(3.0)
        assert f(np.array([0.0]))[0] == pytest.approx(1.0)

    def test_table_validation(self):
        with pytest.raises(SignetError):
            LinkFunction.table(np.array([1.0, 0.5]), np.array([1.0, 2.0]))
        with pytest.raises(SignetError):
            LinkFunction.table(np.array([0.0]), np.array([1.0]))
        with pytest.raises(SignetError):
            LinkFunction.table(np.array([0.0, 1.0]), np.array([-1.0, 2.0]))

    def test_power_validation(self):
        with pytest.raises(SignetError):
            LinkFunction.power(0.0)
        with pytest.raises(SignetError):
            LinkFunction(kind="nope")


class TestBuildPenaltyField:
    def test_matches_direct_formula(self, rng):
        p = 7
        d = DistanceInfo.from_coordinates(rng.uniform(0, 50, (p, 3)))
        f = LinkFunction.power(3.0)
        scale = rng.uniform(0.5, 2.0, p)
        field = build_penalty_field(d, f, scale)
        for j in range(p):
            for i in range(p):
                want = 0.0 if i == j else scale[j] * d.matrix[i, j] ** 3
                assert field.weights[j, i] == pytest.approx(want)

    def test_zero_distance_pair_is_unpenalized(self):
        c = np.zeros((3, 3))
        c[2] = [1.0, 0.0, 0.0]
        d = DistanceInfo.from_coordinates(c)
        field = build_penalty_field(d, LinkFunction.power(3.0), np.ones(3))
        assert field.weights[0, 1] == 0.0
        assert field.weights[0, 2] > 0.0

    def test_scale_length_checked(self):
        d = DistanceInfo.from_coordinates(coords_grid(4))
        with pytest.raises(DimensionMismatch):
            build_penalty_field(d, LinkFunction.identity(), np.ones(5))

    def test_uniform_field(self):
        field = uniform_penalty_field(4, np.array([1.0, 2.0, 3.0, 4.0]))
        off = ~np.eye(4, dtype=bool)
        for j in range(4):
            row = field.weights[j][off[j]]
            assert np.all(row == field.scale[j])
        assert np.all(np.diag(field.weights) == 0.0)

    def test_uniform_field_scalar_scale(self):
        field = uniform_penalty_field(3, np.asarray(2.0))
        assert field.weights[0, 1] == 2.0
        assert field.scale.shape == (3,)

    def test_negative_scale_rejected(self):
        d = DistanceInfo.from_coordinates(coords_grid(3))
        with pytest.raises(SignetError):
            build_penalty_field(d, LinkFunction.identity(), np.array([1.0, -1.0, 1.0]))


@given(st.integers(0, 2**32 - 1), st.floats(0.5, 4.0))
def test_field_invariants_random(seed, exponent):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(2, 9))
    d = DistanceInfo.from_coordinates(rng.uniform(0, 20, (p, 3)))
    field = build_penalty_field(
        d, LinkFunction.power(exponent), rng.uniform(0.1, 3.0, p)
    )
    assert np.all(np.diag(field.weights) == 0.0)
    off = field.weights[~np.eye(p, dtype=bool)]
    assert np.all(off >= 0.0)
    assert np.all(np.isfinite(off))


@given(st.integers(0, 2**32 - 1))
def test_monotone_link_preserves_distance_order(seed):
    rng = np.random.default_rng(seed)
    p = 6
    d = DistanceInfo.from_coordinates(rng.uniform(0, 30, (p, 3)))
    field = build_penalty_field(d, LinkFunction.power(2.0), np.full(p, 1.3))
    j = int(rng.integers(p))
    others = [i for i in range(p) if i != j]
    dist_order = np.argsort([d.matrix[j, i] for i in others])
    weight_order = np.argsort([field.weights[j, i] for i in others])
    assert np.array_equal(dist_order, weight_order)
