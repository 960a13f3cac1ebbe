import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sligeo import (
    SampleSet,
    SliParams,
    build_precision,
    compute_weights,
    energy,
    gradient_term,
)
from sligeo.kernels import KERNEL_FAMILIES

from oracles import energy_brute, precision_brute, s1_brute, weights_brute


def two_point_fixture():
    samples = SampleSet([[0.0], [1.0]], [0.0, 2.0])
    w = compute_weights(samples, [2.0, 2.0], "spherical")
    return samples, w


def test_single_point_weights():
    samples = SampleSet([[0.0, 0.0]], [5.0])
    w = compute_weights(samples, [1.0], "spherical")
    assert w.z == 1.0
    assert w.w[0, 0] == 1.0
    assert w.raw.nnz == 1


def test_two_point_hand_values():
    _, w = two_point_fixture()
    # K(0.5) = 0.3125 twice plus two diagonal ones
    assert w.z == pytest.approx(2.625, rel=1e-15)
    assert w.w[0, 1] == pytest.approx(0.3125 / 2.625, rel=1e-14)
    assert w.w[1, 0] == pytest.approx(0.3125 / 2.625, rel=1e-14)


def test_asymmetric_weights():
    samples = SampleSet([[0.0], [3.0]], [0.0, 1.0])
    w = compute_weights(samples, [1.0, 4.0], "spherical")
    assert w.w[0, 1] == 0.0
    assert w.w[1, 0] > 0.0


def test_weights_match_dense_oracle():
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 4, (30, 2))
    samples = SampleSet(pts, rng.normal(size=30))
    h = rng.uniform(0.5, 2.0, 30)
    for family in ("spherical", "gaussian", "uniform", "tricube"):
        w = compute_weights(samples, h, family)
        dense, z = weights_brute(pts, h, family)
        np.testing.assert_allclose(w.w.toarray(), dense, atol=1e-13)
        assert w.z == pytest.approx(z, rel=1e-12)


def test_weight_sum_bounded_by_one():
    rng = np.random.default_rng(1)
    samples = SampleSet(rng.uniform(0, 10, (40, 2)), rng.normal(size=40))
    w = compute_weights(samples, np.full(40, 1.5), "quartic")
    assert w.w.sum() <= 1.0 + 1e-12


def test_s1_constant_field_is_zero():
    samples = SampleSet([[0.0], [1.0], [2.0]], [3.0, 3.0, 3.0])
    w = compute_weights(samples, [2.0, 2.0, 2.0], "spherical")
    assert gradient_term(samples, w) == 0.0


def test_s1_two_point_hand_value():
    samples, w = two_point_fixture()
    expected = (w.w[0, 1] + w.w[1, 0]) * 4.0
    assert gradient_term(samples, w) == pytest.approx(expected, rel=1e-14)
    assert gradient_term(samples, w) == pytest.approx(0.952381, rel=1e-6)


def test_s1_matches_dense_double_loop():
    rng = np.random.default_rng(2)
    pts = rng.uniform(0, 3, (20, 2))
    vals = rng.normal(size=20)
    samples = SampleSet(pts, vals)
    h = rng.uniform(0.5, 1.5, 20)
    w = compute_weights(samples, h, "spherical")
    dense, _ = weights_brute(pts, h, "spherical")
    assert gradient_term(samples, w) == pytest.approx(
        s1_brute(vals, dense), rel=1e-12
    )


def test_energy_zero_fluctuation():
    samples = SampleSet([[0.0], [1.0]], [1.0, 1.0])
    w = compute_weights(samples, [2.0, 2.0], "spherical")
    params = SliParams(1.0, 1.0, 1.0, 1, 1.0, "spherical")
    assert energy(samples, params, w) == 0.0


def test_energy_two_point_hand_value():
    samples, w = two_point_fixture()
    params = SliParams(1.0, 1.0, 1.0, 1, 1.0, "spherical")
    assert energy(samples, params, w) == pytest.approx(0.976190, rel=1e-6)


def test_energy_equals_quadratic_form():
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 5, (25, 2))
    vals = rng.normal(2.0, 1.0, 25)
    samples = SampleSet(pts, vals)
    h = rng.uniform(0.5, 2.0, 25)
    w = compute_weights(samples, h, "spherical")
    params = SliParams(0.7, 1.5, 2.5, 1, 1.0, "spherical")
    j = build_precision(samples, params, w)
    xp = vals - params.m_x
    assert 2 * energy(samples, params, w) == pytest.approx(
        float(xp @ (j.matrix @ xp)), rel=1e-10
    )


def test_precision_single_point():
    samples = SampleSet([[0.0]], [1.0])
    w = compute_weights(samples, [1.0], "spherical")
    params = SliParams(0.5, 0.0, 1.0, 1, 1.0, "spherical")
    j = build_precision(samples, params, w)
    np.testing.assert_allclose(j.matrix.toarray(), [[2.0]], rtol=1e-15)


def test_precision_two_point_hand_values():
    samples, w = two_point_fixture()
    params = SliParams(1.0, 1.0, 1.0, 1, 1.0, "spherical")
    j = build_precision(samples, params, w).matrix.toarray()
    assert j[0, 0] == pytest.approx(0.738095, rel=1e-6)
    assert j[1, 1] == pytest.approx(0.738095, rel=1e-6)
    assert j[0, 1] == pytest.approx(-0.238095, rel=1e-5)


def test_precision_matches_dense_oracle_and_spd():
    rng = np.random.default_rng(4)
    pts = rng.uniform(0, 4, (30, 2))
    samples = SampleSet(pts, rng.normal(size=30))
    h = rng.uniform(0.6, 1.8, 30)
    w = compute_weights(samples, h, "spherical")
    params = SliParams(2.0, 0.0, 3.0, 1, 1.0, "spherical")
    j = build_precision(samples, params, w)
    dense_w, _ = weights_brute(pts, h, "spherical")
    expected = precision_brute(30, 2.0, 3.0, dense_w)
    np.testing.assert_allclose(j.matrix.toarray(), expected, atol=1e-13)
    evals = np.linalg.eigvalsh(j.matrix.toarray())
    assert evals.min() > 0
    margin = np.abs(expected).diagonal() - (
        np.abs(expected).sum(axis=1) - np.abs(expected.diagonal())
    )
    np.testing.assert_allclose(margin, 1.0 / (30 * 2.0), rtol=1e-12)


def test_precision_rejects_invalid_params():
    with pytest.raises(ValueError):
        SliParams(0.0, 0.0, 1.0, 1, 1.0, "spherical")
    with pytest.raises(ValueError):
        SliParams(1.0, 0.0, -1.0, 1, 1.0, "spherical")


def test_lambda_scaling_of_precision():
    samples, w = two_point_fixture()
    j1 = build_precision(
        samples, SliParams(1.0, 1.0, 1.0, 1, 1.0, "spherical"), w
    ).matrix.toarray()
    j2 = build_precision(
        samples, SliParams(4.0, 1.0, 1.0, 1, 1.0, "spherical"), w
    ).matrix.toarray()
    np.testing.assert_allclose(j2, j1 / 4.0, rtol=1e-14)


def test_diagonal_weights_do_not_change_precision():
    # strip the stored diagonal from the weight matrix; J must not move
    import scipy.sparse as sp
    from sligeo.sli import WeightMatrix

    samples, w = two_point_fixture()
    params = SliParams(1.0, 1.0, 1.0, 1, 1.0, "spherical")
    raw_nodiag = w.raw.tolil()
    raw_nodiag.setdiag(0.0)
    w_nodiag = WeightMatrix(sp.csr_matrix(raw_nodiag), w.z)
    j_a = build_precision(samples, params, w).matrix.toarray()
    j_b = build_precision(samples, params, w_nodiag).matrix.toarray()
    np.testing.assert_allclose(j_a, j_b, atol=1e-15)


def test_sparsity_index_limits():
    samples = SampleSet([[0.0]], [1.0])
    w = compute_weights(samples, [1.0], "spherical")
    j = build_precision(samples, SliParams(1, 0, 1, 1, 1, "spherical"), w)
    assert j.sparsity_index() == 1.0

    # tight cluster: everything within support -> dense
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 0.1, (10, 2))
    samples = SampleSet(pts, rng.normal(size=10))
    w = compute_weights(samples, np.full(10, 10.0), "uniform")
    j = build_precision(samples, SliParams(1, 0, 1, 1, 1, "uniform"), w)
    assert j.sparsity_index() == 1.0


def test_sparsity_index_separated_pairs():
    # 3 well-separated pairs: N + 2 * pairs nonzeros
    pts = [[0.0], [0.1], [100.0], [100.1], [200.0], [200.1]]
    samples = SampleSet(pts, np.zeros(6))
    w = compute_weights(samples, np.full(6, 0.5), "uniform")
    j = build_precision(samples, SliParams(1, 0, 1, 1, 1, "uniform"), w)
    assert j.sparsity_index() == pytest.approx((6 + 2 * 3) / 36)


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 100_000),
    n=st.integers(2, 60),
    family=st.sampled_from(KERNEL_FAMILIES),
    lam=st.floats(1e-3, 1e3),
    c1=st.floats(1e-3, 1e3),
)
def test_theorem_properties_random(seed, n, family, lam, c1):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(1, 3))
    pts = rng.uniform(0, 10, (n, dim))
    samples = SampleSet(pts, rng.normal(size=n))
    h = rng.uniform(0.5, 3.0, n)
    w = compute_weights(samples, h, family)
    j = build_precision(samples, SliParams(lam, 0, c1, 1, 1, family), w).matrix
    dense = j.toarray()
    # symmetric, nonpositive off-diagonals, exact dominance margin
    np.testing.assert_allclose(dense, dense.T, atol=0)
    off = dense - np.diag(np.diag(dense))
    assert np.all(off <= 0)
    margin = np.abs(dense).diagonal() - np.abs(off).sum(axis=1)
    np.testing.assert_allclose(margin, 1.0 / (n * lam), rtol=1e-10)
    assert np.linalg.eigvalsh(dense).min() >= 1.0 / (n * lam) - 1e-10 * max(
        1.0, 1.0 / (n * lam)
    )
