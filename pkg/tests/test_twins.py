import numpy as np
import pytest

from topodist import (
    TwinPair,
    cosine_series_eval,
    cosine_series_fit,
    exact_ks_pvalue,
    falconer_hi,
    heritability_ks,
    twin_group_correlation,
)
from topodist.errors import DegreeTooHigh, DimensionMismatch, TooFewPairs
from topodist.twins import HERITABILITY_GRID, clamp_hi, cosine_basis, synthetic_twin_pairs


def _random_pairs(rng, count, p, same=False):
    out = []
    for _ in range(count):
        a = rng.standard_normal((p, p))
        a = (a + a.T) / 2
        b = a.copy() if same else (lambda m: (m + m.T) / 2)(rng.standard_normal((p, p)))
        out.append(TwinPair(a, b))
    return out


def test_identical_twins_correlate_perfectly(rng):
    c = twin_group_correlation(_random_pairs(rng, 10, 4, same=True))
    np.testing.assert_allclose(c.matrix, 1.0, atol=1e-12)


def test_independent_twins_near_zero(rng):
    c = twin_group_correlation(_random_pairs(rng, 50, 6)).matrix
    assert abs(c[np.triu_indices(6, 1)].mean()) < 0.1


def test_symmetrized_exactly(rng):
    pairs = [TwinPair(rng.standard_normal((5, 5)), rng.standard_normal((5, 5))) for _ in range(8)]
    c = twin_group_correlation(pairs).matrix
    assert (c - c.T == 0).all()


def test_constant_entries_are_nan():
    eye = np.eye(3)
    rng = np.random.default_rng(1)
    pairs = []
    for _ in range(5):
        a = rng.random((3, 3))
        a = (a + a.T) / 2
        np.fill_diagonal(a, 1.0)
        pairs.append(TwinPair(a, a + 0 * eye))
    c = twin_group_correlation(pairs).matrix
    assert np.isnan(np.diag(c)).all() and not np.isnan(c[0, 1])


def test_group_errors(rng):
    with pytest.raises(TooFewPairs):
        twin_group_correlation(_random_pairs(rng, 2, 3))
    with pytest.raises(DimensionMismatch):
        TwinPair(np.zeros((3, 3)), np.zeros((4, 4)))
    with pytest.raises(DimensionMismatch):
        twin_group_correlation(_random_pairs(rng, 3, 3) + _random_pairs(rng, 1, 4))


def test_falconer_formula():
    assert falconer_hi(np.array([[0.9]]), np.array([[0.4]]))[0, 0] == pytest.approx(1.0)
    c = np.random.default_rng(0).random((4, 4))
    assert (falconer_hi(c, c) == 0).all()
    a, b = np.random.default_rng(1).random((2, 4, 4))
    np.testing.assert_allclose(falconer_hi(3 * a, 3 * b), 3 * falconer_hi(a, b))
    np.testing.assert_array_equal(clamp_hi(np.array([-0.2, 0.5, 1.4])), [0, 0.5, 1])


def test_synthetic_heritability_recovered():
    rng = np.random.default_rng(2)
    p, h = 8, 0.6
    mz = twin_group_correlation(synthetic_twin_pairs(400, p, h, "mz", rng))
    dz = twin_group_correlation(synthetic_twin_pairs(400, p, h, "dz", rng))
    hi = falconer_hi(mz, dz)[np.triu_indices(p, 1)]
    assert abs(hi.mean() - h) < 0.05


def test_heritability_ks_identical(rng):
    c = twin_group_correlation(_random_pairs(rng, 6, 5)).matrix
    res = heritability_ks(c, c)
    for r in res.values():
        assert r.observed.value == 0 and r.p_value == 1.0


def test_heritability_ks_dominance():
    rng = np.random.default_rng(3)
    p = 12
    base = rng.uniform(0.1, 0.5, (p, p))
    base = (base + base.T) / 2
    mz, dz = np.clip(base + 0.4, -1, 1), base
    for m in (mz, dz):
        np.fill_diagonal(m, 1.0)
    res = heritability_ks(mz, dz)
    from topodist import WeightedNetwork, betti_curve

    def curve(c):
        w = c.copy()
        np.fill_diagonal(w, 0)
        return betti_curve(WeightedNetwork(w, signed=True), HERITABILITY_GRID).beta0

    gap = curve(dz) - curve(mz)
    assert (gap >= 0).all() and gap.max() == res["beta0"].observed.value


def test_planted_gap_order_of_magnitude():
    assert exact_ks_pvalue(82, 101) < 1e-20


def test_cosine_zero_signal():
    assert (cosine_series_fit(np.zeros(50), 5) == 0).all()


def test_cosine_recovers_basis_function():
    t = np.linspace(0, 1, 200)
    coef = cosine_series_fit(np.sqrt(2) * np.cos(np.pi * t), 6)
    assert coef[1] == pytest.approx(1.0, abs=1e-6)
    assert np.abs(np.delete(coef, 1)).max() < 1e-6
    np.testing.assert_allclose(cosine_series_eval(coef, t), np.sqrt(2) * np.cos(np.pi * t), atol=1e-6)


def test_cosine_residual_orthogonal():
    y = np.random.default_rng(4).standard_normal(1200)
    k = 119
    coef = cosine_series_fit(y, k)
    t = np.linspace(0, 1, y.size)
    resid = y - cosine_series_eval(coef, t)
    assert np.abs(cosine_basis(t, k).T @ resid).max() < 1e-8


def test_cosine_center_and_errors():
    y = np.full(30, 5.0)
    assert cosine_series_fit(y, 3)[0] == pytest.approx(5.0)
    assert np.abs(cosine_series_fit(y, 3, center=True)).max() < 1e-12
    with pytest.raises(DegreeTooHigh):
        cosine_series_fit(np.zeros(5), 4)
