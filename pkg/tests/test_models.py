import numpy as np
import pytest

from heavytail import mc
from heavytail.models import (ConfigurationError, DeterministicLaw,
                              GaussianVectorLaw, GoeLaw, MatrixMixtureLaw,
                              ModelSpec, UnsupportedOperationError, Variant,
                              VectorMixtureLaw, h_sum_support, pair_a,
                              rank1_gauss, sample_h_columns, sample_h_raw,
                              sample_h_sums, sample_pair, sample_pairs,
                              spec_from_law_text, symm)

MIX_LAW_TEXT = """\
[model]
variant = symm
d = 1
b = 1
eta = 1.0

[h_law]
kind = mixture
matrices = [[0.5]] ; [[2.5]]
probs = 0.5, 0.5
"""


def test_xi_is_derived():
    spec = rank1_gauss(d=2, b=3, eta=0.6)
    assert spec.xi == 0.6 / 3


@pytest.mark.parametrize("kwargs", [
    dict(d=0, b=1, eta=0.1), dict(d=1, b=0, eta=0.1), dict(d=1, b=1, eta=0.0),
    dict(d=1, b=1, eta=-1.0),
])
def test_invalid_dimensions_rejected(kwargs):
    with pytest.raises(ConfigurationError):
        ModelSpec(Variant.RANK1_GAUSS, **kwargs)


def test_rank1gauss_rejects_law_parameters():
    with pytest.raises(ConfigurationError):
        ModelSpec(Variant.RANK1_GAUSS, d=1, b=1, eta=0.1, h_law=GoeLaw(1))


def test_construction_identity_rank1gauss():
    # A + xi*H = I in construction order: A is exactly I - xi*H bit for bit
    spec = rank1_gauss(d=2, b=3, eta=0.6)
    pair = sample_pair(spec, mc.substream(0))
    assert np.array_equal(pair.A, pair_a(spec, pair.H))
    assert np.array_equal(pair.A.T, pair.A)
    assert np.allclose(pair.A + spec.xi * pair.H, np.eye(2), atol=1e-14)


def test_symm_deterministic_identity_case():
    spec = symm(d=3, b=1, eta=0.5, h_law=DeterministicLaw(np.eye(3)))
    pair = sample_pair(spec, mc.substream(1))
    assert np.array_equal(pair.A, 0.5 * np.eye(3))


def test_chi2_moments_of_unscaled_diagonal():
    # diagonal entries of sum a_i a_i^T are chi-square(b): mean b, var 2b
    spec = rank1_gauss(d=2, b=8, eta=0.1)
    h = sample_h_sums(spec, 100_000, mc.substream(2))
    diag = h[:, 0, 0]
    assert diag.mean() == pytest.approx(8.0, abs=4 * diag.std() / np.sqrt(len(diag)))
    assert diag.var(ddof=1) == pytest.approx(16.0, rel=0.05)


def test_sample_h_raw_direct_products():
    # d=2, b=1: H = a a^T is the rank-one projection of the drawn vector
    spec = rank1_gauss(d=2, b=1, eta=1.0)
    rng = mc.substream(3)
    h = sample_h_raw(spec, rng)
    rng2 = mc.substream(3)
    a = rng2.standard_normal((1, 1, 2))[0, 0]
    assert np.allclose(h, np.outer(a, a))
    assert np.linalg.matrix_rank(h) == 1


def test_sample_h_raw_rejects_symm():
    spec = symm(d=1, b=1, eta=1.0, h_law=DeterministicLaw(np.eye(1)))
    with pytest.raises(UnsupportedOperationError):
        sample_h_raw(spec, mc.substream(0))


def test_offdiagonal_factorization_matches_resampled_form():
    # H_12 of a b-summed Gaussian rank-one matrix decomposes as
    # |x_1| |x_2| <Y_1, Y_2> for the component-wise b-vectors; check moments
    # against a brute-force resampling of that factorization
    b, n = 5, 200_000
    spec = rank1_gauss(d=2, b=b, eta=1.0)
    h = sample_h_sums(spec, n, mc.substream(4))
    h12, h11 = h[:, 1, 0], h[:, 0, 0]

    rng = mc.substream(5)
    x1 = rng.standard_normal((n, b))
    x2 = rng.standard_normal((n, b))
    z1, z2 = np.linalg.norm(x1, axis=1), np.linalg.norm(x2, axis=1)
    u = (x1 * x2).sum(axis=1) / (z1 * z2)
    h12_alt = z1 * z2 * u
    h11_alt = z1 ** 2

    for stat, a_, b_ in [("var", h12.var(), h12_alt.var()),
                         ("m4", (h12 ** 4).mean(), (h12_alt ** 4).mean())]:
        assert a_ == pytest.approx(b_, rel=0.1), stat
    corr = np.corrcoef(np.abs(h12), h11)[0, 1]
    corr_alt = np.corrcoef(np.abs(h12_alt), h11_alt)[0, 1]
    assert corr == pytest.approx(corr_alt, abs=0.02)


def test_rotation_invariance_of_gauss_h():
    # QHQ^T has the same entry moments as H (orders 1..4) for fixed Q
    spec = rank1_gauss(d=2, b=3, eta=1.0)
    n = 100_000
    h = sample_h_sums(spec, n, mc.substream(6))
    th = 0.7
    q = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    hq = np.einsum("ij,njk,lk->nil", q, h, q)
    for i in range(2):
        for j in range(2):
            for order in (1, 2, 3, 4):
                a = h[:, i, j] ** order
                b = hq[:, i, j] ** order
                tol = 4 * np.hypot(a.std() / np.sqrt(n), b.std() / np.sqrt(n))
                assert abs(a.mean() - b.mean()) <= tol


def test_psd_of_rank1_h():
    spec = rank1_gauss(d=3, b=2, eta=1.0)
    h = sample_h_sums(spec, 2000, mc.substream(7))
    eigs = np.linalg.eigvalsh(h)
    assert eigs.min() >= -1e-12


def test_fixed_seed_reproducibility():
    spec = rank1_gauss(d=2, b=4, eta=0.3)
    h1, b1 = sample_pairs(spec, 50, mc.substream(8))
    h2, b2 = sample_pairs(spec, 50, mc.substream(8))
    assert np.array_equal(h1, h2) and np.array_equal(b1, b2)


def test_goe_law_is_rotation_invariant_flag():
    assert GoeLaw(2).rotation_invariant
    assert DeterministicLaw(2.0 * np.eye(3)).rotation_invariant
    assert not DeterministicLaw(np.diag([1.0, 2.0])).rotation_invariant
    assert rank1_gauss(1, 1, 0.5).rotation_invariant


def test_mixture_probability_validation():
    eye = np.eye(1)
    with pytest.raises(ConfigurationError):
        MatrixMixtureLaw((eye, 2 * eye), (0.5, 0.5 + 1e-9))
    law = MatrixMixtureLaw((eye, 2 * eye), (0.5, 0.5))
    assert law.d == 1


def test_h_sum_support_multiset_expansion():
    law = MatrixMixtureLaw((np.eye(1) * 0.5, np.eye(1) * 2.5), (0.25, 0.75))
    spec = symm(d=1, b=2, eta=1.0, h_law=law)
    support = h_sum_support(spec)
    assert len(support) == 3  # multisets {aa, ab, bb}
    totals = sorted((float(h[0, 0]), p) for h, p in support)
    assert totals[0] == (1.0, pytest.approx(0.0625))
    assert totals[1] == (3.0, pytest.approx(2 * 0.25 * 0.75))
    assert totals[2] == (5.0, pytest.approx(0.5625))
    assert sum(p for _, p in support) == pytest.approx(1.0)


def test_h_columns_match_full_sums():
    spec = rank1_gauss(d=3, b=2, eta=0.2)
    cols = sample_h_columns(spec, 100, mc.substream(9))
    full = sample_h_sums(spec, 100, mc.substream(9))
    assert np.allclose(cols, full[:, :, 0])


def test_law_file_round_trip_semantics():
    spec = spec_from_law_text(MIX_LAW_TEXT)
    assert spec.variant is Variant.SYMM
    assert spec.d == 1 and spec.b == 1 and spec.eta == 1.0
    support = h_sum_support(spec)
    assert {float(h[0, 0]) for h, _ in support} == {0.5, 2.5}
    spec2 = spec_from_law_text(MIX_LAW_TEXT, overrides={"eta": 0.25})
    assert spec2.eta == 0.25


def test_law_file_bad_probs_rejected():
    bad = MIX_LAW_TEXT.replace("0.5, 0.5", "0.5, 0.6")
    with pytest.raises(ConfigurationError):
        spec_from_law_text(bad)


def test_symm_b_law_mixture():
    b_law = VectorMixtureLaw((np.array([1.0, 0.0]),), (1.0,))
    spec = symm(d=2, b=1, eta=0.5, h_law=DeterministicLaw(np.eye(2)), b_law=b_law)
    _, bvec = sample_pairs(spec, 10, mc.substream(10))
    assert np.array_equal(bvec, np.tile([1.0, 0.0], (10, 1)))


RANK1_LAW_TEXT = """\
[model]
variant = rank1
d = 2
b = 2
eta = 0.5

[a_law]
kind = mixture
vectors = [1.0, 0.0] ; [0.0, 1.0]
probs = 0.5, 0.5

[y_law]
kind = mixture
values = 2.0
probs = 1.0
"""


def test_rank1_mixture_laws_from_file():
    spec = spec_from_law_text(RANK1_LAW_TEXT)
    assert spec.variant is Variant.RANK1
    h, bvec = sample_pairs(spec, 200, mc.substream(11))
    # every a is a basis vector, so H sums two rank-one basis projections
    # and B = xi * sum a_i y_i with y = 2 always
    assert set(np.unique(h)) <= {0.0, 1.0, 2.0}
    assert np.allclose(h, np.swapaxes(h, 1, 2))
    assert np.trace(h.sum(axis=0)) == 200 * 2  # b draws per sample
    # basis-vector draws make B = xi * y * diag(H) exactly (hit counts)
    expected_b = spec.xi * 2.0 * h.diagonal(axis1=1, axis2=2)
    assert np.allclose(bvec, expected_b, atol=1e-15)


def test_rank1_default_laws_match_gauss_variant():
    # rank1 with no laws configured draws the same stream as rank1gauss
    a = ModelSpec(Variant.RANK1, d=2, b=3, eta=0.4)
    g = rank1_gauss(d=2, b=3, eta=0.4)
    ha, ba = sample_pairs(a, 20, mc.substream(12))
    hg, bg = sample_pairs(g, 20, mc.substream(12))
    assert np.array_equal(ha, hg) and np.array_equal(ba, bg)
