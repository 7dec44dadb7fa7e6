import numpy as np
import pytest
from hypothesis import given, strategies as st

from affine_vtln.model import (
    AffineParams,
    Category,
    FormantVector,
    LayoutMismatchError,
    PairedDataset,
    residual,
    warp_formants,
)


def fv(values, sid="s", vowels=None):
    vowels = vowels or [f"v{i:02d}" for i in range(len(values))]
    return FormantVector(sid, "M", [(v, 1, f) for v, f in zip(vowels, values)])


def test_canonical_ordering():
    a = FormantVector("a", "F", [("iy", 2, 2300), ("aa", 1, 700), ("iy", 1, 300), ("aa", 2, 1100)])
    assert a.labels == (("aa", 1), ("aa", 2), ("iy", 1), ("iy", 2))
    assert list(a.values) == [700, 1100, 300, 2300]
    assert a.category is Category.FEMALE and a.r == 4


def test_formant_vector_validation():
    with pytest.raises(ValueError):
        FormantVector("a", "M", [("aa", 1, 0.0)])
    with pytest.raises(ValueError):
        FormantVector("a", "M", [("aa", 1, 12000.0)])
    with pytest.raises(ValueError):
        FormantVector("a", "M", [("aa", 4, 500.0)])
    with pytest.raises(ValueError):
        FormantVector("a", "M", [("aa", 1, 500.0), ("aa", 1, 510.0)])
    with pytest.raises(ValueError):
        FormantVector("a", "X", [("aa", 1, 500.0)])


def test_values_read_only():
    a = fv([500.0, 1500.0])
    with pytest.raises(ValueError):
        a.values[0] = 1.0


def test_affine_params_validation():
    with pytest.raises(ValueError):
        AffineParams(0.0, 1.0)
    with pytest.raises(ValueError):
        AffineParams(1.0, 1.0, sigma=0.0)


def test_warp_examples():
    assert list(warp_formants(fv([500, 1500, 2500]), AffineParams(1.0, 999.0)).values) == [500, 1500, 2500]
    assert warp_formants(fv([500]), AffineParams(1.1, 100.0)).values[0] == pytest.approx(560.0)
    assert warp_formants(fv([1000]), AffineParams(0.9, 200.0)).values[0] == pytest.approx(880.0)


def test_warp_below_zero_rejected():
    with pytest.raises(ValueError, match="warp pushed"):
        warp_formants(fv([100.0]), AffineParams(0.5, 1000.0))


def test_warp_keeps_layout():
    x = FormantVector("x", "C", [("iy", 1, 300), ("iy", 2, 2500)])
    w = warp_formants(x, AffineParams(1.2, 50.0))
    assert w.labels == x.labels and w.speaker_id == "x" and w.category is Category.CHILD


def test_residual_examples():
    x = fv([500.0, 1500.0, 2500.0])
    p = AffineParams(1.07, 140.0)
    assert np.allclose(residual(warp_formants(x, p), x, p), 0.0, atol=1e-9)
    y = x.with_values(x.values + np.array([1.0, 2.0, 3.0]))
    assert list(residual(y, x, AffineParams(1.0, 0.0))) == [1.0, 2.0, 3.0]


def test_residual_layout_mismatch_names_label():
    x = fv([500.0, 1500.0], vowels=["aa", "ae"])
    y = fv([500.0, 1500.0], vowels=["aa", "iy"])
    with pytest.raises(LayoutMismatchError, match="ae"):
        residual(y, x, AffineParams(1.0))


@given(st.lists(st.floats(100, 4000), min_size=1, max_size=12), st.floats(0.7, 1.4), st.floats(-300, 300),
       st.integers(0, 2**32 - 1))
def test_residual_roundtrip(values, alpha, kappa, seed):
    x = fv(values)
    p = AffineParams(alpha, kappa)
    eps = np.random.default_rng(seed).normal(0, 20, len(values))
    w = warp_formants(x, p).values + eps
    if np.any(w <= 0) or np.any(w > 10000):
        return
    y = x.with_values(w)
    assert np.allclose(residual(y, x, p), eps, rtol=1e-9, atol=1e-9 * np.max(np.abs(w)))


@given(st.floats(1, 5000), st.floats(1, 5000), st.floats(0.05, 3), st.floats(-500, 500))
def test_warp_monotone(fa, fb, alpha, kappa):
    from affine_vtln.model import warp_values

    lo, hi = sorted((fa, fb))
    if lo == hi:
        return
    w = warp_values([lo, hi], alpha, kappa)
    assert w[0] < w[1]


@given(st.floats(-1e4, 1e4))
def test_unit_alpha_identity(kappa):
    x = fv([321.0, 1234.5, 2999.0])
    assert np.array_equal(warp_formants(x, AffineParams(1.0, kappa)).values, x.values)


def test_paired_dataset_stats():
    x = np.array([1.0, 2.0, 3.0])
    ys = np.array([[2.0, 4.0, 7.0], [1.0, 1.0, 1.0]])
    d = PairedDataset.from_arrays(x, ys)
    st = d.stats
    assert (d.n, d.r) == (2, 3)
    assert st.xx == 14 and st.x1 == 6
    assert list(st.y1) == [13, 3] and list(st.xy) == [31, 6] and list(st.yy) == [69, 3]


def test_paired_dataset_layout_checked():
    x = fv([500.0, 1500.0], vowels=["aa", "ae"])
    y = fv([500.0, 1500.0], vowels=["aa", "iy"], sid="r")
    with pytest.raises(LayoutMismatchError):
        PairedDataset.from_vectors(x, [y])
    with pytest.raises(ValueError):
        PairedDataset.from_vectors(x, [])
