import numpy as np
import pytest
from hypothesis import given, strategies as st

from affine_vtln.classical import (
    Clamped,
    Criterion,
    PairEstimate,
    aggregate,
    clamp_kappa,
    estimate_classical,
    estimate_pair,
    mae_objective,
    mse_objective,
)
from affine_vtln.model import FormantVector, warp_values


def vec(values, sid="s"):
    return FormantVector(sid, "M", [(f"v{i:02d}", 1, f) for i, f in enumerate(values)])


def test_objectives_examples():
    x = vec([1000.0, 2000.0])
    y = vec([1003.0, 2004.0], "y")
    assert mse_objective(y, x, 1.0, 0.0) == pytest.approx(25.0)
    y2 = vec([1003.0, 1996.0], "y")
    assert mae_objective(y2, x, 1.0, 0.0) == pytest.approx(7.0)
    exact = vec(warp_values(x.values, 1.1, 120.0), "y")
    assert mse_objective(exact, x, 1.1, 120.0) == pytest.approx(0.0, abs=1e-18)
    assert mae_objective(exact, x, 1.1, 120.0) == pytest.approx(0.0, abs=1e-9)


def test_objective_homogeneity():
    x = vec([1000.0, 2000.0, 2500.0])
    e = np.array([3.0, -1.0, 2.0])
    y1 = vec(x.values + e, "y")
    y2 = vec(x.values + 2 * e, "y")
    assert mse_objective(y2, x, 1.0, 0.0) == pytest.approx(4 * mse_objective(y1, x, 1.0, 0.0))
    assert mae_objective(y2, x, 1.0, 0.0) == pytest.approx(2 * mae_objective(y1, x, 1.0, 0.0))


def test_objective_layout_mismatch():
    with pytest.raises(ValueError):
        mse_objective(vec([1.0, 2.0]), vec([1.0, 2.0, 3.0]), 1.0, 0.0)


@pytest.mark.parametrize("criterion", ["mse", "mae"])
def test_noiseless_recovery(criterion, template_values):
    x = vec(template_values)
    y = vec(warp_values(x.values, 1.08, 150.0), "y")
    pe = estimate_pair(y, x, criterion)
    assert abs(pe.alpha_ij - 1.08) < 1e-4 and abs(pe.kappa_ij - 150.0) < 0.5
    assert not pe.kappa_unreliable
    assert pe.criterion is Criterion.parse(criterion)


def test_identity_pair_flagged(template_values):
    x = vec(template_values)
    pe = estimate_pair(vec(template_values, "y"), x, "mse")
    assert abs(pe.alpha_ij - 1.0) < 1e-4 and pe.kappa_unreliable


def test_mse_and_mae_agree_on_noiseless(template_values):
    x = vec(template_values)
    y = vec(warp_values(x.values, 0.93, 80.0), "y")
    a, b = estimate_pair(y, x, "mse"), estimate_pair(y, x, "mae")
    assert abs(a.alpha_ij - b.alpha_ij) < 1e-3 and abs(a.kappa_ij - b.kappa_ij) < 1e-3 * 100


def test_fit_not_worse_than_start(template_values):
    rng = np.random.default_rng(3)
    x = vec(template_values)
    y = vec(warp_values(x.values, 1.05, 100.0) + rng.normal(0, 40, x.r), "y")
    for c, obj in (("mse", mse_objective), ("mae", mae_objective)):
        pe = estimate_pair(y, x, c)
        assert pe.objective_value <= obj(y, x, 1.0, 0.0)


def test_clamp_examples():
    assert clamp_kappa(-20, 500) == 0
    assert clamp_kappa(700, 500) == 500
    assert clamp_kappa(300, 500) == 300
    with pytest.raises(ValueError):
        clamp_kappa(1.0, 0.0)


@given(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4), st.floats(1, 1e3))
def test_clamp_idempotent_monotone(k1, k2, L):
    assert clamp_kappa(clamp_kappa(k1, L), L) == clamp_kappa(k1, L)
    if k1 <= k2:
        assert clamp_kappa(k1, L) <= clamp_kappa(k2, L)


def pe(subject, ref, alpha, kappa):
    return PairEstimate(subject, ref, alpha, kappa, 0.0, Criterion.MSE)


def test_aggregate_single():
    est = aggregate([pe("s", "r", 1.2, 90.0)])
    assert est.alpha_by_subject["s"] == 1.2 and est.kappa_by_subject["s"] == pytest.approx(90.0) and est.kappa == pytest.approx(90.0)


def test_aggregate_cancellation_error_names_subject():
    with pytest.raises(ZeroDivisionError, match="s1"):
        aggregate([pe("s1", "a", 1.1, 100.0), pe("s1", "b", 0.9, 300.0)])


def test_aggregate_nonstrict_excludes():
    est = aggregate([pe("s1", "a", 1.1, 100.0), pe("s1", "b", 0.9, 300.0), pe("s2", "a", 1.2, 50.0)], strict=False)
    assert est.excluded_subjects == ["s1"] and est.kappa == pytest.approx(50.0)
    assert est.alpha_by_subject["s1"] == pytest.approx(1.0)


def test_aggregate_database_mean():
    est = aggregate([pe("s1", "a", 1.1, 120.0), pe("s2", "a", 1.3, 180.0)])
    assert est.kappa == pytest.approx(150.0)


def test_aggregate_weighted_kappa_and_clamp():
    pairs = [pe("s", "a", 1.1, 100.0), pe("s", "b", 1.3, 700.0)]
    est = aggregate(pairs)
    assert est.kappa_by_subject["s"] == pytest.approx((100 * 0.1 + 700 * 0.3) / 0.4)
    est_c = aggregate(pairs, Clamped(500.0))
    assert est_c.kappa_by_subject["s"] == pytest.approx((100 * 0.1 + 500 * 0.3) / 0.4)
    assert est_c.adjustment == Clamped(500.0)


@given(st.permutations(range(4)))
def test_aggregate_permutation_invariant(order):
    pairs = [pe("s", f"r{i}", 1.0 + 0.05 * (i + 1), 50.0 * (i + 1)) for i in range(4)]
    base = aggregate(pairs)
    perm = aggregate([pairs[i] for i in order])
    assert perm.kappa == pytest.approx(base.kappa, rel=1e-12)
    assert perm.alpha_by_subject["s"] == pytest.approx(base.alpha_by_subject["s"], rel=1e-12)


def test_estimate_classical_end_to_end(template_values):
    x = vec(template_values, "subj")
    refs = [vec(warp_values(x.values, a, 150.0), f"r{i}") for i, a in enumerate([1.05, 1.1, 0.92])]
    est = estimate_classical([x], refs, "mse")
    assert est.kappa == pytest.approx(150.0, abs=0.5)
    assert len(est.pair_estimates) == 3
