import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from affine_vtln.bayes import (
    DegeneratePosteriorError,
    GibbsConfig,
    Hyperparams,
    alpha_posterior_params,
    batch_means_se,
    kappa_posterior_params,
    posterior_variance_reduction_check,
    read_trace_csv,
    run_gibbs,
    sigma_posterior_beta,
    write_trace_csv,
)
from affine_vtln.model import PairedDataset
from affine_vtln.numerics import RngStream

from oracles import alpha_log_density, grid_posterior_1d, joint_grid_means, kappa_log_density

HP = Hyperparams(150.0, 50.0, 1.0, 0.1, 1.0, 100.0)


def random_instance(rng, n_max=3, r_max=5):
    n = int(rng.integers(1, n_max + 1))
    r = int(rng.integers(1, r_max + 1))
    x = rng.uniform(200, 3000, r)
    al = rng.normal(1, 0.1, n)
    kap = rng.normal(100, 100)
    sig = rng.uniform(5, 80)
    ys = al[:, None] * x + kap * (al - 1)[:, None] + rng.normal(0, sig, (n, r))
    hp = Hyperparams(rng.normal(100, 50), rng.uniform(10, 200), rng.normal(1, 0.05), rng.uniform(0.02, 0.3), 1, 200)
    return x, ys, al, kap, sig, hp


def test_hyperparams_validation():
    with pytest.raises(ValueError):
        Hyperparams(0, 0, 1, 0.1, 1, 2)
    with pytest.raises(ValueError):
        Hyperparams(0, 1, 1, -0.1, 1, 2)
    with pytest.raises(ValueError):
        Hyperparams(0, 1, 1, 0.1, 3, 2)
    assert HP.replace(a=3.0).a == 3.0


def test_gibbs_config_validation():
    with pytest.raises(ValueError):
        GibbsConfig(iterations=10, burn_in=10)
    d = PairedDataset.from_arrays([1.0, 2.0], [[1.0, 2.5]])
    with pytest.raises(ValueError):
        run_gibbs(d, HP, GibbsConfig(10, 2, sigma0=500.0))


def test_kappa_all_alpha_one_gives_prior():
    d = PairedDataset.from_arrays([500.0, 1500.0], [[510.0, 1490.0], [505.0, 1520.0]])
    assert kappa_posterior_params(d, [1.0, 1.0], 20.0, HP) == (HP.a, HP.b)


def test_kappa_flat_prior_limit():
    d = PairedDataset.from_arrays([0.0], [[10.0]])
    mu, _ = kappa_posterior_params(d, [2.0], 1.0, Hyperparams(0.0, 1e9, 1.0, 0.1, 0.5, 2.0))
    assert mu == pytest.approx(10.0, abs=1e-6)


def test_alpha_least_squares_limit():
    x = np.array([500.0, 1200.0, 2500.0])
    mu, _ = alpha_posterior_params(2 * x, x, 0.0, 10.0, Hyperparams(0, 1, 0.0, 1e9, 1, 20))
    assert mu == pytest.approx(2.0, abs=1e-6)


def test_alpha_uninformative_data():
    x = np.zeros(3)
    mu, sd = alpha_posterior_params(np.array([1.0, 2.0, 3.0]), x, 0.0, 10.0, HP)
    assert mu == pytest.approx(HP.c) and sd == pytest.approx(HP.d)


def test_conditionals_match_grid_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        x, ys, al, kap, sig, hp = random_instance(rng)
        d = PairedDataset.from_arrays(x, ys)
        mu, sd = kappa_posterior_params(d, al, sig, hp)
        om, osd = grid_posterior_1d(kappa_log_density(x, ys, al, sig, hp.a, hp.b), span_guess=hp.b)
        assert abs(mu - om) < 1e-6 and abs(sd - osd) < 1e-6
        i = int(rng.integers(0, d.n))
        mu, sd = alpha_posterior_params(ys[i], x, kap, sig, hp)
        om, osd = grid_posterior_1d(alpha_log_density(x, ys[i], kap, sig, hp.c, hp.d), span_guess=hp.d)
        assert abs(mu - om) < 1e-6 and abs(sd - osd) < 1e-6


def test_beta_examples():
    x = np.array([100.0, 200.0, 300.0, 400.0])
    d = PairedDataset.from_arrays(x, [1.1 * x + 50 * 0.1])
    assert sigma_posterior_beta(d, [1.1], 50.0) == pytest.approx(0.0, abs=1e-20)
    d1 = PairedDataset.from_arrays(x, [x + 1.0])
    assert sigma_posterior_beta(d1, [1.0], 0.0) == pytest.approx(2.0)
    d3 = PairedDataset.from_arrays(x, [x + 3.0])
    assert sigma_posterior_beta(d3, [1.0], 0.0) == pytest.approx(9 * 2.0)


@given(st.integers(0, 2**32 - 1))
def test_variance_contraction(seed):
    rng = np.random.default_rng(seed)
    x, ys, al, kap, sig, hp = random_instance(rng, 5, 8)
    d = PairedDataset.from_arrays(x, ys)
    _, sd = kappa_posterior_params(d, al, sig, hp)
    assert posterior_variance_reduction_check(d, al, sig, hp)
    if np.any(al != 1.0):
        assert sd < hp.b
    _, sd1 = kappa_posterior_params(d, np.ones(d.n), sig, hp)
    assert sd1 == hp.b


def tiny_data():
    return PairedDataset.from_arrays([600.0, 1700.0], [[655.0, 1880.0]])


def test_gibbs_deterministic_and_sigma_in_window():
    d = tiny_data()
    cfg = GibbsConfig(300, 100, rng=RngStream(4))
    e1, e2 = run_gibbs(d, HP, cfg), run_gibbs(d, HP, cfg)
    assert np.array_equal(e1.trace.kappa, e2.trace.kappa)
    assert np.array_equal(e1.trace.alpha, e2.trace.alpha)
    assert np.all((e1.trace.sigma > HP.theta1) & (e1.trace.sigma < HP.theta2))
    assert e1.kappa_mean == pytest.approx(e1.trace.kappa[100:].mean())
    assert np.allclose(e1.alpha_mean, e1.trace.alpha[100:].mean(axis=0))
    e3 = run_gibbs(d, HP, GibbsConfig(300, 100, rng=RngStream(5)))
    assert not np.array_equal(e1.trace.kappa, e3.trace.kappa)


def test_gibbs_prior_limit_when_alpha_pinned():
    rng = np.random.default_rng(0)
    x = rng.uniform(300, 3000, 10)
    d = PairedDataset.from_arrays(x, x + rng.normal(0, 20, (3, 10)))
    hp = Hyperparams(150.0, 50.0, 1.0, 1e-9, 1.0, 100.0)
    est = run_gibbs(d, hp, GibbsConfig(6000, 1000, rng=RngStream(2)))
    assert abs(est.kappa_mean - hp.a) < 4 * hp.b / math.sqrt(5000)


def test_gibbs_matches_joint_grid():
    d = tiny_data()
    hp = Hyperparams(150.0, 60.0, 1.0, 0.08, 5.0, 80.0)
    truth = joint_grid_means(d.x, d.ys[0], hp)
    est = run_gibbs(d, hp, GibbsConfig(40000, 2000, rng=RngStream(0)))
    k = est.trace.kept()
    got = [est.alpha_mean[0], est.kappa_mean, est.sigma_mean]
    ses = [batch_means_se(k.alpha[:, 0]), batch_means_se(k.kappa), batch_means_se(k.sigma)]
    for g, t, s in zip(got, truth, ses):
        assert abs(g - t) < 3 * s


def test_gibbs_chain_halves_agree(template_values):
    rng = np.random.default_rng(7)
    x = template_values
    al = rng.normal(1, 0.05, 20)
    ys = al[:, None] * x + 150 * (al - 1)[:, None] + rng.normal(0, 30, (20, x.size))
    est = run_gibbs(PairedDataset.from_arrays(x, ys), HP, GibbsConfig(6000, 1000, rng=RngStream(1)))
    k = est.trace.kept().kappa
    h1, h2 = k[: k.size // 2], k[k.size // 2:]
    se = math.hypot(batch_means_se(h1, 20), batch_means_se(h2, 20))
    assert abs(h1.mean() - h2.mean()) < 5 * se


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_gibbs_degenerate_errors():
    x = np.array([500.0, 1500.0])
    d = PairedDataset.from_arrays(x, [x + 1.0])
    hp = Hyperparams(0.0, 1.0, 1.0, 1e-200, 1.0, 100.0)
    with pytest.raises(DegeneratePosteriorError, match="iteration 1"):
        run_gibbs(d, hp, GibbsConfig(5, 1))
    big = PairedDataset.from_arrays(x, [x * 1e200])
    with pytest.raises(DegeneratePosteriorError, match="iteration"):
        run_gibbs(big, Hyperparams(0.0, 1e200, 1.0, 1e200, 1.0, 100.0), GibbsConfig(5, 1))


def test_trace_roundtrip(tmp_path):
    est = run_gibbs(tiny_data(), HP, GibbsConfig(50, 10, rng=RngStream(3)))
    p = tmp_path / "trace.csv"
    write_trace_csv(est.trace, p, stamp="invocation: test")
    lines = p.read_text().splitlines()
    assert lines[0].startswith("#") and lines[1] == "iter,alpha_1,kappa,sigma"
    back = read_trace_csv(p, burn_in=10)
    assert np.array_equal(back.kappa, est.trace.kappa) and np.array_equal(back.alpha, est.trace.alpha)
