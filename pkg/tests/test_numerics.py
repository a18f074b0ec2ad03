import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dimlab.numerics import (
    RngStream,
    bessel_i0,
    bessel_i1,
    fit_von_mises,
    ls_through_origin,
    quad_1d,
    sample_beta,
    substream,
    sym_eigen,
    tau_from_resultant,
)

mpmath.mp.dps = 50


# ---------------------------------------------------------------------------
# sym_eigen


def sturm_eigenvalues(a, tol=1e-12):
    """Independent eigenvalue oracle: Householder tridiagonalization followed
    by bisection on Sturm sign counts."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    # Householder reduction to tridiagonal form
    for k in range(n - 2):
        x = a[k + 1:, k].copy()
        alpha = -np.sign(x[0]) * np.linalg.norm(x) if x[0] != 0 else -np.linalg.norm(x)
        if alpha == 0:
            continue
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        h = np.eye(n - k - 1) - 2.0 * np.outer(v, v)
        full = np.eye(n)
        full[k + 1:, k + 1:] = h
        a = full @ a @ full
    d = np.diag(a).copy()
    e = np.diag(a, 1).copy()

    def count_below(x):
        # number of eigenvalues < x via Sturm sequence sign agreement
        count = 0
        q = d[0] - x
        if q < 0:
            count += 1
        for i in range(1, n):
            off = e[i - 1] if abs(e[i - 1]) > 1e-300 else 1e-300
            q = d[i] - x - off * off / (q if q != 0 else 1e-300)
            if q < 0:
                count += 1
        return count

    radius = np.abs(d).max() + 2 * np.abs(e).max() if n > 1 else abs(d[0])
    eigs = []
    for idx in range(n):
        lo, hi = -radius - 1, radius + 1
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if count_below(mid) <= idx:
                lo = mid
            else:
                hi = mid
        eigs.append(0.5 * (lo + hi))
    return np.array(eigs)[::-1]  # descending


def test_identity_spectrum():
    spec = sym_eigen(np.eye(3))
    assert np.allclose(spec.values, [1.0, 1.0, 1.0])


def test_rotated_diag_2x2():
    theta = math.radians(30)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    a = rot @ np.diag([4.0, 1.0]) @ rot.T
    spec = sym_eigen(a)
    assert np.allclose(spec.values, [4.0, 1.0], atol=1e-12)
    # eigenvectors are the rotation columns up to sign
    for j in range(2):
        dots = np.abs(rot.T @ spec.vectors[:, j])
        assert dots.max() > 1 - 1e-12


def test_random_symmetric_matches_sturm_oracle():
    rng = np.random.default_rng(42)
    g = rng.standard_normal((10, 10))
    a = 0.5 * (g + g.T)
    spec = sym_eigen(a)
    oracle = sturm_eigenvalues(a)
    assert np.max(np.abs(spec.values - oracle)) < 1e-9


def test_trace_orthonormality_reconstruction():
    rng = np.random.default_rng(7)
    for n in (2, 5, 17):
        g = rng.standard_normal((n, n))
        a = 0.5 * (g + g.T)
        spec = sym_eigen(a)
        assert abs(spec.values.sum() - np.trace(a)) <= 1e-9 * max(1, abs(np.trace(a)))
        q = spec.vectors
        assert np.max(np.abs(q.T @ q - np.eye(n))) <= 1e-10
        recon = q @ np.diag(spec.values) @ q.T
        assert np.max(np.abs(a - recon)) <= 1e-10 * max(1.0, np.max(np.abs(a)))


def test_rejects_asymmetric_and_nonfinite():
    with pytest.raises(ValueError):
        sym_eigen(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        sym_eigen(np.array([[np.inf, 0.0], [0.0, 1.0]]))


# ---------------------------------------------------------------------------
# Bessel functions


def test_i0_anchor_values():
    assert bessel_i0(0.0) == 1.0
    assert abs(bessel_i0(1.0) - 1.2660658777520) < 1e-12
    assert abs(bessel_i0(10.0) - 2815.7166284662544) < 1e-9 * 2815.7


def test_i0_i1_against_mpmath():
    xs = np.concatenate([np.linspace(0, 14.9, 31), np.linspace(15.0, 120.0, 31)])
    for x in xs:
        ref0 = float(mpmath.besseli(0, mpmath.mpf(float(x))))
        ref1 = float(mpmath.besseli(1, mpmath.mpf(float(x))))
        assert abs(bessel_i0(x) - ref0) <= 1e-10 * max(ref0, 1.0)
        assert abs(bessel_i1(x) - ref1) <= 1e-10 * max(ref1, 1.0)


def test_i0_rejects_negative():
    with pytest.raises(ValueError):
        bessel_i0(-1.0)


# ---------------------------------------------------------------------------
# von Mises fitting


def test_equal_angles_hit_cap():
    fit = fit_von_mises([0.7] * 5)
    assert abs(fit.nu - 0.7) < 1e-9
    assert fit.tau == pytest.approx(1e4)


def test_uniform_grid_gives_zero_concentration():
    grid = np.linspace(-np.pi, np.pi, 2001, endpoint=False) + np.pi / 2001
    fit = fit_von_mises(grid)
    assert fit.tau <= 1e-6


def test_fit_matches_likelihood_maximization_oracle():
    rng = np.random.default_rng(11)
    angles = rng.vonmises(mu=0.8, kappa=4.0, size=20)
    fit = fit_von_mises(angles)
    # oracle: exact circular mean, then a ternary search on the likelihood
    # itself (mpmath I0), independent of the Newton solve on I1/I0
    c, s = np.cos(angles).mean(), np.sin(angles).mean()
    nu = math.atan2(s, c)
    cos_sum = float(np.cos(angles - nu).sum())
    n = angles.size

    def negloglik(tau):
        return -(tau * cos_sum - n * float(mpmath.log(mpmath.besseli(0, tau))))

    lo, hi = 0.0, 100.0
    for _ in range(120):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if negloglik(m1) < negloglik(m2):
            hi = m2
        else:
            lo = m1
    tau_oracle = 0.5 * (lo + hi)
    assert abs(fit.nu - nu) < 1e-12
    assert abs(fit.tau - tau_oracle) < 1e-6


def test_fit_needs_two_angles():
    with pytest.raises(ValueError):
        fit_von_mises([0.3])


@settings(max_examples=25, deadline=None)
@given(st.floats(-3.0, 3.0))
def test_rotation_equivariance(delta):
    base = np.array([0.1, 0.5, -0.4, 1.2, 2.0, -2.5, 0.9])
    f0 = fit_von_mises(base)
    f1 = fit_von_mises((base + delta + np.pi) % (2 * np.pi) - np.pi)
    diff = (f1.nu - f0.nu - delta + np.pi) % (2 * np.pi) - np.pi
    assert abs(diff) < 1e-9
    assert abs(f1.tau - f0.tau) < 1e-9


def test_tau_from_resultant_monotone():
    taus = tau_from_resultant(np.array([0.0, 0.2, 0.5, 0.8, 0.95]))
    assert np.all(np.diff(taus) > 0)


# ---------------------------------------------------------------------------
# quadrature


def test_quad_constant():
    assert quad_1d(lambda x: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-9)


def test_quad_normalized_ratio_density():
    d, K = 5, 10

    def f(r):
        return K * d * r ** (d - 1) * (1 - r**d) ** (K - 1)

    assert quad_1d(f, 0.0, 1.0) == pytest.approx(1.0, abs=1e-8)


def test_quad_kl_matches_midpoint_oracle():
    def fnorm(r, d, K=10):
        return K * d * r ** (d - 1) * (1 - r**d) ** (K - 1)

    def f(r):
        p = fnorm(r, 5)
        q = fnorm(r, 3)
        return p * math.log(p / q) if p > 0 else 0.0

    r = (np.arange(1_000_000) + 0.5) / 1_000_000
    p = fnorm(r, 5)
    q = fnorm(r, 3)
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = np.where(p > 0, p * np.log(p / q), 0.0)
    oracle = integrand.mean()
    assert quad_1d(f, 0.0, 1.0) == pytest.approx(oracle, abs=1e-6)


# ---------------------------------------------------------------------------
# least squares through the origin


def test_ls_trivial_cases():
    assert ls_through_origin([1, 2], [2, 4]) == pytest.approx(2.0)
    assert ls_through_origin([1], [3]) == pytest.approx(3.0)


def test_ls_rejects_zero_predictors():
    with pytest.raises(ValueError):
        ls_through_origin([0.0, 0.0], [1.0, 2.0])


def test_ls_noisy_fixture_matches_extended_precision():
    rng = np.random.default_rng(5)
    x = rng.uniform(0.1, 3.0, size=50)
    y = 1.7 * x + rng.normal(0, 0.05, size=50)
    num = mpmath.fsum(mpmath.mpf(float(a)) * mpmath.mpf(float(b)) for a, b in zip(x, y))
    den = mpmath.fsum(mpmath.mpf(float(a)) ** 2 for a in x)
    assert ls_through_origin(x, y) == pytest.approx(float(num / den), abs=1e-12)


# ---------------------------------------------------------------------------
# beta sampling and streams


def test_beta_uniform_case_ks():
    from scipy import stats

    draws = sample_beta(RngStream(seed=3, stream_id=0).generator(), 1.0, 1.0,
                        size=10_000)
    assert stats.kstest(draws, "uniform").pvalue > 0.01


def test_beta_means():
    rng = substream(9)
    sym = sample_beta(rng, 2.0, 2.0, size=100_000)
    assert abs(sym.mean() - 0.5) < 0.005
    rng = substream(10)
    skew = sample_beta(rng, 0.5, 3.0, size=100_000)
    assert abs(skew.mean() - 0.5 / 3.5) < 0.005


def test_beta_rejects_bad_shapes():
    with pytest.raises(ValueError):
        sample_beta(substream(0), 0.0, 1.0)


def test_stream_determinism_and_independence():
    a = RngStream(seed=123, stream_id=7).generator().standard_normal(64)
    b = RngStream(seed=123, stream_id=7).generator().standard_normal(64)
    c = RngStream(seed=123, stream_id=8).generator().standard_normal(64)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
