"""Deterministic numeric kernels shared across the package.

Seeded random streams, symmetric eigendecomposition, modified Bessel
functions, von Mises fitting, adaptive quadrature, and origin-constrained
least squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EPS_EIG = 1e-10
TAU_CAP = 1e4

# Fixed spawn-key tags so every consumer of a seed derives a disjoint
# substream.  Positional assignment keeps parallel runs equal to serial ones.
TAG_SAMPLE = 11
TAG_EMBED = 12
TAG_DANCO = 21
TAG_WASSERSTEIN = 22


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 generator for (seed, key...).

    Identical arguments give a bit-identical draw sequence on every
    platform; distinct key paths give streams safe to consume concurrently.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def fold_seed(seed: int, *key: int) -> int:
    """Collapse (seed, key...) into a single 64-bit seed, deterministically."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class RngStream:
    """A single-owner random stream addressed by (seed, stream_id).

    Stream ids index independent units of work (replicates, tasks); two
    streams with different ids never need coordination.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return substream(self.seed, self.stream_id)

    def child(self, *key: int) -> np.random.Generator:
        return substream(self.seed, self.stream_id, *key)


@dataclass
class EigenSpectrum:
    """Full spectrum of a symmetric matrix, eigenvalues descending."""

    values: np.ndarray
    vectors: np.ndarray | None = None


def sym_eigen(a, with_vectors: bool = True) -> EigenSpectrum:
    """Eigendecomposition of a symmetric real matrix.

    Args:
        a: square matrix, symmetric within 1e-12 relative tolerance.
        with_vectors: also return the orthonormal eigenvector columns.

    Returns:
        EigenSpectrum with values sorted non-increasing.  Eigenvector
        signs are fixed (largest-magnitude component positive) so the
        output is deterministic.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    scale = float(np.max(np.abs(a)))
    if np.max(np.abs(a - a.T)) > 1e-12 * max(scale, 1.0):
        raise ValueError("matrix is not symmetric")
    sym = 0.5 * (a + a.T)
    if with_vectors:
        vals, vecs = np.linalg.eigh(sym)
        vals = vals[::-1].copy()
        vecs = vecs[:, ::-1].copy()
        # sign convention: largest-|entry| component of each column positive
        anchor = np.argmax(np.abs(vecs), axis=0)
        signs = np.sign(vecs[anchor, np.arange(vecs.shape[1])])
        signs[signs == 0] = 1.0
        vecs *= signs
        return EigenSpectrum(values=vals, vectors=vecs)
    vals = np.linalg.eigvalsh(sym)[::-1].copy()
    return EigenSpectrum(values=vals, vectors=None)


def _i0_series(x):
    # power series sum_k (x^2/4)^k / (k!)^2 ; all terms positive
    out = np.ones_like(x)
    term = np.ones_like(x)
    q = 0.25 * x * x
    for k in range(1, 80):
        term = term * q / (k * k)
        out = out + term
        if np.all(term <= 1e-17 * out):
            break
    return out


def _i0_asymptotic(x):
    # I0(x) ~ e^x / sqrt(2 pi x) * sum_k prod_j (2j-1)^2 / (k! (8x)^k)
    s = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(1, 40):
        term = term * (2 * k - 1) ** 2 / (8.0 * k * x)
        s = s + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(s)):
            break
    return np.exp(x) / np.sqrt(2 * np.pi * x) * s


def bessel_i0(x):
    """Modified Bessel function I0 for x >= 0, relative error <= 1e-10.

    Power series below 15, asymptotic expansion above.  Accepts scalars
    or arrays.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("bessel_i0 requires finite x >= 0")
    out = np.empty_like(arr)
    small = arr < 15.0
    if np.any(small):
        out[small] = _i0_series(arr[small])
    if np.any(~small):
        out[~small] = _i0_asymptotic(arr[~small])
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def log_bessel_i0(x):
    """log I0(x), overflow-safe for large x."""
    arr = np.asarray(x, dtype=float)
    out = np.empty_like(arr)
    small = arr < 15.0
    if np.any(small):
        out[small] = np.log(_i0_series(arr[small]))
    if np.any(~small):
        big = arr[~small]
        s = np.ones_like(big)
        term = np.ones_like(big)
        for k in range(1, 40):
            term = term * (2 * k - 1) ** 2 / (8.0 * k * big)
            s = s + term
            if np.all(np.abs(term) <= 1e-17 * np.abs(s)):
                break
        out[~small] = big - 0.5 * np.log(2 * np.pi * big) + np.log(s)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def _i1_asymptotic_factor(x):
    # I1(x) * sqrt(2 pi x) / e^x : terms prod_j (4 - (2j-1)^2) / (k! (8x)^k)
    s = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(1, 40):
        term = term * (4.0 - (2 * k - 1) ** 2) / (8.0 * k * x)
        s = s + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(s)):
            break
    return s


def bessel_i1(x):
    """Modified Bessel function I1 for x >= 0 (needed for the ratio A = I1/I0)."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("bessel_i1 requires finite x >= 0")
    out = np.empty_like(arr)
    small = arr < 15.0
    if np.any(small):
        xs = arr[small]
        q = 0.25 * xs * xs
        term = 0.5 * xs
        acc = term.copy()
        for k in range(1, 80):
            term = term * q / (k * (k + 1))
            acc = acc + term
            if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(acc), 1e-300)):
                break
        out[small] = acc
    if np.any(~small):
        xb = arr[~small]
        out[~small] = np.exp(xb) / np.sqrt(2 * np.pi * xb) * _i1_asymptotic_factor(xb)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def _mean_resultant_ratio(tau):
    # A(tau) = I1(tau)/I0(tau), via log-space above 15 to dodge exp overflow
    tau = np.asarray(tau, dtype=float)
    out = np.zeros_like(tau)
    small = (tau > 0) & (tau < 15.0)
    big = tau >= 15.0
    if np.any(small):
        t = tau[small]
        out[small] = bessel_i1(t) / bessel_i0(t)
    if np.any(big):
        t = tau[big]
        log_i1 = t - 0.5 * np.log(2 * np.pi * t) + np.log(_i1_asymptotic_factor(t))
        out[big] = np.exp(log_i1 - log_bessel_i0(t))
    return out


def tau_from_resultant(rbar):
    """Solve A(tau) = I1(tau)/I0(tau) = rbar for the concentration tau.

    Newton iteration to 1e-10; tau capped at 1e4 as rbar approaches 1.
    Vectorized over arrays.
    """
    r = np.atleast_1d(np.asarray(rbar, dtype=float))
    r = np.clip(r, 0.0, 1.0)
    tau = np.empty_like(r)
    # Banerjee-style starting points, then Newton
    lo = r < 0.53
    mid = (~lo) & (r < 0.85)
    hi = ~(lo | mid)
    tau[lo] = 2 * r[lo] + r[lo] ** 3 + 5 * r[lo] ** 5 / 6
    tau[mid] = -0.4 + 1.39 * r[mid] + 0.43 / (1 - r[mid] + 1e-12)
    tau[hi] = 1.0 / np.maximum(r[hi] ** 3 - 4 * r[hi] ** 2 + 3 * r[hi], 1e-12)
    tau = np.clip(tau, 0.0, TAU_CAP)
    for _ in range(100):
        a = _mean_resultant_ratio(tau)
        # A'(tau) = 1 - A/tau - A^2 ; limit 1/2 at tau = 0
        with np.errstate(divide="ignore", invalid="ignore"):
            da = np.where(tau > 1e-8, 1.0 - a / np.where(tau > 0, tau, 1.0) - a * a, 0.5)
        da = np.maximum(da, 1e-14)
        step = (a - r) / da
        tau = np.clip(tau - step, 0.0, TAU_CAP)
        if np.all(np.abs(step) <= 1e-10 * np.maximum(1.0, tau)):
            break
    tau[r >= 1.0 - 1e-12] = TAU_CAP
    return tau if np.asarray(rbar).ndim else float(tau[0])


@dataclass
class VonMisesFit:
    """Fitted circular location nu in (-pi, pi] and concentration tau >= 0."""

    nu: float
    tau: float


def fit_von_mises(angles) -> VonMisesFit:
    """Fit a von Mises distribution to a sample of angles (radians).

    nu is the circular mean; tau solves I1(tau)/I0(tau) = mean resultant
    length, by Newton iteration (tolerance 1e-10, capped at 1e4).
    """
    arr = np.asarray(angles, dtype=float).ravel()
    if arr.size < 2:
        raise ValueError("need at least 2 angles")
    c = float(np.cos(arr).mean())
    s = float(np.sin(arr).mean())
    nu = math.atan2(s, c)
    if nu <= -math.pi:
        nu += 2 * math.pi
    rbar = math.hypot(c, s)
    return VonMisesFit(nu=nu, tau=float(tau_from_resultant(rbar)))


def quad_1d(f, a: float, b: float, tol: float = 1e-9) -> float:
    """Adaptive Simpson quadrature on (a, b) to absolute tolerance.

    Endpoints are approached with a 1e-12 offset so integrable endpoint
    singularities never get evaluated at a or b exactly.  Raises after
    1e6 interval subdivisions.
    """
    a = float(a) + 1e-12
    b = float(b) - 1e-12
    if not b > a:
        raise ValueError("empty integration interval")

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = simpson(a, b, fa, fm, fb)
    stack = [(a, b, fa, fm, fb, whole, tol)]
    total = 0.0
    splits = 0
    while stack:
        x0, x2, f0, f1, f2, s, eps = stack.pop()
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl, fr = f(xl), f(xr)
        left = simpson(x0, xm, f0, fl, f1)
        right = simpson(xm, x2, f1, fr, f2)
        if abs(left + right - s) <= 15.0 * eps or (x2 - x0) < 1e-14:
            total += left + right + (left + right - s) / 15.0
            continue
        splits += 1
        if splits > 1_000_000:
            raise RuntimeError("quad_1d did not converge within 1e6 subdivisions")
        stack.append((x0, xm, f0, fl, f1, left, eps / 2.0))
        stack.append((xm, x2, f1, fr, f2, right, eps / 2.0))
    return total


def ls_through_origin(xs, ys) -> float:
    """Least-squares slope of y on x with no intercept: sum(xy)/sum(x^2)."""
    x = np.asarray(xs, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    if x.size != y.size or x.size < 1:
        raise ValueError("xs and ys must have equal length >= 1")
    sxx = float(np.dot(x, x))
    if sxx <= 0.0:
        raise ValueError("all-zero predictors")
    return float(np.dot(x, y) / sxx)


def sample_beta(stream, a: float, b: float, size=None):
    """Beta(a, b) draws via the Gamma-ratio construction X/(X+Y).

    `stream` may be an RngStream or a numpy Generator.  Deterministic per
    stream.
    """
    if a <= 0 or b <= 0:
        raise ValueError("beta shapes must be positive")
    rng = stream.generator() if isinstance(stream, RngStream) else stream
    g1 = rng.standard_gamma(a, size=size)
    g2 = rng.standard_gamma(b, size=size)
    denom = g1 + g2
    if size is None:
        return float(g1 / denom) if denom > 0 else 0.5
    out = np.where(denom > 0, g1 / np.where(denom > 0, denom, 1.0), 0.5)
    return out
