"""The eight manifold dimension estimators.

Every estimator maps a point cloud (plus a configuration) to an
EstimateReport holding the global estimate, per-point local estimates
where the method produces them, and drop/skip diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import as_points
from .neighbors import NeighborSet, NeighborTable, knn_all
from .numerics import (
    TAG_DANCO,
    TAG_WASSERSTEIN,
    EigenSpectrum,
    log_bessel_i0,
    quad_1d,
    ls_through_origin,
    substream,
    tau_from_resultant,
)
from .transport import w1_empirical

METHODS = ("local_pca", "mada", "mle", "danco", "tle", "twonn", "ca_pca",
           "wasserstein")
K_METHODS = ("local_pca", "mada", "mle", "danco", "tle", "ca_pca")


@dataclass(frozen=True)
class DancoOptions:
    """Knobs specific to the angle/norm-concentration estimator."""

    d_max: int | None = None          # default min(p, 30)
    n_sim_reps: int = 1
    skip_threshold: int | None = None
    density_form: str = "corrected"   # "corrected" | "as_printed"


@dataclass(frozen=True)
class EstimatorConfig:
    method: str
    K: int | None = None
    alpha: float = 5.0
    splits: int = 10
    ground_metric: str = "l1"
    aggregation: str = "mean"         # "mean" | "vote" (mada)
    bias_corrected: bool = False      # mle: divisor K-1 instead of K
    seed: int = 0
    danco: DancoOptions = field(default_factory=DancoOptions)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.alpha <= 1:
            raise ValueError("alpha must exceed 1")
        if self.splits < 1:
            raise ValueError("splits must be >= 1")


@dataclass
class EstimateReport:
    d_hat: float
    method: str
    locals: np.ndarray | None = None
    config: EstimatorConfig | None = None
    diagnostics: dict = field(default_factory=dict)


def _resolved_k(cfg: EstimatorConfig, n: int) -> int:
    k = cfg.K if cfg.K is not None else (10 if cfg.method == "danco" else None)
    if k is None:
        raise ValueError(f"{cfg.method} needs a neighborhood size K")
    if not 2 <= k <= n - 1:
        raise ValueError(f"K must be in [2, {n - 1}]")
    return int(k)


def _neighbor_arrays(X, K, neighbors):
    if neighbors is None:
        neighbors = knn_all(X, K)
    if neighbors.k < K:
        raise ValueError("precomputed neighbor table is too narrow")
    if neighbors.k > K:
        neighbors = neighbors.truncated(K)
    return neighbors.indices, neighbors.distances


def _finish(locals_, method, cfg, diagnostics):
    kept = locals_[np.isfinite(locals_)]
    dropped = int(locals_.size - kept.size)
    if dropped:
        diagnostics["dropped_locals"] = diagnostics.get("dropped_locals", 0) + dropped
    if kept.size == 0:
        raise ValueError(f"{method}: every local estimate was dropped")
    return EstimateReport(d_hat=float(np.mean(kept)), method=method,
                          locals=locals_, config=cfg, diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# local covariance spectra (shared by local_pca and ca_pca)

def _local_spectra(X, idx, include_center: bool = False):
    """Eigenvalues (descending) of each neighborhood covariance.

    The PCA estimators work on the K neighbors alone, centered at their
    own mean with divisor K; include_center adds the center point to the
    block (divisor stays K).  Values below zero are rounding artifacts of
    a PSD matrix and are clamped.
    """
    K = idx.shape[1]
    block = X[idx]  # (n, K, p)
    if include_center:
        block = np.concatenate([X[:, None, :], block], axis=1)
    centered = block - block.mean(axis=1, keepdims=True)
    cov = np.einsum("nkp,nkq->npq", centered, centered) / K
    vals = np.linalg.eigvalsh(cov)[:, ::-1]
    return np.clip(vals, 0.0, None)


def local_cov_spectrum(ns: NeighborSet, cloud) -> EigenSpectrum:
    """Spectrum of one neighborhood's covariance over center + K neighbors.

    The block mean is over all K+1 points and the divisor is K.
    """
    X = as_points(cloud)
    idx = np.asarray(ns.indices, dtype=np.int64)[None, :]
    vals = _local_spectra(X, idx, include_center=True)[0]
    return EigenSpectrum(values=vals, vectors=None)


def pca_threshold_dim(spectrum: EigenSpectrum) -> int:
    """Largest index whose eigenvalue exceeds 5% of the leading one."""
    vals = np.asarray(spectrum.values, dtype=float)
    if vals[0] <= 0:
        raise ValueError("leading eigenvalue must be positive")
    return int(np.sum(vals > 0.05 * vals[0]))


def estimate_local_pca(cloud, cfg: EstimatorConfig, neighbors=None) -> EstimateReport:
    """Threshold-rule PCA dimension, averaged over every neighborhood."""
    X = as_points(cloud)
    K = _resolved_k(cfg, X.shape[0])
    idx, _ = _neighbor_arrays(X, K, neighbors)
    vals = _local_spectra(X, idx)
    lead = vals[:, :1]
    if np.any(lead <= 0):
        bad = lead[:, 0] <= 0
        if np.all(bad):
            raise ValueError("degenerate cloud: all neighborhoods are a single point")
        locals_ = np.where(bad, np.nan, np.sum(vals > 0.05 * lead, axis=1))
    else:
        locals_ = np.sum(vals > 0.05 * lead, axis=1).astype(float)
    return _finish(np.asarray(locals_, dtype=float), "local_pca", cfg, {})


# ---------------------------------------------------------------------------
# curvature-adjusted PCA

def _capca_q_batch(vals, R):
    """argmin-q selection for each row of eigenvalues (descending)."""
    lam = vals / (R * R)[:, None]
    n, p = lam.shape
    prefix = np.cumsum(lam, axis=1)
    prefix_sq = np.cumsum(lam * lam, axis=1)
    total = prefix[:, -1:]
    objective = np.empty((n, p))
    for q in range(1, p + 1):
        tail = total[:, 0] - prefix[:, q - 1]
        target = 1.0 / (q + 2) - (3.0 * q + 4.0) / (q * (q + 4.0)) * tail
        sq = (q * target * target
              - 2.0 * target * prefix[:, q - 1]
              + prefix_sq[:, q - 1])
        objective[:, q - 1] = np.sqrt(np.maximum(sq, 0.0)) + 2.0 * tail
    return np.argmin(objective, axis=1) + 1  # first minimum wins -> smaller q


def capca_select_q(spectrum: EigenSpectrum, R: float, p: int) -> int:
    """Single-neighborhood dimension choice under the quadratic correction.

    Scans q = 1..p of the penalized eigenvalue-profile objective; ties go
    to the smaller q.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    vals = np.asarray(spectrum.values, dtype=float)[:p]
    if vals.size < p:
        vals = np.pad(vals, (0, p - vals.size))
    return int(_capca_q_batch(vals[None, :], np.array([R]))[0])


def estimate_ca_pca(cloud, cfg: EstimatorConfig, neighbors=None) -> EstimateReport:
    """Curvature-adjusted PCA, averaged over neighborhoods.

    The local ball radius is taken as the mean of the distances to the
    K-th and (K-1)-th neighbors.
    """
    X = as_points(cloud)
    K = _resolved_k(cfg, X.shape[0])
    idx, dist = _neighbor_arrays(X, K, neighbors)
    vals = _local_spectra(X, idx)
    R = 0.5 * (dist[:, K - 1] + dist[:, K - 2])
    good = R > 0
    locals_ = np.full(X.shape[0], np.nan)
    if np.any(good):
        locals_[good] = _capca_q_batch(vals[good], R[good]).astype(float)
    return _finish(locals_, "ca_pca", cfg, {})


# ---------------------------------------------------------------------------
# two-radius estimator

def estimate_mada(cloud, cfg: EstimatorConfig, neighbors=None) -> EstimateReport:
    """Two-radius volume-growth estimator with radii at ceil(K/2) and K."""
    X = as_points(cloud)
    K = _resolved_k(cfg, X.shape[0])
    _, dist = _neighbor_arrays(X, K, neighbors)
    l1 = math.ceil(K / 2)
    r1 = dist[:, l1 - 1]
    r2 = dist[:, K - 1]
    valid = (r1 > 0) & (r2 > r1)
    locals_ = np.full(X.shape[0], np.nan)
    locals_[valid] = math.log(2.0) / (np.log(r2[valid]) - np.log(r1[valid]))
    diagnostics = {"equal_radii": int(np.sum(~valid))}
    report = _finish(locals_, "mada", cfg, diagnostics)
    if cfg.aggregation == "vote":
        kept = locals_[np.isfinite(locals_)]
        rounded = np.rint(kept).astype(int)
        counts = np.bincount(rounded - rounded.min())
        report.d_hat = float(rounded.min() + int(np.argmax(counts)))
        report.diagnostics["aggregation"] = "vote"
    return report


# ---------------------------------------------------------------------------
# inverse mean-log estimator

def estimate_mle(cloud, cfg: EstimatorConfig, neighbors=None) -> EstimateReport:
    """Poisson-rate maximum-likelihood local dimension, averaged globally.

    The divisor is K with the K-th (zero) log term included;
    bias_corrected switches to the K-1 divisor.  Zero-distance neighbors
    are dropped from the sum and counted.
    """
    X = as_points(cloud)
    K = _resolved_k(cfg, X.shape[0])
    _, dist = _neighbor_arrays(X, K, neighbors)
    R = dist[:, K - 1]
    positive = dist > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(positive, np.log(R[:, None]) - np.log(np.where(positive, dist, 1.0)), 0.0)
    sums = logs.sum(axis=1)
    valid = (R > 0) & (sums > 0)
    divisor = (K - 1) if cfg.bias_corrected else K
    locals_ = np.full(X.shape[0], np.nan)
    locals_[valid] = divisor / sums[valid]
    diagnostics = {"zero_distance_neighbors": int(np.sum(~positive))}
    return _finish(locals_, "mle", cfg, diagnostics)


# ---------------------------------------------------------------------------
# tight-locality estimator

def _tle_locals(X, idx, dist, chunk=64):
    """Per-point tight-locality estimates from pairwise chord radii.

    Everything reduces to the neighborhood Gram matrix of the centered
    neighbor offsets.  Pairs whose chord radius is non-positive are
    skipped; a point is dropped when more than half of its log terms are
    skipped.
    """
    n, K = idx.shape
    R = dist[:, K - 1]
    locals_ = np.full(n, np.nan)
    skipped_total = 0
    eye = np.eye(K, dtype=bool)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        A = X[idx[start:stop]] - X[start:stop, None, :]       # (B, K, p)
        G = np.einsum("bkp,blp->bkl", A, A)                    # (B, K, K)
        g = np.einsum("bkk->bk", G)                            # squared norms
        Rb = R[start:stop]
        R2 = (Rb * Rb)[:, None]
        den = R2 - g                                           # (B, K), >= 0
        boundary = den <= 1e-9 * np.maximum(R2, 1e-300)
        ratio = np.where(boundary, 0.0, 1.0 / np.where(boundary, 1.0, den))
        Rcol = Rb[:, None, None]
        gv = g[:, :, None]
        gw = g[:, None, :]
        rv = ratio[:, :, None]
        # interior branch
        uxv = -Rcol * (G - gv) * rv
        uwv = Rcol * (gv + gw - 2.0 * G) * rv
        d_main = np.sqrt(np.maximum(uxv * uxv + Rcol * uwv, 0.0)) - uxv
        uxv_r = Rcol * (G + gv) * rv
        uwv_r = Rcol * (gv + gw + 2.0 * G) * rv
        d_refl = np.sqrt(np.maximum(uxv_r * uxv_r + Rcol * uwv_r, 0.0)) - uxv_r
        # boundary branch: v exactly at radius R
        with np.errstate(divide="ignore", invalid="ignore"):
            bd_main = Rcol * (gv + gw - 2.0 * G) / (2.0 * (gv - G))
            bd_refl = Rcol * (gv + gw + 2.0 * G) / (2.0 * (gv + G))
        on_edge = np.broadcast_to(boundary[:, :, None], G.shape)
        d_main = np.where(on_edge, bd_main, d_main)
        d_refl = np.where(on_edge, bd_refl, d_refl)
        pair_ok = ~np.broadcast_to(eye, G.shape)
        ok_main = pair_ok & np.isfinite(d_main) & (d_main > 0)
        ok_refl = pair_ok & np.isfinite(d_refl) & (d_refl > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            lm = np.where(ok_main, np.log(np.where(ok_main, d_main, 1.0) / Rcol), 0.0)
            lr = np.where(ok_refl, np.log(np.where(ok_refl, d_refl, 1.0) / Rcol), 0.0)
        counts = ok_main.sum(axis=(1, 2)) + ok_refl.sum(axis=(1, 2))
        sums = lm.sum(axis=(1, 2)) + lr.sum(axis=(1, 2))
        full = 2 * K * (K - 1)
        skipped = full - counts
        skipped_total += int(skipped.sum())
        usable = (counts > 0) & (skipped <= full // 2) & (Rb > 0)
        mean_terms = np.where(usable, sums / np.maximum(counts, 1), np.nan)
        vals = -1.0 / mean_terms
        vals[~(np.isfinite(vals) & (vals > 0))] = np.nan
        locals_[start:stop] = vals
    return locals_, skipped_total


def estimate_tle(cloud, cfg: EstimatorConfig, neighbors=None) -> EstimateReport:
    """Tight-locality estimator: log chord-radius ratios over neighbor pairs."""
    X = as_points(cloud)
    K = _resolved_k(cfg, X.shape[0])
    idx, dist = _neighbor_arrays(X, K, neighbors)
    locals_, skipped = _tle_locals(X, idx, dist)
    return _finish(locals_, "tle", cfg, {"skipped_terms": skipped})


# ---------------------------------------------------------------------------
# two-nearest-neighbor estimator

def estimate_twonn(cloud, cfg: EstimatorConfig | None = None,
                   neighbors=None) -> EstimateReport:
    """Parameter-free estimator from the ratio of the two nearest neighbors.

    Sorted ratios get empirical CDF i/n; the top point (CDF 1) is dropped
    and the slope of -log(1 - F) on log(ratio) through the origin is the
    estimate.
    """
    cfg = cfg or EstimatorConfig(method="twonn")
    X = as_points(cloud)
    if X.shape[0] < 3:
        raise ValueError("need at least 3 points")
    _, dist = _neighbor_arrays(X, 2, neighbors)
    r1, r2 = dist[:, 0], dist[:, 1]
    usable = r1 > 0
    dropped = int(np.sum(~usable))
    mu = np.sort(r2[usable] / r1[usable])
    m = mu.size
    if m < 2:
        raise ValueError("fewer than 2 usable ratio points")
    F = np.arange(1, m + 1) / m
    keep = F < 1.0
    x = np.log(mu[keep])
    y = -np.log(1.0 - F[keep])
    d_hat = ls_through_origin(x, y)
    return EstimateReport(d_hat=float(d_hat), method="twonn", locals=None,
                          config=cfg,
                          diagnostics={"dropped_points": dropped,
                                       "fit_points": int(keep.sum())})


# ---------------------------------------------------------------------------
# angle/norm concentration estimator

def _norm_density_loglik(ratios, K, d_grid, density_form):
    """Log-likelihood of the min/max distance ratio density on a d grid."""
    r = np.clip(np.asarray(ratios, dtype=float), 1e-300, 1.0 - 1e-12)
    log_r = np.log(r)
    sum_log_r = float(log_r.sum())
    n = r.size
    out = np.empty(len(d_grid))
    for i, dd in enumerate(d_grid):
        if density_form == "corrected":
            tail = np.log1p(-np.exp(dd * log_r)).sum()
        elif density_form == "as_printed":
            if dd == 1:
                out[i] = -np.inf  # exponent collapses the density
                continue
            tail = np.log1p(-np.exp((dd - 1) * log_r)).sum()
        else:
            raise ValueError(f"unknown density_form {density_form!r}")
        out[i] = n * math.log(K * dd) + (dd - 1) * sum_log_r + (K - 1) * tail
    return out


def danco_norm_mle(ratios, K: int, d_max: int, density_form: str = "corrected") -> int:
    """Integer d in 1..d_max maximizing the ratio-density likelihood."""
    r = np.asarray(ratios, dtype=float).ravel()
    if r.size == 0:
        raise ValueError("no ratios")
    if np.any(r <= 0) or np.any(r > 1):
        raise ValueError("ratios must lie in (0, 1]")
    grid = np.arange(1, d_max + 1)
    loglik = _norm_density_loglik(r, K, grid, density_form)
    return int(grid[int(np.argmax(loglik))])


def norm_density(r, d, K, density_form="corrected"):
    """Density of the min/max neighbor-distance ratio at radius fraction r."""
    r = np.asarray(r, dtype=float)
    if density_form == "corrected":
        return K * d * r ** (d - 1) * (1 - r**d) ** (K - 1)
    return K * d * r ** (d - 1) * (1 - r ** (d - 1)) ** (K - 1)


_KL_NORM_CACHE: dict = {}


def _kl_norm(d1: float, d2: float, K: int, density_form: str) -> float:
    """KL divergence between two ratio densities, by quadrature on (0, 1)."""
    key = (round(float(d1), 12), round(float(d2), 12), K, density_form)
    if key in _KL_NORM_CACHE:
        return _KL_NORM_CACHE[key]
    if d1 == d2:
        _KL_NORM_CACHE[key] = 0.0
        return 0.0

    def f(r):
        p = norm_density(r, d1, K, density_form)
        q = norm_density(r, d2, K, density_form)
        if p <= 0.0:
            return 0.0
        return p * (math.log(p) - math.log(max(q, 1e-300)))

    val = quad_1d(f, 0.0, 1.0)
    _KL_NORM_CACHE[key] = val
    return val


def _kl_von_mises(tau1, nu1, tau2, nu2) -> float:
    """KL divergence between two von Mises laws, by quadrature over one period.

    Integrated on (nu1 - pi, nu1] and [nu1, nu1 + pi) so that very
    concentrated densities always have their peak on a panel endpoint.
    """
    log_i0_1 = float(log_bessel_i0(tau1))
    log_i0_2 = float(log_bessel_i0(tau2))

    def f(theta):
        log_p = tau1 * math.cos(theta - nu1) - log_i0_1 - math.log(2 * math.pi)
        log_q = tau2 * math.cos(theta - nu2) - log_i0_2 - math.log(2 * math.pi)
        return math.exp(log_p) * (log_p - log_q)

    return quad_1d(f, nu1 - math.pi, nu1) + quad_1d(f, nu1, nu1 + math.pi)


def _angle_norm_stats(X, idx, dist, K, d_max, density_form):
    """(d_norm, tau, nu) statistics of one dataset's neighborhoods."""
    n = idx.shape[0]
    rmax = dist[:, K - 1]
    ok = rmax > 0
    ratios = dist[ok, 0] / rmax[ok]
    ratios = np.clip(ratios, 1e-300, 1.0)
    d_norm = danco_norm_mle(ratios, K, d_max, density_form)
    # pairwise angles between neighbor offsets, per neighborhood
    V = X[idx] - X[:, None, :]
    norms = np.linalg.norm(V, axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        U = V / np.where(norms[:, :, None] > 0, norms[:, :, None], 1.0)
    cosines = np.einsum("nkp,nlp->nkl", U, U)
    iu, ju = np.triu_indices(K, k=1)
    pair_cos = np.clip(cosines[:, iu, ju], -1.0, 1.0)
    pair_ok = (norms[:, iu] > 0) & (norms[:, ju] > 0)
    theta = np.arccos(pair_cos)
    cw = np.where(pair_ok, np.cos(theta), 0.0)
    sw = np.where(pair_ok, np.sin(theta), 0.0)
    counts = pair_ok.sum(axis=1)
    has_pairs = counts > 0
    C = cw.sum(axis=1)[has_pairs] / counts[has_pairs]
    S = sw.sum(axis=1)[has_pairs] / counts[has_pairs]
    nu_k = np.arctan2(S, C)
    rbar_k = np.hypot(C, S)
    tau_k = tau_from_resultant(rbar_k)
    tau_hat = float(np.mean(tau_k))
    nu_hat = float(np.arctan2(np.mean(np.sin(nu_k)), np.mean(np.cos(nu_k))))
    return d_norm, tau_hat, nu_hat


def estimate_danco(cloud, cfg: EstimatorConfig, neighbors=None) -> EstimateReport:
    """Angle/norm concentration estimator with simulated-ball calibration.

    Fits the min/max distance-ratio likelihood and the pairwise-angle von
    Mises parameters on the data, then on uniform q-ball simulations for
    q = 1..min(p, d_max), and returns the q whose combined KL divergence
    to the data fit is smallest.
    """
    X = as_points(cloud)
    n, p = X.shape
    K = _resolved_k(cfg, n)
    opts = cfg.danco
    d_max = opts.d_max if opts.d_max is not None else min(p, 30)
    if d_max < 1 or p < 1:
        raise ValueError("d_max and p must be positive")
    idx, dist = _neighbor_arrays(X, K, neighbors)
    d_norm, tau_hat, nu_hat = _angle_norm_stats(X, idx, dist, K, d_max,
                                                opts.density_form)
    diagnostics = {"d_norm": d_norm, "tau": tau_hat, "nu": nu_hat}
    if opts.skip_threshold is not None and d_norm <= opts.skip_threshold:
        diagnostics["skipped_kl"] = True
        return EstimateReport(d_hat=float(d_norm), method="danco", locals=None,
                              config=cfg, diagnostics=diagnostics)
    q_max = min(p, d_max)
    kl_by_q = np.empty(q_max)
    for q in range(1, q_max + 1):
        d_sims, tau_sims, nu_sims = [], [], []
        for rep in range(opts.n_sim_reps):
            rng = substream(cfg.seed, TAG_DANCO, q, rep)
            g = rng.standard_normal((n, q))
            direction = g / np.linalg.norm(g, axis=1, keepdims=True)
            ball = direction * rng.uniform(size=(n, 1)) ** (1.0 / q)
            nbr = knn_all(ball, K)
            dq, tq, nq = _angle_norm_stats(ball, nbr.indices, nbr.distances,
                                           K, d_max, opts.density_form)
            d_sims.append(dq)
            tau_sims.append(tq)
            nu_sims.append(nq)
        d_q = float(np.mean(d_sims))
        tau_q = float(np.mean(tau_sims))
        nu_q = float(np.arctan2(np.mean(np.sin(nu_sims)), np.mean(np.cos(nu_sims))))
        kl_by_q[q - 1] = (_kl_norm(d_norm, d_q, K, opts.density_form)
                          + _kl_von_mises(tau_hat, nu_hat, tau_q, nu_q))
    best_q = int(np.argmin(kl_by_q)) + 1
    diagnostics["kl_by_q"] = kl_by_q
    return EstimateReport(d_hat=float(best_q), method="danco", locals=None,
                          config=cfg, diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# transport-rate estimator

def estimate_wasserstein(cloud, cfg: EstimatorConfig, neighbors=None) -> EstimateReport:
    """Dimension from the sample-size scaling of exact transport distances.

    Each split shuffles the cloud into groups of sizes (m, m, am, am) with
    m = floor(n / (2 + 2 alpha)); the estimate is log(alpha) over the
    difference of log W1 values, averaged over splits whose log-difference
    is positive.
    """
    X = as_points(cloud)
    n = X.shape[0]
    alpha = cfg.alpha
    m = int(n // (2 + 2 * alpha))
    if m < 1:
        raise ValueError("sample too small for this alpha")
    am = int(math.floor(alpha * m))
    estimates = []
    invalid = 0
    for s in range(cfg.splits):
        rng = substream(cfg.seed, TAG_WASSERSTEIN, s)
        perm = rng.permutation(n)
        small_a = X[perm[:m]]
        small_b = X[perm[m:2 * m]]
        big_a = X[perm[2 * m:2 * m + am]]
        big_b = X[perm[2 * m + am:2 * m + 2 * am]]
        w_small = w1_empirical(small_a, small_b, cfg.ground_metric)
        w_big = w1_empirical(big_a, big_b, cfg.ground_metric)
        if w_small <= 0 or w_big <= 0:
            invalid += 1
            continue
        denom = math.log(w_small) - math.log(w_big)
        if denom <= 0:
            invalid += 1
            continue
        estimates.append(math.log(alpha) / denom)
    if not estimates:
        raise ValueError("no valid splits")
    return EstimateReport(d_hat=float(np.mean(estimates)), method="wasserstein",
                          locals=None, config=cfg,
                          diagnostics={"invalid_splits": invalid,
                                       "split_estimates": np.array(estimates),
                                       "m": m, "am": am})


# ---------------------------------------------------------------------------

ESTIMATORS = {
    "local_pca": estimate_local_pca,
    "mada": estimate_mada,
    "mle": estimate_mle,
    "danco": estimate_danco,
    "tle": estimate_tle,
    "twonn": estimate_twonn,
    "ca_pca": estimate_ca_pca,
    "wasserstein": estimate_wasserstein,
}


def estimate(cloud, cfg: EstimatorConfig, neighbors=None) -> EstimateReport:
    """Dispatch to the configured estimator."""
    return ESTIMATORS[cfg.method](cloud, cfg, neighbors=neighbors)


def required_k(cfg: EstimatorConfig) -> int | None:
    """Neighbor columns the method will consume, or None for K-free methods."""
    if cfg.method == "twonn":
        return 2
    if cfg.method == "wasserstein":
        return None
    if cfg.method == "danco":
        return cfg.K if cfg.K is not None else 10
    return cfg.K


def with_seed(cfg: EstimatorConfig, seed: int) -> EstimatorConfig:
    return replace(cfg, seed=int(seed))
