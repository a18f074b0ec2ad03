"""Benchmark manifolds: charts, volume distortion, samplers, embeddings.

Each manifold kind is described by an inverse chart on a box domain.
Uniform samples are drawn by rejection against the volume-distortion
factor; spheres and balls use direct constructions instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .numerics import TAG_EMBED, TAG_SAMPLE, sample_beta, substream

KINDS = (
    "sphere",
    "ball",
    "gaussian_surface",
    "deformed_sphere",
    "cylinder",
    "helix",
    "swiss_roll",
    "mobius",
    "torus",
    "hyperboloid",
)

_REJECTION_CAP = 10_000_000  # proposals per requested point before giving up
_FD_STEP = 1e-6


@dataclass(frozen=True)
class ManifoldSpec:
    """Declarative description of one benchmark manifold."""

    kind: str
    d: int
    ambient_p: int
    params: tuple = ()  # sorted (name, value) pairs; see make_spec
    embed_seed: int = 0

    def param(self, name, default=None):
        for k, v in self.params:
            if k == name:
                return v
        return default


def make_spec(kind, d, ambient_p=None, embed_seed=0, **params) -> ManifoldSpec:
    """Build a validated ManifoldSpec; ambient_p defaults to max(native, 2d)."""
    if kind not in KINDS:
        raise ValueError(f"unknown manifold kind {kind!r}")
    defaults = {
        "sphere": {"R": 1.0},
        "ball": {"R": 1.0},
        "gaussian_surface": {"sigma_g": 0.25},
        "deformed_sphere": {"R": 1.0, "r": 0.5, "c": 1.0},
        "cylinder": {},
        "helix": {},
        "swiss_roll": {},
        "mobius": {},
        "torus": {"R": 2.0, "r": 1.0},
        "hyperboloid": {},
    }[kind]
    merged = {**defaults, **params}
    fixed_d = {"cylinder": 2, "helix": 1, "swiss_roll": 2, "mobius": 2,
               "torus": 2, "hyperboloid": 2}
    if kind in fixed_d and d != fixed_d[kind]:
        raise ValueError(f"{kind} has intrinsic dimension {fixed_d[kind]}")
    if d < 1:
        raise ValueError("d must be positive")
    spec = ManifoldSpec(kind=kind, d=int(d), ambient_p=0,
                        params=tuple(sorted(merged.items())),
                        embed_seed=int(embed_seed))
    native = native_width(spec)
    if ambient_p is None:
        ambient_p = max(native, 2 * d)
    if ambient_p < native:
        raise ValueError(f"ambient_p must be >= native width {native}")
    return ManifoldSpec(kind=kind, d=int(d), ambient_p=int(ambient_p),
                        params=spec.params, embed_seed=int(embed_seed))


@dataclass(frozen=True)
class SampleConfig:
    """How to draw one sample: size, coordinate law, noise level, seed."""

    n: int
    distribution: str = "uniform"  # "uniform" | "beta"
    beta_shapes: tuple = (0.5, 3.0)
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.distribution not in ("uniform", "beta"):
            raise ValueError("distribution must be 'uniform' or 'beta'")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        a, b = self.beta_shapes
        if a <= 0 or b <= 0:
            raise ValueError("beta shapes must be positive")


@dataclass
class PointCloud:
    """n x p matrix of observations plus optional generation provenance."""

    points: np.ndarray
    provenance: tuple | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] < 1:
            raise ValueError("points must be an n x p matrix with n >= 2")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        self.points = pts


def as_points(cloud) -> np.ndarray:
    """Accept a PointCloud or a bare matrix; return the points array."""
    if isinstance(cloud, PointCloud):
        return cloud.points
    pts = np.asarray(cloud, dtype=float)
    if pts.ndim != 2:
        raise ValueError("expected an n x p matrix")
    return pts


def native_width(spec: ManifoldSpec) -> int:
    """Width of the chart image before any ambient embedding."""
    return {
        "sphere": spec.d + 1,
        "ball": spec.d,
        "gaussian_surface": spec.d + 1,
        "deformed_sphere": 2 * spec.d,
        "cylinder": 3,
        "helix": 3,
        "swiss_roll": 3,
        "mobius": 3,
        "torus": 3,
        "hyperboloid": 3,
    }[spec.kind]


def chart_domain(spec: ManifoldSpec):
    """Box domain (lo, hi) of the chart coordinates."""
    d = spec.d
    pi = np.pi
    if spec.kind == "sphere":
        lo = np.r_[np.zeros(d - 1), -pi]
        hi = np.r_[np.full(d - 1, pi), pi]
    elif spec.kind == "ball":
        R = spec.param("R")
        if d == 1:
            lo, hi = np.array([-R]), np.array([R])
        else:
            lo = np.r_[0.0, np.zeros(d - 2), -pi]
            hi = np.r_[R, np.full(d - 2, pi), pi]
    elif spec.kind == "gaussian_surface":
        lo, hi = -np.ones(d), np.ones(d)
    elif spec.kind == "deformed_sphere":
        lo, hi = np.full(d, -pi), np.full(d, pi)
    elif spec.kind == "cylinder":
        lo, hi = np.array([0.0, 0.0]), np.array([2 * pi, 1.0])
    elif spec.kind == "helix":
        lo, hi = np.array([0.0]), np.array([2 * pi])
    elif spec.kind == "swiss_roll":
        lo, hi = np.array([1.5 * pi, 0.0]), np.array([4.5 * pi, 10.0])
    elif spec.kind == "mobius":
        lo, hi = np.array([0.0, -1.0]), np.array([2 * pi, 1.0])
    elif spec.kind == "torus":
        lo, hi = np.array([0.0, 0.0]), np.array([2 * pi, 2 * pi])
    elif spec.kind == "hyperboloid":
        lo, hi = np.array([-1.0, 0.0]), np.array([1.0, 2 * pi])
    else:  # pragma: no cover
        raise ValueError(spec.kind)
    return lo, hi


def _sphere_coords(angles):
    """Hyperspherical map: (m, d) angles -> (m, d+1) unit vectors.

    All angles zero maps to the last coordinate axis (the north pole).
    """
    m, d = angles.shape
    raw = np.empty((m, d + 1))
    sin_run = np.ones(m)
    for i in range(d):
        raw[:, i] = sin_run * np.cos(angles[:, i])
        sin_run = sin_run * np.sin(angles[:, i])
    raw[:, d] = sin_run
    return raw[:, ::-1]


def _push(spec: ManifoldSpec, U: np.ndarray) -> np.ndarray:
    """Vectorized inverse chart: (m, d) coordinates -> (m, native) points."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    d = spec.d
    if spec.kind == "sphere":
        return spec.param("R") * _sphere_coords(U)
    if spec.kind == "ball":
        R = spec.param("R")
        if d == 1:
            return U.copy()
        rho = U[:, :1]
        direction = _sphere_coords(U[:, 1:])
        return rho * direction
    if spec.kind == "gaussian_surface":
        s2 = spec.param("sigma_g")
        dens = (2 * np.pi * s2) ** (-d / 2.0) * np.exp(
            -np.sum(U * U, axis=1) / (2 * s2)
        )
        return np.hstack([U, dens[:, None]])
    if spec.kind == "deformed_sphere":
        R, r, c = spec.param("R"), spec.param("r"), spec.param("c")
        radial = R + r * np.cos(2 * c * np.pi * U)
        return np.hstack([radial * np.cos(2 * np.pi * U),
                          radial * np.sin(2 * np.pi * U)])
    if spec.kind == "cylinder":
        t, h = U[:, 0], U[:, 1]
        return np.column_stack([np.cos(t), np.sin(t), h])
    if spec.kind == "helix":
        # closed toroidal curve: winds 8 times around a torus, no endpoints
        t = U[:, 0]
        rad = 2.0 + np.cos(8 * t)
        return np.column_stack([rad * np.cos(t), rad * np.sin(t), np.sin(8 * t)])
    if spec.kind == "swiss_roll":
        v, h = U[:, 0], U[:, 1]
        return np.column_stack([v * np.cos(v), v * np.sin(v), h])
    if spec.kind == "mobius":
        t, w = U[:, 0], U[:, 1]
        rad = 1.0 + 0.5 * w * np.cos(0.5 * t)
        return np.column_stack([rad * np.cos(t), rad * np.sin(t),
                                0.5 * w * np.sin(0.5 * t)])
    if spec.kind == "torus":
        R, r = spec.param("R"), spec.param("r")
        u, v = U[:, 0], U[:, 1]
        rad = R + r * np.cos(v)
        return np.column_stack([rad * np.cos(u), rad * np.sin(u), r * np.sin(v)])
    if spec.kind == "hyperboloid":
        u, v = U[:, 0], U[:, 1]
        rad = np.sqrt(1.0 + u * u)
        return np.column_stack([rad * np.cos(v), rad * np.sin(v), u])
    raise ValueError(spec.kind)  # pragma: no cover


def chart_inverse(spec: ManifoldSpec, u) -> np.ndarray:
    """Map one chart coordinate vector to its point in native coordinates."""
    u = np.asarray(u, dtype=float).ravel()
    if u.size != spec.d:
        raise ValueError(f"expected a {spec.d}-vector")
    lo, hi = chart_domain(spec)
    if np.any(u < lo - 1e-12) or np.any(u > hi + 1e-12):
        raise ValueError("coordinate outside the chart domain")
    return _push(spec, u[None, :])[0]


def _distortion_batch(spec: ManifoldSpec, U: np.ndarray) -> np.ndarray:
    """Volume distortion sqrt(det(J^T J)) at each coordinate row.

    Closed form for sphere, torus, cylinder, and deformed sphere; central
    finite differences (step 1e-6, one Richardson pass) otherwise.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    d = spec.d
    if spec.kind == "sphere":
        R = spec.param("R")
        out = np.full(U.shape[0], float(R) ** d)
        for i in range(d - 1):
            out *= np.abs(np.sin(U[:, i])) ** (d - 1 - i)
        return out
    if spec.kind == "torus":
        R, r = spec.param("R"), spec.param("r")
        return r * (R + r * np.cos(U[:, 1]))
    if spec.kind == "cylinder":
        return np.ones(U.shape[0])
    if spec.kind == "deformed_sphere":
        R, r, c = spec.param("R"), spec.param("r"), spec.param("c")
        a = c * r * np.sin(2 * c * np.pi * U)
        b = R + r * np.cos(2 * c * np.pi * U)
        return np.prod(2 * np.pi * np.sqrt(a * a + b * b), axis=1)

    def gram_sqrt(step):
        cols = []
        for i in range(d):
            e = np.zeros(d)
            e[i] = step
            cols.append((_push(spec, U + e) - _push(spec, U - e)) / (2 * step))
        jac = np.stack(cols, axis=2)  # (m, native, d)
        g = np.einsum("mni,mnj->mij", jac, jac)
        det = np.linalg.det(g)
        return np.sqrt(np.maximum(det, 0.0))

    coarse = gram_sqrt(_FD_STEP)
    fine = gram_sqrt(_FD_STEP / 2.0)
    return np.maximum((4.0 * fine - coarse) / 3.0, 0.0)


def volume_distortion(spec: ManifoldSpec, u) -> float:
    """Volume distortion factor of the chart at one coordinate vector."""
    u = np.asarray(u, dtype=float).ravel()
    if u.size != spec.d:
        raise ValueError(f"expected a {spec.d}-vector")
    lo, hi = chart_domain(spec)
    if np.any(u < lo - 1e-12) or np.any(u > hi + 1e-12):
        raise ValueError("coordinate outside the chart domain")
    return float(_distortion_batch(spec, u[None, :])[0])


@lru_cache(maxsize=256)
def _chart_bound_cached(spec: ManifoldSpec) -> float:
    """Upper bound on the distortion over the chart domain (grid scan x1.1)."""
    d = spec.d
    if spec.kind in ("sphere", "ball"):
        raise ValueError("direct samplers do not use a rejection bound")
    if spec.kind == "deformed_sphere":
        R, r, c = spec.param("R"), spec.param("r"), spec.param("c")
        t = np.linspace(-np.pi, np.pi, 20001)
        a = c * r * np.sin(2 * c * np.pi * t)
        b = R + r * np.cos(2 * c * np.pi * t)
        per_axis = np.max(2 * np.pi * np.sqrt(a * a + b * b))
        return 1.1 * per_axis**d
    if spec.kind == "gaussian_surface":
        # distortion depends on ||u|| only
        s2 = spec.param("sigma_g")
        rho = np.linspace(0.0, np.sqrt(d), 20001)
        dens = (2 * np.pi * s2) ** (-d / 2.0) * np.exp(-rho * rho / (2 * s2))
        grad = rho * dens / s2
        return 1.1 * float(np.max(np.sqrt(1.0 + grad * grad)))
    lo, hi = chart_domain(spec)
    if d == 1:
        grid = np.linspace(lo[0], hi[0], 20001)[:, None]
    elif d == 2:
        g0 = np.linspace(lo[0], hi[0], 401)
        g1 = np.linspace(lo[1], hi[1], 401)
        grid = np.stack(np.meshgrid(g0, g1, indexing="ij"), axis=-1).reshape(-1, 2)
    else:  # pragma: no cover - all rejection kinds here are 1-D or 2-D
        rng = substream(0, 99)
        grid = rng.uniform(lo, hi, size=(200_000, d))
    return 1.1 * float(np.max(_distortion_batch(spec, grid)))


def chart_bound(spec: ManifoldSpec) -> float:
    return _chart_bound_cached(spec)


def embed_linear(points, ambient_p: int, embed_seed: int) -> PointCloud:
    """Zero-pad to ambient_p, then apply a seeded random orthogonal map.

    The map comes from the QR factorization of a Gaussian matrix with the
    R diagonal signs folded in, so it is Haar-distributed and exactly
    orthogonal up to rounding; pairwise distances are preserved.
    """
    pts = np.asarray(points, dtype=float)
    native = pts.shape[1]
    if ambient_p < native:
        raise ValueError("ambient_p must be >= the native width")
    rng = substream(embed_seed, TAG_EMBED, ambient_p)
    gauss = rng.standard_normal((ambient_p, ambient_p))
    q, r = np.linalg.qr(gauss)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs[None, :]
    padded = np.zeros((pts.shape[0], ambient_p))
    padded[:, :native] = pts
    return PointCloud(points=padded @ q.T)


def _sample_coords(spec: ManifoldSpec, cfg: SampleConfig, rng) -> np.ndarray:
    """Draw n chart coordinates according to the configured law."""
    n, d = cfg.n, spec.d
    lo, hi = chart_domain(spec)
    if cfg.distribution == "beta":
        a, b = cfg.beta_shapes
        draws = sample_beta(rng, a, b, size=(n, d))
        return lo + draws * (hi - lo)
    # Hausdorff-uniform: rejection with acceptance J / M
    bound = chart_bound(spec)
    out = np.empty((n, d))
    filled = 0
    proposals = 0
    batch = max(1024, n)
    while filled < n:
        u = rng.uniform(lo, hi, size=(batch, d))
        accept_p = _distortion_batch(spec, u) / bound
        keep = rng.uniform(size=batch) < accept_p
        kept = u[keep]
        take = min(n - filled, kept.shape[0])
        out[filled:filled + take] = kept[:take]
        filled += take
        proposals += batch
        if proposals > _REJECTION_CAP * n:
            raise RuntimeError("rejection sampler exceeded its proposal budget; "
                               "the distortion bound looks wrong")
    return out


def sample_manifold(spec: ManifoldSpec, cfg: SampleConfig) -> PointCloud:
    """Draw a point cloud from the manifold.

    Uniform mode samples the Hausdorff-uniform law on the chart image
    (spheres via normalized Gaussians, balls via Gaussian direction and a
    U^(1/d) radius, everything else by rejection against the distortion
    factor).  Beta mode draws chart coordinates i.i.d. Beta(a, b) rescaled
    to the domain and pushes them through the chart, with no distortion
    correction.  The native points are then embedded into R^ambient_p by a
    seeded orthogonal map and perturbed by isotropic Gaussian noise.
    """
    rng = substream(cfg.seed, TAG_SAMPLE)
    n, d = cfg.n, spec.d
    if cfg.distribution == "uniform" and spec.kind == "sphere":
        g = rng.standard_normal((n, d + 1))
        native = spec.param("R") * g / np.linalg.norm(g, axis=1, keepdims=True)
    elif cfg.distribution == "uniform" and spec.kind == "ball":
        g = rng.standard_normal((n, d))
        direction = g / np.linalg.norm(g, axis=1, keepdims=True)
        radius = spec.param("R") * rng.uniform(size=(n, 1)) ** (1.0 / d)
        native = direction * radius
    else:
        native = _push(spec, _sample_coords(spec, cfg, rng))
    cloud = embed_linear(native, spec.ambient_p, spec.embed_seed)
    pts = cloud.points
    if cfg.noise_sigma > 0:
        pts = pts + cfg.noise_sigma * rng.standard_normal(pts.shape)
    return PointCloud(points=pts, provenance=(spec, cfg))


def _deformed_tangent_pair(spec: ManifoldSpec, t: float):
    """Jacobian-column components (radial', angular') at coordinate value t."""
    R, r, c = spec.param("R"), spec.param("r"), spec.param("c")
    two_pi = 2 * np.pi
    a = (-two_pi * c * r * np.sin(two_pi * c * t) * np.cos(two_pi * t)
         - two_pi * (R + r * np.cos(two_pi * c * t)) * np.sin(two_pi * t))
    b = (-two_pi * c * r * np.sin(two_pi * c * t) * np.sin(two_pi * t)
         + two_pi * (R + r * np.cos(two_pi * c * t)) * np.cos(two_pi * t))
    return a, b


def tangent_rank_check(spec: ManifoldSpec) -> int:
    """Numeric rank of 2d tangent vectors of a deformed sphere.

    Takes two tangent vectors per coordinate axis, evaluated at +-t e_j.
    The offset t starts at 1 when 2c is an integer and 1/2 otherwise, and
    falls back through smaller offsets whenever both components of the
    column vanish there (which happens at the first choices for several
    integer 2c values).
    """
    if spec.kind != "deformed_sphere":
        raise ValueError("rank check applies to deformed spheres only")
    d = spec.d
    c = spec.param("c")
    R, r = spec.param("R"), spec.param("r")
    first = 1.0 if float(2 * c).is_integer() else 0.5
    scale = 2 * np.pi * (abs(R) + abs(r) + 1.0)
    t_used = first
    for t in (first, 0.5, 0.25, 0.125, 0.0625, 1.0 / 3.0):
        a, b = _deformed_tangent_pair(spec, t)
        if abs(a) > 1e-9 * scale and abs(b) > 1e-9 * scale:
            t_used = t
            break
    vectors = np.zeros((2 * d, 2 * d))
    for j in range(d):
        a_pos, b_pos = _deformed_tangent_pair(spec, t_used)
        a_neg, b_neg = _deformed_tangent_pair(spec, -t_used)
        vectors[2 * j, j] = a_pos
        vectors[2 * j, j + d] = b_pos
        vectors[2 * j + 1, j] = a_neg
        vectors[2 * j + 1, j + d] = b_neg
    sv = np.linalg.svd(vectors, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > 1e-8 * sv[0]))


def _catalog() -> dict:
    cat = {}
    for name, d in (("M11", 5), ("M12", 10), ("M13", 20)):
        cat[name] = make_spec("sphere", d, ambient_p=2 * d, R=1.0)
    for name, d in (("M21", 5), ("M22", 10), ("M23", 20)):
        cat[name] = make_spec("ball", d, ambient_p=2 * d, R=1.0)
    for name, d in (("M31", 5), ("M32", 10), ("M33", 20)):
        cat[name] = make_spec("gaussian_surface", d, ambient_p=2 * d, sigma_g=0.25)
    for name, c in (("M41", 0.01), ("M42", 0.1), ("M43", 1.0)):
        cat[name] = make_spec("deformed_sphere", 3, ambient_p=6, R=1.0, r=0.5, c=c)
    cat["M5"] = make_spec("cylinder", 2, ambient_p=4)
    cat["M6"] = make_spec("helix", 1, ambient_p=3)
    cat["M7"] = make_spec("swiss_roll", 2, ambient_p=4)
    cat["M8"] = make_spec("mobius", 2, ambient_p=4)
    cat["M9"] = make_spec("torus", 2, ambient_p=4)
    cat["M10"] = make_spec("hyperboloid", 2, ambient_p=4)
    return cat


CATALOG = _catalog()
CATALOG_DIMS = {name: spec.d for name, spec in CATALOG.items()}


def catalog_spec(name: str) -> ManifoldSpec:
    """Look up a catalog manifold by its id (M11 ... M10)."""
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown manifold id {name!r}; known: {', '.join(CATALOG)}")
