"""Monte Carlo experiment runner: factor sweeps, comparative suites, CSV output.

Every replicate draws its sample from the stream addressed by
(base_seed, replicate index), so adding factor values or running cells in
parallel never changes existing results.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .estimators import EstimatorConfig, estimate, required_k, with_seed
from .geometry import ManifoldSpec, SampleConfig, make_spec, sample_manifold
from .neighbors import knn_all
from .numerics import fold_seed
from .tuning import tuned_estimate

CSV_HEADER = "manifold,method,factor,factor_value,n,mean,sd,replicates,failures,seconds"


@dataclass
class ExperimentPlan:
    """One sweep: a manifold/sample template, estimators, and a swept factor."""

    manifold: ManifoldSpec
    sample: SampleConfig
    estimators: list            # list[EstimatorConfig]
    factor: str                 # K, alpha, n, p, R, d, c, sigma, or "none"
    factor_values: list
    replicates: int = 100
    base_seed: int = 0
    manifold_id: str = ""
    tuned: bool = False

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")


@dataclass
class SummaryRow:
    manifold: str
    method: str
    factor: str
    factor_value: object
    n: int
    mean: float
    sd: float
    replicates: int
    failures: int
    seconds: float = 0.0


def _worker_count() -> int:
    raw = os.environ.get("DIMLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _apply_factor(plan: ExperimentPlan, value):
    """Specialize (manifold, sample, estimator configs) for one factor value."""
    spec, sample = plan.manifold, plan.sample
    cfgs = list(plan.estimators)
    f = plan.factor
    if f == "K":
        cfgs = [replace(c, K=int(value)) for c in cfgs]
    elif f == "alpha":
        cfgs = [replace(c, alpha=float(value)) for c in cfgs]
    elif f == "n":
        sample = replace(sample, n=int(value))
    elif f == "sigma":
        sample = replace(sample, noise_sigma=float(value))
    elif f == "p":
        spec = make_spec(spec.kind, spec.d, ambient_p=int(value),
                         embed_seed=spec.embed_seed, **dict(spec.params))
    elif f == "R":
        spec = make_spec(spec.kind, spec.d, ambient_p=spec.ambient_p,
                         embed_seed=spec.embed_seed,
                         **{**dict(spec.params), "R": float(value)})
    elif f == "c":
        spec = make_spec(spec.kind, spec.d, ambient_p=spec.ambient_p,
                         embed_seed=spec.embed_seed,
                         **{**dict(spec.params), "c": float(value)})
    elif f == "d":
        d = int(value)
        spec = make_spec(spec.kind, d, ambient_p=2 * d,
                         embed_seed=spec.embed_seed, **dict(spec.params))
    elif f == "none":
        pass
    else:
        raise ValueError(f"unknown factor {f!r}")
    return spec, sample, cfgs


def _replicate_estimates(spec, sample, cfgs, base_seed, rep, tuned):
    """All estimators on the replicate's shared sample and neighbor table."""
    cfg_sample = replace(sample, seed=fold_seed(base_seed, rep))
    cloud = sample_manifold(spec, cfg_sample)
    n = cloud.points.shape[0]
    est_seed = fold_seed(base_seed, rep, 1)
    results = {}
    if tuned:
        for cfg in cfgs:
            try:
                results[cfg.method] = tuned_estimate(
                    cloud, cfg.method, seed=est_seed,
                    base_config=with_seed(cfg, est_seed)).d_hat
            except Exception:
                results[cfg.method] = None
        return results
    ks = [required_k(c) for c in cfgs]
    k_needed = max((k for k in ks if k), default=0)
    neighbors = knn_all(cloud, min(k_needed, n - 1)) if k_needed else None
    for cfg in cfgs:
        try:
            k = required_k(cfg)
            nbrs = neighbors if (k and neighbors is not None and neighbors.k >= k) else None
            results[cfg.method] = estimate(cloud, with_seed(cfg, est_seed),
                                           neighbors=nbrs).d_hat
        except Exception:
            results[cfg.method] = None
    return results


def run_sweep(plan: ExperimentPlan) -> list[SummaryRow]:
    """Execute a sweep plan and aggregate replicate estimates per cell.

    Each (factor value, method) cell reports the mean and the sample
    standard deviation (divisor replicates-1) over successful replicates;
    failures decrement the count and are reported, and a cell where every
    replicate failed aborts the plan.
    """
    rows = []
    workers = _worker_count()
    for value in plan.factor_values:
        spec, sample, cfgs = _apply_factor(plan, value)
        start = time.perf_counter()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_replicate_estimates, spec, sample, cfgs,
                                       plan.base_seed, rep, plan.tuned)
                           for rep in range(plan.replicates)]
                per_rep = [f.result() for f in futures]
        else:
            per_rep = [_replicate_estimates(spec, sample, cfgs, plan.base_seed,
                                            rep, plan.tuned)
                       for rep in range(plan.replicates)]
        elapsed = time.perf_counter() - start
        for cfg in cfgs:
            vals = [r[cfg.method] for r in per_rep]
            good = np.array([v for v in vals if v is not None], dtype=float)
            failures = len(vals) - good.size
            if good.size == 0:
                raise RuntimeError(
                    f"{cfg.method} failed on every replicate at "
                    f"{plan.factor}={value}")
            sd = float(np.std(good, ddof=1)) if good.size > 1 else 0.0
            rows.append(SummaryRow(
                manifold=plan.manifold_id or plan.manifold.kind,
                method=cfg.method, factor=plan.factor, factor_value=value,
                n=sample.n, mean=float(np.mean(good)), sd=sd,
                replicates=int(good.size), failures=failures,
                seconds=elapsed / max(len(cfgs), 1)))
    return rows


def run_suite(n: int, distribution: str = "uniform", noise_sigma: float = 0.0,
              estimators=("local_pca", "mada", "mle", "tle", "twonn",
                          "ca_pca", "wasserstein"),
              replicates: int = 100, base_seed: int = 0,
              manifolds=None, tuned: bool = True,
              beta_shapes=(0.5, 3.0)) -> list[SummaryRow]:
    """Run the full manifold catalog (or a subset) against the estimators.

    Hyperparameters are tuned per replicate sample unless tuned=False.
    """
    from .geometry import CATALOG
    if n < 50:
        raise ValueError("suite needs n >= 50")
    names = list(manifolds) if manifolds else list(CATALOG)
    rows = []
    for name in names:
        spec = CATALOG[name] if isinstance(name, str) else name
        plan = ExperimentPlan(
            manifold=spec,
            sample=SampleConfig(n=n, distribution=distribution,
                                beta_shapes=tuple(beta_shapes),
                                noise_sigma=noise_sigma),
            estimators=[EstimatorConfig(method=m) if isinstance(m, str) else m
                        for m in estimators],
            factor="none", factor_values=[n], replicates=replicates,
            base_seed=base_seed, manifold_id=name if isinstance(name, str) else "",
            tuned=tuned)
        for row in run_sweep(plan):
            row.factor = "n"
            rows.append(row)
    return rows


def _fmt_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def write_csv(rows, path) -> None:
    """Write summary rows in the fixed schema (UTF-8, LF, 6 signif. digits)."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            r.manifold, r.method, r.factor, _fmt_value(r.factor_value),
            str(r.n), f"{r.mean:.6g}", f"{r.sd:.6g}", str(r.replicates),
            str(r.failures), f"{r.seconds:.6g}"]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# sweep presets mirroring the factor experiments

def _five_sphere(p=10) -> ManifoldSpec:
    return make_spec("sphere", 5, ambient_p=p, R=1.0)


def _k_methods(K):
    return [EstimatorConfig(method=m, K=K)
            for m in ("local_pca", "mada", "mle", "tle", "ca_pca")]


def _all_methods(K=100, danco_k=10, alpha=5.0, danco_d_max=None):
    from .estimators import DancoOptions
    danco = EstimatorConfig(method="danco", K=danco_k,
                            danco=DancoOptions(d_max=danco_d_max))
    return (_k_methods(K)
            + [danco,
               EstimatorConfig(method="twonn"),
               EstimatorConfig(method="wasserstein", alpha=alpha)])


def preset_plan(name: str, replicates: int | None = None,
                base_seed: int = 0) -> ExperimentPlan:
    """Named sweep plans for the standard factor experiments."""
    reps = replicates
    if name == "table-k":
        plan = ExperimentPlan(
            manifold=_five_sphere(), sample=SampleConfig(n=1000),
            estimators=_k_methods(None), factor="K",
            factor_values=[5, 10, 20, 30, 40, 50, 100, 200, 500, 750],
            replicates=reps or 100, base_seed=base_seed, manifold_id="M11")
    elif name == "table-danco-k":
        plan = ExperimentPlan(
            manifold=_five_sphere(), sample=SampleConfig(n=1000),
            estimators=[EstimatorConfig(method="danco")], factor="K",
            factor_values=[2, 4, 6, 8, 10, 12, 14, 16, 18, 20],
            replicates=reps or 25, base_seed=base_seed, manifold_id="M11")
    elif name == "table-alpha":
        plan = ExperimentPlan(
            manifold=_five_sphere(), sample=SampleConfig(n=1000),
            estimators=[EstimatorConfig(method="wasserstein")], factor="alpha",
            factor_values=[1.01, 1.2, 1.4, 1.6, 1.8, 2, 4, 6, 8, 10],
            replicates=reps or 100, base_seed=base_seed, manifold_id="M11")
    elif name == "table-n":
        plan = ExperimentPlan(
            manifold=_five_sphere(), sample=SampleConfig(n=1000),
            estimators=_all_methods(), factor="n",
            factor_values=[200, 400, 600, 800, 1000, 2000],
            replicates=reps or 100, base_seed=base_seed, manifold_id="M11")
    elif name == "table-p":
        # d_max pinned so the candidate range cannot vary with p
        plan = ExperimentPlan(
            manifold=_five_sphere(), sample=SampleConfig(n=1000),
            estimators=_all_methods(danco_d_max=10), factor="p",
            factor_values=[6, 10, 15, 20, 25, 30, 35, 40, 45, 50],
            replicates=reps or 100, base_seed=base_seed, manifold_id="M11")
    elif name == "table-curvature":
        plan = ExperimentPlan(
            manifold=_five_sphere(), sample=SampleConfig(n=1000),
            estimators=_all_methods(danco_d_max=10), factor="R",
            factor_values=[0.001, 0.01, 0.05, 0.1, 1, 5, 10, 20, 50, 100],
            replicates=reps or 100, base_seed=base_seed, manifold_id="M11")
    elif name == "table-d":
        plan = ExperimentPlan(
            manifold=make_spec("sphere", 2, ambient_p=4),
            sample=SampleConfig(n=1000),
            estimators=_all_methods(), factor="d",
            factor_values=[2, 4, 6, 8, 10, 12, 14, 16, 18, 20],
            replicates=reps or 100, base_seed=base_seed, manifold_id="sphere-d")
    elif name == "table-c":
        plan = ExperimentPlan(
            manifold=make_spec("deformed_sphere", 3, ambient_p=6, c=1.0),
            sample=SampleConfig(n=1000),
            estimators=_all_methods(), factor="c",
            factor_values=[0.0001, 0.001, 0.01, 0.05, 0.1, 0.2, 0.5, 1, 2, 4],
            replicates=reps or 100, base_seed=base_seed, manifold_id="M43")
    elif name == "table-noise":
        plan = ExperimentPlan(
            manifold=_five_sphere(), sample=SampleConfig(n=1000),
            estimators=_all_methods(danco_d_max=10), factor="sigma",
            factor_values=[round(0.01 * i, 2) for i in range(10)],
            replicates=reps or 100, base_seed=base_seed, manifold_id="M11")
    else:
        raise KeyError(f"unknown sweep preset {name!r}")
    return plan


SUITE_PRESETS = {
    "suite-500u": dict(n=500, distribution="uniform", noise_sigma=0.0),
    "suite-2000u": dict(n=2000, distribution="uniform", noise_sigma=0.0),
    "suite-500b": dict(n=500, distribution="beta", noise_sigma=0.0),
    "suite-2000b": dict(n=2000, distribution="beta", noise_sigma=0.0),
    "suite-500un": dict(n=500, distribution="uniform", noise_sigma=0.05),
    "suite-2000un": dict(n=2000, distribution="uniform", noise_sigma=0.05),
}
