"""Seeded simulation study comparing helix-axis estimators.

Each replicate draws fresh noise around the noise-free helix in the
canonical frame, whose axis is ``w0``. Replicate ``i`` uses the child seed
``SeedSequence(seed, spawn_key=(i,))``, so results do not depend on the
order or the process in which replicates run.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .axisfit import estimate_axis_mh, init_axis_pca, optls_fit
from .errors import BenchmarkError, InputError, MHError
from .geometry import HelixParams, simulate_helix

__all__ = [
    "ESTIMATORS",
    "STANDARD_SETS",
    "REFERENCE_MSE",
    "BenchConfig",
    "BenchRow",
    "mse_axis",
    "replicate_seed",
    "run_benchmark",
    "rows_to_csv",
    "rows_to_json",
    "load_configs",
]

ESTIMATORS = ("mh", "optls", "pca")
ALPHA_TURN = 2.0 * math.pi / 3.6
_C_LONG = 5.4 / (2.0 * math.pi)
_C_FLAT = 0.63 / (2.0 * math.pi)

# (n, r, c, sigma2) of the six standard alpha-helix-like configurations
STANDARD_SETS = {
    1: (30, 2.3, _C_LONG, 0.001),
    2: (30, 2.3, _C_LONG, 0.05),
    3: (12, 2.3, _C_LONG, 0.05),
    4: (12, 2.3, _C_LONG, 0.1),
    5: (12, 7.0, _C_FLAT, 0.05),
    6: (12, 7.0, _C_LONG, 0.05),
}
# reference 100-replicate MSE values for the standard sets: (mh, optls)
REFERENCE_MSE = {
    1: (2.8e-7, 1.2e-7),
    2: (1.5e-5, 0.5e-5),
    3: (2.4e-4, 1.4e-4),
    4: (4.5e-4, 2.8e-4),
    5: (1.2e-2, 1e-4),
    6: (2.3e-4, 0.8e-4),
}

MAX_FAILURE_FRACTION = 0.05


@dataclass
class BenchConfig:
    n: int
    r: float
    c: float
    beta: float = ALPHA_TURN
    sigma2: float = 0.05
    replicates: int = 100
    seed: int = 0
    w0: tuple = (0.0, 0.0, 1.0)
    estimators: tuple = ("mh", "optls")
    mh_init: str | None = None
    label: str = ""

    def __post_init__(self):
        self.w0 = tuple(float(v) for v in self.w0)
        self.estimators = tuple(self.estimators)
        if self.replicates < 1:
            raise InputError("replicates must be >= 1")
        if not self.sigma2 >= 0:
            raise InputError("sigma2 must be non-negative")
        if abs(np.linalg.norm(self.w0) - 1.0) > 1e-9:
            raise InputError("w0 must be a unit vector")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise InputError(f"unknown estimators {sorted(unknown)}; choose from {ESTIMATORS}")

    @classmethod
    def standard(cls, set_id: int, **overrides):
        n, r, c, sigma2 = STANDARD_SETS[set_id]
        kw = dict(n=n, r=r, c=c, sigma2=sigma2, label=f"set{set_id}")
        kw.update(overrides)
        return cls(**kw)


@dataclass
class BenchRow:
    config: BenchConfig
    mse_per_estimator: dict
    mean_axis_per_estimator: dict
    per_replicate_axes: dict = field(repr=False)
    per_replicate_errors: dict = field(repr=False)
    failures: dict = field(default_factory=dict)


def mse_axis(estimates, w0) -> float:
    """``1 - mean(estimates) . w0``; the mean is not renormalized.

    Estimates should already be sign-canonicalized against ``w0``.
    """
    W = np.asarray(estimates, dtype=float).reshape(-1, 3)
    if W.shape[0] == 0:
        raise InputError("no estimates")
    return float(1.0 - W.mean(axis=0) @ np.asarray(w0, dtype=float))


def replicate_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed, spawn_key=(index,))


def _estimate(name, cloud, config):
    if name == "mh":
        return estimate_axis_mh(cloud, w_init=config.mh_init, beta=config.beta).w
    if name == "optls":
        return optls_fit(cloud, config.beta).w
    if name == "pca":
        return init_axis_pca(cloud)
    raise InputError(f"unknown estimator {name!r}")


def _replicate(args):
    config, index = args
    w0 = np.asarray(config.w0)
    params = HelixParams.with_axis(config.r, config.c, config.beta, axis=w0)
    cloud = simulate_helix(params, config.n, config.sigma2, replicate_seed(config.seed, index))
    out = {}
    for name in config.estimators:
        try:
            w = np.asarray(_estimate(name, cloud, config), dtype=float)
        except (MHError, ArithmeticError, np.linalg.LinAlgError) as exc:
            out[name] = exc.__class__.__name__ + ": " + str(exc)
            continue
        out[name] = w if w @ w0 >= 0 else -w
    return out


def run_benchmark(config: BenchConfig, workers: int = 1) -> BenchRow:
    """Run every replicate and aggregate the per-estimator MSE.

    ``workers > 1`` distributes replicates over processes; the result is
    identical to a serial run.
    """
    jobs = [(config, i) for i in range(config.replicates)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replicate, jobs, chunksize=4))
    else:
        results = [_replicate(j) for j in jobs]

    w0 = np.asarray(config.w0)
    mse, mean_axis, axes, errors, failures = {}, {}, {}, {}, {}
    for name in config.estimators:
        good = [(i, r[name]) for i, r in enumerate(results) if not isinstance(r[name], str)]
        bad = [i for i, r in enumerate(results) if isinstance(r[name], str)]
        if bad:
            failures[name] = {i: results[i][name] for i in bad}
        if len(bad) > MAX_FAILURE_FRACTION * config.replicates:
            raise BenchmarkError(
                f"estimator {name!r} failed on {len(bad)} of {config.replicates} replicates "
                f"(seed {config.seed}, replicate indices {bad[:10]}{'...' if len(bad) > 10 else ''})")
        W = np.array([w for _, w in good])
        axes[name] = W
        errors[name] = 1.0 - W @ w0
        mse[name] = mse_axis(W, w0)
        mean_axis[name] = W.mean(axis=0)
    return BenchRow(config=config, mse_per_estimator=mse, mean_axis_per_estimator=mean_axis,
                    per_replicate_axes=axes, per_replicate_errors=errors, failures=failures)


CSV_FIELDS = ["label", "n", "r", "c", "beta", "sigma2", "replicates", "seed", "estimator",
              "mse", "mean_axis_x", "mean_axis_y", "mean_axis_z"]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        c = row.config
        for name in c.estimators:
            m = row.mean_axis_per_estimator[name]
            writer.writerow([c.label, c.n, repr(c.r), repr(c.c), repr(c.beta), repr(c.sigma2),
                             c.replicates, c.seed, name, repr(row.mse_per_estimator[name]),
                             repr(float(m[0])), repr(float(m[1])), repr(float(m[2]))])
    return buf.getvalue()


def _config_dict(config):
    d = asdict(config)
    d["w0"] = list(config.w0)
    d["estimators"] = list(config.estimators)
    return d


def rows_to_json(rows) -> str:
    out = []
    for row in rows:
        entry = {"config": _config_dict(row.config), "estimators": {}}
        for name in row.config.estimators:
            entry["estimators"][name] = {
                "mse": row.mse_per_estimator[name],
                "mean_axis": row.mean_axis_per_estimator[name].tolist(),
                "axes": row.per_replicate_axes[name].tolist(),
                "errors": row.per_replicate_errors[name].tolist(),
                "failures": {str(k): v for k, v in row.failures.get(name, {}).items()},
            }
        out.append(entry)
    return json.dumps({"rows": out}, indent=2)


def load_configs(obj) -> list:
    """Build configs from parsed JSON.

    Accepts one config object, a list of them, or ``{"configs": [...]}``.
    A config may name a standard set with ``"set": k`` and override fields.
    """
    if isinstance(obj, dict) and "configs" in obj:
        obj = obj["configs"]
    if isinstance(obj, dict):
        obj = [obj]
    configs = []
    for item in obj:
        item = dict(item)
        set_id = item.pop("set", None)
        try:
            if set_id is not None:
                configs.append(BenchConfig.standard(int(set_id), **item))
            else:
                configs.append(BenchConfig(**item))
        except TypeError as exc:
            raise InputError(f"bad benchmark config {item}: {exc}") from None
    return configs
