"""Monte-Carlo harness for synthetic transfer-learning experiments.

Each outer repetition draws true class parameters from the joint prior;
each inner repetition draws fresh training (both domains) and target test
sets and scores OBTL, OBC and the plug-in Bayes rule on the same test set.

Randomness is organized in independent streams keyed by
``(seed, outer, inner, purpose)``.  Target training data, source training
data and test data come from separate streams, so e.g. the OBC error does
not move when only ``n_s`` changes, and every sweep value sees the same
draws (common random numbers).
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, NumericError
from .inference import (
    ClassPriorConfig,
    MODES,
    classify_obc,
    classify_obtl,
    default_mode,
    fit_obc,
    fit_obtl,
)
from .model import (
    ScalarPriorSpec,
    SpdMatrix,
    build_hyperparameters,
    sample_class_data,
    sample_joint_precisions,
    sample_mean_given_precision,
)

__all__ = [
    "SWEEP_PARAMETERS",
    "ExperimentConfig",
    "ErrorCurve",
    "run_experiment",
    "bayes_error_reference",
    "version_string",
]

log = logging.getLogger(__name__)

SWEEP_PARAMETERS = ("n_t", "n_s", "alpha", "nu", "kappa_t", "kappa_s", "k_t", "k_s")
_PRIOR_FIELDS = ("nu", "kappa_t", "kappa_s", "k_t", "k_s", "alpha")
_SAMPLE_FIELDS = ("n_t", "n_s")

# stream tags
_PARAMS, _TARGET, _SOURCE, _TEST = 0, 1, 2, 3


def _default_class_means(L: int) -> tuple[tuple[float, float], ...]:
    return tuple((0.05 * l, 0.05 * l + 1.0) for l in range(L))


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration of a synthetic sweep.

    Parameters
    ----------
    spec : ScalarPriorSpec
        True generative prior.  Its ``m_t``/``m_s`` are ignored in favor of
        ``class_means``.
    classifier_spec : ScalarPriorSpec, optional
        Prior handed to the classifiers.  ``None`` means "same as ``spec``";
        a prior-parameter sweep then moves truth and classifier together.
        When given, the sweep moves only the classifier prior.
    class_means : sequence of (m_t, m_s) pairs
        Scalar per-class mean offsets, broadcast to all features.
    sweep_parameter, sweep_values
        Named parameter and its grid.  ``None`` runs a single point.
    mode : {"laplace", "exact"}, optional
        OBTL evaluation mode; defaults by dimension.
    workers : int
        Process count for outer repetitions (1 runs serially).
    """

    spec: ScalarPriorSpec = field(default_factory=lambda: ScalarPriorSpec(d=10, nu=25, kappa_t=100, kappa_s=100, alpha=0.9))
    classifier_spec: ScalarPriorSpec | None = None
    L: int = 2
    n_t: int = 10
    n_s: int = 200
    n_test: int = 200
    reps_outer: int = 100
    reps_inner: int = 20
    seed: int = 0
    sweep_parameter: str | None = None
    sweep_values: tuple = ()
    class_means: tuple | None = None
    mode: str | None = None
    xi: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if self.L < 2:
            raise ConfigError("L must be >= 2")
        for name in ("n_t", "n_s", "n_test"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.n_test < 1:
            raise ConfigError("n_test must be >= 1")
        if self.reps_outer < 1 or self.reps_inner < 1:
            raise ConfigError("reps must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.mode is not None and self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.classifier_spec is not None and self.classifier_spec.d != self.spec.d:
            raise ConfigError("classifier prior dimension differs from the true prior")
        means = self.class_means if self.class_means is not None else _default_class_means(self.L)
        means = tuple((float(m_t), float(m_s)) for m_t, m_s in means)
        if len(means) != self.L:
            raise ConfigError(f"class_means needs {self.L} entries, got {len(means)}")
        object.__setattr__(self, "class_means", means)
        values = tuple(self.sweep_values)
        if self.sweep_parameter is None:
            if values:
                raise ConfigError("sweep values given without a sweep parameter")
        else:
            if self.sweep_parameter not in SWEEP_PARAMETERS:
                raise ConfigError(f"cannot sweep {self.sweep_parameter!r}; choose from {SWEEP_PARAMETERS}")
            if not values:
                raise ConfigError("sweep grid is empty")
            if self.sweep_parameter in _SAMPLE_FIELDS:
                if any(v != int(v) or v < 0 for v in values):
                    raise ConfigError(f"{self.sweep_parameter} grid must hold non-negative integers")
                values = tuple(int(v) for v in values)
            else:
                values = tuple(float(v) for v in values)
            # validate every grid point now rather than mid-run
            for v in values:
                true, clf, _, _ = self.point(v)
                self.class_hyperparameters(true)
                self.class_hyperparameters(clf)
        object.__setattr__(self, "sweep_values", values)

    @property
    def grid(self) -> tuple:
        return self.sweep_values if self.sweep_parameter else (None,)

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def resolved_mode(self) -> str:
        return self.mode or default_mode(self.d)

    def point(self, value):
        """``(true_spec, classifier_spec, n_t, n_s)`` at one sweep value."""
        true, clf = self.spec, self.classifier_spec
        n_t, n_s = self.n_t, self.n_s
        p = self.sweep_parameter
        if p == "n_t":
            n_t = int(value)
        elif p == "n_s":
            n_s = int(value)
        elif p in _PRIOR_FIELDS:
            try:
                if clf is None:
                    true = dataclasses.replace(true, **{p: value})
                else:
                    clf = dataclasses.replace(clf, **{p: value})
            except ConfigError as exc:
                raise ConfigError(f"sweep value {p}={value}: {exc}") from exc
        return true, clf or true, n_t, n_s

    def class_hyperparameters(self, spec: ScalarPriorSpec):
        return [build_hyperparameters(dataclasses.replace(spec, m_t=m_t, m_s=m_s)) for m_t, m_s in self.class_means]

    def to_dict(self) -> dict:
        return {
            "prior": _spec_to_dict(self.spec),
            "classifier_prior": None if self.classifier_spec is None else _spec_to_dict(self.classifier_spec),
            "L": self.L,
            "n_t": self.n_t,
            "n_s": self.n_s,
            "n_test": self.n_test,
            "reps_outer": self.reps_outer,
            "reps_inner": self.reps_inner,
            "seed": self.seed,
            "sweep": None if self.sweep_parameter is None else {"parameter": self.sweep_parameter, "values": list(self.sweep_values)},
            "class_means": [list(m) for m in self.class_means],
            "mode": self.mode,
            "xi": self.xi,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        known = {
            "prior", "classifier_prior", "L", "n_t", "n_s", "n_test", "reps_outer",
            "reps_inner", "seed", "sweep", "class_means", "mode", "xi", "workers",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown experiment keys: {sorted(unknown)}")
        if "prior" not in data:
            raise ConfigError("experiment config needs a 'prior' section")
        kwargs = {k: data[k] for k in ("L", "n_t", "n_s", "n_test", "reps_outer", "reps_inner", "seed", "mode", "xi", "workers") if k in data}
        kwargs["spec"] = _spec_from_dict(data["prior"])
        if data.get("classifier_prior") is not None:
            merged = {**data["prior"], **data["classifier_prior"]}
            kwargs["classifier_spec"] = _spec_from_dict(merged)
        sweep = data.get("sweep")
        if sweep is not None:
            if not isinstance(sweep, dict) or "parameter" not in sweep or "values" not in sweep:
                raise ConfigError("sweep must be {'parameter': name, 'values': [...]}")
            kwargs["sweep_parameter"] = sweep["parameter"]
            kwargs["sweep_values"] = tuple(sweep["values"])
        if data.get("class_means") is not None:
            kwargs["class_means"] = tuple(tuple(m) for m in data["class_means"])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def _spec_to_dict(spec: ScalarPriorSpec) -> dict:
    return {k: getattr(spec, k) for k in ("d", "nu", "kappa_t", "kappa_s", "k_t", "k_s", "alpha")}


def _spec_from_dict(data: dict) -> ScalarPriorSpec:
    allowed = {"d", "nu", "kappa_t", "kappa_s", "k_t", "k_s", "alpha"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown prior keys: {sorted(unknown)}")
    missing = {"d", "nu", "kappa_t", "kappa_s"} - set(data)
    if missing:
        raise ConfigError(f"prior is missing {sorted(missing)}")
    return ScalarPriorSpec(**{k: data[k] for k in data})


@dataclass(frozen=True)
class ErrorCurve:
    """Per-repetition error rates over a sweep grid.

    The arrays ``obtl``, ``obc`` and ``bayes`` have shape
    ``(n_values, reps_outer, reps_inner)``.
    """

    parameter: str | None
    values: tuple
    obtl: np.ndarray
    obc: np.ndarray
    bayes: np.ndarray

    @property
    def reps(self) -> int:
        return self.obtl.shape[1] * self.obtl.shape[2]

    def _flat(self, name):
        arr = getattr(self, name)
        return arr.reshape(arr.shape[0], -1)

    def mean(self, name: str) -> np.ndarray:
        return self._flat(name).mean(axis=1)

    def std(self, name: str) -> np.ndarray:
        """Sample standard deviation over all repetitions."""
        flat = self._flat(name)
        if flat.shape[1] < 2:
            return np.zeros(flat.shape[0])
        return flat.std(axis=1, ddof=1)

    def standard_error(self, name: str) -> np.ndarray:
        """Standard error of the mean from the outer-repetition means.

        Inner repetitions share true parameters, so they are averaged first.
        """
        outer = getattr(self, name).mean(axis=2)
        if outer.shape[1] < 2:
            return np.full(outer.shape[0], np.nan)
        return outer.std(axis=1, ddof=1) / math.sqrt(outer.shape[1])

    def quantiles(self, name: str, q: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0)) -> np.ndarray:
        """Per-value quantiles of the repetition errors, shape ``(n_values, len(q))``."""
        return np.quantile(self._flat(name), q, axis=1).T

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["sweep_value", "obtl_mean", "obtl_std", "obc_mean", "obc_std", "bayes_mean", "reps"])
        cols = [self.mean("obtl"), self.std("obtl"), self.mean("obc"), self.std("obc"), self.mean("bayes")]
        for i, v in enumerate(self.values):
            writer.writerow(["" if v is None else _fmt(v)] + [_fmt(c[i]) for c in cols] + [self.reps])
        return buf.getvalue()

    def quantiles_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["sweep_value", "classifier", "min", "q25", "median", "q75", "max"])
        for name in ("obtl", "obc", "bayes"):
            qs = self.quantiles(name)
            for i, v in enumerate(self.values):
                writer.writerow(["" if v is None else _fmt(v), name] + [_fmt(x) for x in qs[i]])
        return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def version_string() -> str:
    """Package version plus the git commit of the working tree when available."""
    from importlib.metadata import PackageNotFoundError, version

    try:
        base = version("artifact")
    except PackageNotFoundError:
        base = "0+unknown"
    try:
        desc = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if desc.returncode == 0 and desc.stdout.strip():
            return f"{base}+g{desc.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return base


# --------------------------------------------------------------------------- #
# Core loop
# --------------------------------------------------------------------------- #


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def bayes_error_reference(means: Sequence, precisions: Sequence, X: np.ndarray, y: np.ndarray, priors=None) -> float:
    """Test error of the rule that knows the true Gaussian class densities.

    Parameters
    ----------
    means, precisions : sequences of length L
        True class means and precision matrices.
    X, y : test features and 1-based labels.
    priors : array_like, optional
        True class probabilities; equal when omitted.
    """
    L = len(means)
    priors = np.full(L, 1.0 / L) if priors is None else np.asarray(priors, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    scores = np.empty((X.shape[0], L))
    for l, (mu, lam) in enumerate(zip(means, precisions)):
        lam = lam if isinstance(lam, SpdMatrix) else SpdMatrix(lam)
        diff = X - np.asarray(mu, dtype=float)
        maha = np.einsum("ij,jk,ik->i", diff, lam.matrix, diff)
        scores[:, l] = math.log(priors[l]) + 0.5 * lam.logdet - 0.5 * maha
    pred = np.argmax(scores, axis=1) + 1
    return float(np.mean(pred != np.asarray(y)))


def _true_parameters(cfg: ExperimentConfig, spec: ScalarPriorSpec, outer: int):
    rng = _rng(cfg.seed, outer, _PARAMS)
    params = []
    for hp in cfg.class_hyperparameters(spec):
        L_t, L_s = sample_joint_precisions(hp, rng)
        mu_t = sample_mean_given_precision(hp.m_t, hp.kappa_t, L_t, rng)
        mu_s = sample_mean_given_precision(hp.m_s, hp.kappa_s, L_s, rng)
        params.append((mu_t, L_t, mu_s, L_s))
    return params


def _draw(params, n: int, rng, source: bool):
    return [sample_class_data(p[2] if source else p[0], p[3] if source else p[1], n, rng) for p in params]


def _outer_rep(cfg: ExperimentConfig, outer: int) -> np.ndarray:
    """Errors ``(n_values, 3, reps_inner)`` for one outer repetition."""
    grid = cfg.grid
    out = np.empty((len(grid), 3, cfg.reps_inner))
    truth_cache = {}
    prior = ClassPriorConfig.uniform(cfg.L, cfg.xi)
    mode = cfg.resolved_mode
    for i, value in enumerate(grid):
        true_spec, clf_spec, n_t, n_s = cfg.point(value)
        if true_spec not in truth_cache:
            truth_cache[true_spec] = _true_parameters(cfg, true_spec, outer)
        params = truth_cache[true_spec]
        hps = cfg.class_hyperparameters(clf_spec)
        for inner in range(cfg.reps_inner):
            target = _draw(params, n_t, _rng(cfg.seed, outer, inner, _TARGET), source=False)
            source = _draw(params, n_s, _rng(cfg.seed, outer, inner, _SOURCE), source=True)
            test = _draw(params, cfg.n_test, _rng(cfg.seed, outer, inner, _TEST), source=False)
            X = np.vstack(test)
            y = np.repeat(np.arange(1, cfg.L + 1), cfg.n_test)
            try:
                obtl = fit_obtl(hps, target, source, prior=prior, mode=mode)
                labels_obtl, _ = classify_obtl(obtl, X)
            except NumericError as exc:
                raise type(exc)(f"{exc} [sweep value {value}, outer rep {outer}, inner rep {inner}]") from exc
            labels_obc, _ = classify_obc(fit_obc(hps, target, prior=prior), X)
            out[i, 0, inner] = np.mean(labels_obtl != y)
            out[i, 1, inner] = np.mean(labels_obc != y)
            out[i, 2, inner] = bayes_error_reference([p[0] for p in params], [p[1] for p in params], X, y)
    return out


def _outer_task(args):
    cfg, outer = args
    return _outer_rep(cfg, outer)


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> ErrorCurve:
    """Run the sweep and collect per-repetition errors.

    Outer repetitions are independent and may run in ``workers`` processes;
    results are assembled in repetition order, so serial and parallel runs
    give identical arrays.
    """
    workers = cfg.workers if workers is None else workers
    tasks = [(cfg, r) for r in range(cfg.reps_outer)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_outer_task, tasks))
    else:
        blocks = [_outer_task(t) for t in tasks]
    stacked = np.stack(blocks, axis=1)  # (n_values, outer, 3, inner)
    return ErrorCurve(
        parameter=cfg.sweep_parameter,
        values=cfg.grid,
        obtl=np.ascontiguousarray(stacked[:, :, 0, :]),
        obc=np.ascontiguousarray(stacked[:, :, 1, :]),
        bayes=np.ascontiguousarray(stacked[:, :, 2, :]),
    )


def write_outputs(curve: ErrorCurve, cfg: ExperimentConfig, out: str | Path) -> dict:
    """Write ``<out>`` (curve CSV), ``<out>.quantiles.csv`` and ``<out>.manifest.json``."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(curve.to_csv())
    qpath = out.with_name(out.name + ".quantiles.csv")
    qpath.write_text(curve.quantiles_csv())
    manifest = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "mode": cfg.resolved_mode,
        "version": version_string(),
        "outputs": {"curve": out.name, "quantiles": qpath.name},
    }
    mpath = out.with_name(out.name + ".manifest.json")
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
