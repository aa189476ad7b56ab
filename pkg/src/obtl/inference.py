"""Posterior updates, effective class-conditional densities and decision rules.

Two classifiers share this module:

* OBTL, whose target posterior is informed by source data through the joint
  Wishart prior; its effective density carries a ratio of Gauss
  hypergeometric functions of matrix argument.
* OBC, the target-only baseline.  Its effective density is a multivariate
  Student-t and is what OBTL reduces to when ``M_ts = 0``.

All densities are returned as logs.  The ``2F1`` factors are evaluated
either with the calibrated Laplace approximation (``mode="laplace"``) or
with the truncated zonal series (``mode="exact"``).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import CurvatureError, DataError, DomainError, SaddlePointError, SeriesConvergenceError
from .model import ClassHyperparameters, SpdMatrix
from .special import (
    HypergeomParams,
    SeriesControl,
    hypergeom_series,
    log_gauss_2f1_laplace_batch,
    log_multivariate_gamma,
)

__all__ = [
    "SufficientStats",
    "PosteriorState",
    "ObcPosterior",
    "ClassPriorConfig",
    "TrainedOBTL",
    "TrainedOBC",
    "sufficient_statistics",
    "posterior_update",
    "posterior_log_density",
    "predictive_update",
    "log_effective_density_obtl",
    "obc_posterior_update",
    "log_effective_density_obc",
    "class_prior_posterior_mean",
    "fit_obtl",
    "fit_obc",
    "classify_obtl",
    "classify_obc",
    "default_mode",
    "exact_control",
]

log = logging.getLogger(__name__)

_LOG_PI = math.log(math.pi)
_EIG_EDGE = 1e-12
MODES = ("laplace", "exact")


def default_mode(d: int) -> str:
    """Exact series for ``d <= 3``, Laplace above."""
    return "exact" if d <= 3 else "laplace"


def exact_control(d: int) -> SeriesControl:
    """Series truncation used by exact-mode density evaluation.

    Posterior ``2F1`` arguments need many more terms than the default control
    because the upper parameters grow with the sample sizes.
    """
    return SeriesControl(max_degree={1: 3000, 2: 300, 3: 80}.get(d, 40), rel_tol=1e-12)


# --------------------------------------------------------------------------- #
# Data summaries and posterior containers
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class SufficientStats:
    """Sample size, sample mean and unnormalized scatter matrix."""

    n: int
    mean: np.ndarray
    scatter: np.ndarray

    @property
    def d(self) -> int:
        return self.scatter.shape[0]


def sufficient_statistics(data, d: int | None = None) -> SufficientStats:
    """``(n, mean, S)`` with ``S = sum (x_i - mean)(x_i - mean)'``.

    An empty sample gives ``n = 0``, a zero scatter and a zero mean (unused);
    pass ``d`` when ``data`` is an empty list.
    """
    X = np.asarray(data, dtype=float)
    if X.size == 0:
        if d is None:
            d = X.shape[1] if X.ndim == 2 else None
        if d is None:
            raise DataError("dimension of an empty sample is unknown; pass d")
        return SufficientStats(0, np.zeros(d), np.zeros((d, d)))
    X = np.atleast_2d(X)
    if d is not None and X.shape[1] != d:
        raise DataError(f"expected {d} features, got {X.shape[1]}")
    mean = X.mean(axis=0)
    centered = X - mean
    S = centered.T @ centered
    return SufficientStats(X.shape[0], mean, 0.5 * (S + S.T))


def _inverse_scale_update(prior_inverse, kappa, m, stats: SufficientStats) -> np.ndarray:
    out = np.array(prior_inverse, dtype=float) + stats.scatter
    if stats.n:
        diff = m - stats.mean
        out += (kappa * stats.n / (kappa + stats.n)) * np.outer(diff, diff)
    return out


@dataclass(frozen=True)
class PosteriorState:
    """Per-class OBTL posterior summary for the target parameters."""

    d: int
    nu: float
    n_t: int
    n_s: int
    kappa_tn: float
    m_tn: np.ndarray
    T_t: SpdMatrix
    T_s: SpdMatrix
    F: np.ndarray

    @property
    def hyp_a(self) -> float:
        return 0.5 * (self.nu + self.n_s)

    @property
    def hyp_b(self) -> float:
        return 0.5 * (self.nu + self.n_t)

    @property
    def hyp_c(self) -> float:
        return 0.5 * self.nu

    @cached_property
    def root_F(self) -> np.ndarray:
        """``T_s^{1/2} F``; every ``2F1`` argument is ``root_F T root_F'``."""
        return self.T_s.sqrt @ self.F

    @cached_property
    def base_eigenvalues(self) -> np.ndarray:
        """Spectrum of ``T_s F T_t F'`` (the argument of the normalizing ``2F1``)."""
        return _clamp_spectrum(_sym_eigvals(self.root_F @ self.T_t.matrix @ self.root_F.T))

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "nu": self.nu,
            "n_t": self.n_t,
            "n_s": self.n_s,
            "kappa_tn": self.kappa_tn,
            "m_tn": self.m_tn.tolist(),
            "T_t": self.T_t.matrix.tolist(),
            "T_s": self.T_s.matrix.tolist(),
            "F": self.F.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PosteriorState":
        d = int(data["d"])
        return cls(
            d=d,
            nu=float(data["nu"]),
            n_t=int(data["n_t"]),
            n_s=int(data["n_s"]),
            kappa_tn=float(data["kappa_tn"]),
            m_tn=np.asarray(data["m_tn"], dtype=float).reshape(d),
            T_t=SpdMatrix(np.asarray(data["T_t"], dtype=float).reshape(d, d)),
            T_s=SpdMatrix(np.asarray(data["T_s"], dtype=float).reshape(d, d)),
            F=np.asarray(data["F"], dtype=float).reshape(d, d),
        )


def _sym_eigvals(G: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(0.5 * (G + np.swapaxes(G, -1, -2)))


def _clamp_spectrum(eigs: np.ndarray) -> np.ndarray:
    """Snap roundoff: tiny negatives to 0 and values just below 1 to ``1 - 1e-12``."""
    eigs = np.where((eigs < 0) & (eigs > -_EIG_EDGE), 0.0, eigs)
    eigs = np.where((eigs >= 1 - _EIG_EDGE) & (eigs < 1 + _EIG_EDGE), 1 - _EIG_EDGE, eigs)
    if np.any(eigs < 0) or np.any(eigs >= 1):
        raise SeriesConvergenceError(
            f"2F1 argument spectrum outside [0, 1): min {eigs.min():.3g}, max {eigs.max():.3g}"
        )
    return eigs


def posterior_update(hp: ClassHyperparameters, stats_t: SufficientStats, stats_s: SufficientStats) -> PosteriorState:
    """Posterior of the target mean and precision given both domains' data.

    Raises
    ------
    FactorizationError
        If an updated scale matrix is not positive definite.
    """
    if stats_t.d != hp.d or stats_s.d != hp.d:
        raise DataError("sufficient statistics do not match the hyperparameter dimension")
    if stats_s.n == 0:
        log.info("class has no source samples; OBTL posterior uses the prior coupling only")
    n_t = stats_t.n
    kappa_tn = hp.kappa_t + n_t
    m_tn = (hp.kappa_t * hp.m_t + n_t * stats_t.mean) / kappa_tn if n_t else hp.m_t.copy()
    FtCF = hp.F.T @ hp.C.matrix @ hp.F
    T_t = SpdMatrix.from_inverse(_inverse_scale_update(hp.M_t.inverse + FtCF, hp.kappa_t, hp.m_t, stats_t))
    T_s = SpdMatrix.from_inverse(_inverse_scale_update(hp.C.inverse, hp.kappa_s, hp.m_s, stats_s))
    state = PosteriorState(
        d=hp.d,
        nu=hp.nu,
        n_t=n_t,
        n_s=stats_s.n,
        kappa_tn=kappa_tn,
        m_tn=m_tn,
        T_t=T_t,
        T_s=T_s,
        F=hp.F.copy(),
    )
    # T_s <= C and T_t <= (M_t^-1 + F'CF)^-1 bound the spectrum of T_s F T_t F'
    # by that of K (M_t^-1 + K'K)^-1 K' with K = C^{1/2} F, which is < 1.
    state.base_eigenvalues
    return state


def posterior_log_density(mu_t, L_t, state: PosteriorState, ctrl: SeriesControl | None = None) -> float:
    """Log posterior density of ``(mu_t, Lambda_t)`` including its normalizer.

    Uses the series for both the ``1F1`` kernel and the ``2F1`` normalizer,
    so this is a small-``d`` diagnostic.
    """
    L_t = L_t if isinstance(L_t, SpdMatrix) else SpdMatrix(L_t)
    mu_t = np.asarray(mu_t, dtype=float).reshape(state.d)
    d, nu, n_t = state.d, state.nu, state.n_t
    a, b, c = state.hyp_a, state.hyp_b, state.hyp_c
    ctrl = ctrl or exact_control(d)

    log_norm = 0.5 * d * math.log(2 * math.pi / state.kappa_tn)
    log_norm += 0.5 * d * (nu + n_t) * math.log(2.0)
    log_norm += log_multivariate_gamma(d, 0.5 * (nu + n_t))
    log_norm += 0.5 * (nu + n_t) * state.T_t.logdet
    log_norm += _log_2f1_exact(a, b, c, state.base_eigenvalues, ctrl)

    diff = mu_t - state.m_tn
    out = -log_norm
    out += 0.5 * L_t.logdet
    out -= 0.5 * state.kappa_tn * float(diff @ L_t.matrix @ diff)
    out += 0.5 * (nu + n_t - d - 1) * L_t.logdet
    out -= 0.5 * float(np.sum(state.T_t.inverse * L_t.matrix))
    kernel = _sym_eigvals(state.root_F @ L_t.matrix @ state.root_F.T)
    kernel = np.clip(kernel, 0.0, None)
    if np.any(kernel):
        out += hypergeom_series(HypergeomParams((a,), (c,)), 0.5 * kernel, ctrl).log_value
    return out


def predictive_update(state: PosteriorState, x) -> tuple[float, SpdMatrix]:
    """``(kappa_x, T_x)`` after folding the query point ``x`` into the posterior."""
    x = np.asarray(x, dtype=float).reshape(state.d)
    kappa_x = state.kappa_tn + 1.0
    v = state.m_tn - x
    inv = state.T_t.inverse + (state.kappa_tn / kappa_x) * np.outer(v, v)
    return kappa_x, SpdMatrix.from_inverse(inv)


# --------------------------------------------------------------------------- #
# Effective densities
# --------------------------------------------------------------------------- #


def _student_log_density(kappa_n: float, m_n: np.ndarray, scale: SpdMatrix, dof: float, X: np.ndarray) -> np.ndarray:
    """Shared Student-t part of both effective densities, batched over rows of ``X``.

    Also returns the quantities OBTL needs for the rank-one update of the scale.
    """
    d = scale.d
    ratio = kappa_n / (kappa_n + 1.0)
    V = m_n[None, :] - X
    U = V @ scale.matrix
    q = np.einsum("ij,ij->i", U, V)
    denom = 1.0 + ratio * q
    logdet_x = scale.logdet - np.log(denom)
    out = (
        -0.5 * d * _LOG_PI
        + 0.5 * d * math.log(ratio)
        + log_multivariate_gamma(d, 0.5 * (dof + 1))
        - log_multivariate_gamma(d, 0.5 * dof)
        + 0.5 * (dof + 1) * logdet_x
        - 0.5 * dof * scale.logdet
    )
    return out, U, ratio / denom


def _log_2f1_exact(a, b, c, eigs, ctrl) -> float:
    if not np.any(eigs):
        return 0.0
    # 2F1(a, b; a; X) = |I - X|^-b, which the series reaches only slowly near 1
    if c == a or c == b:
        return float(-(b if c == a else a) * np.log1p(-eigs).sum())
    return hypergeom_series(HypergeomParams((a, b), (c,)), eigs, ctrl).log_value


def _query_spectra(state: PosteriorState, U: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """Spectra of ``T_s F T_x F'`` for every query, via Sherman-Morrison on ``T_x``."""
    B = state.root_F
    A0 = B @ state.T_t.matrix @ B.T
    W = (U @ B.T) * np.sqrt(weight)[:, None]
    G = A0[None, :, :] - W[:, :, None] * W[:, None, :]
    return _clamp_spectrum(_sym_eigvals(G))


def _obtl_log_density(state: PosteriorState, X: np.ndarray, mode: str, ctrl: SeriesControl | None):
    """Batched log O_OBTL; returns ``(logs, status)`` with Laplace failures flagged."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    base, U, weight = _student_log_density(state.kappa_tn, state.m_tn, state.T_t, state.nu + state.n_t, X)
    a, b, c = state.hyp_a, state.hyp_b, state.hyp_c
    eig_x = _query_spectra(state, U, weight)
    eig_t = state.base_eigenvalues
    if mode == "laplace":
        num, status = log_gauss_2f1_laplace_batch(a, b + 0.5, c, eig_x)
        den, den_status = log_gauss_2f1_laplace_batch(a, b, c, eig_t)
        if den_status[0]:
            status = np.full_like(status, den_status[0])
        return base + num - den[0], status
    ctrl = ctrl or exact_control(state.d)
    den = _log_2f1_exact(a, b, c, eig_t, ctrl)
    num = np.array([_log_2f1_exact(a, b + 0.5, c, e, ctrl) for e in eig_x])
    return base + num - den, np.zeros(X.shape[0], dtype=int)


def _raise_for_status(code: int, context: str):
    if code == 1:
        raise SaddlePointError(f"Laplace saddle point failed ({context})")
    raise CurvatureError(f"Laplace curvature R_2,1 <= 0 ({context})")


def log_effective_density_obtl(state: PosteriorState, x, mode: str = "laplace", ctrl: SeriesControl | None = None):
    """Log effective class-conditional density ``log O_OBTL(x | l)``.

    ``x`` may be a single point ``(d,)`` or a batch ``(n, d)``; the result is a
    float or an array accordingly.

    Raises
    ------
    SaddlePointError, CurvatureError
        In Laplace mode, if the approximation is not defined at some point.
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    logs, status = _obtl_log_density(state, X, mode, ctrl)
    bad = np.nonzero(status)[0]
    if bad.size:
        _raise_for_status(int(status[bad[0]]), f"query index {int(bad[0])}")
    return float(logs[0]) if single else logs


@dataclass(frozen=True)
class ObcPosterior:
    """Target-only Gaussian-Wishart posterior."""

    d: int
    nu: float
    n_t: int
    kappa_tn: float
    m_tn: np.ndarray
    M_tn: SpdMatrix

    @property
    def nu_tn(self) -> float:
        return self.nu + self.n_t

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "nu": self.nu,
            "n_t": self.n_t,
            "kappa_tn": self.kappa_tn,
            "m_tn": self.m_tn.tolist(),
            "M_tn": self.M_tn.matrix.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ObcPosterior":
        d = int(data["d"])
        return cls(
            d=d,
            nu=float(data["nu"]),
            n_t=int(data["n_t"]),
            kappa_tn=float(data["kappa_tn"]),
            m_tn=np.asarray(data["m_tn"], dtype=float).reshape(d),
            M_tn=SpdMatrix(np.asarray(data["M_tn"], dtype=float).reshape(d, d)),
        )


def obc_posterior_update(hp: ClassHyperparameters, stats_t: SufficientStats) -> ObcPosterior:
    """Conjugate Gaussian-Wishart update from target data alone (``M_ts`` ignored)."""
    if stats_t.d != hp.d:
        raise DataError("sufficient statistics do not match the hyperparameter dimension")
    n_t = stats_t.n
    kappa_tn = hp.kappa_t + n_t
    m_tn = (hp.kappa_t * hp.m_t + n_t * stats_t.mean) / kappa_tn if n_t else hp.m_t.copy()
    M_tn = SpdMatrix.from_inverse(_inverse_scale_update(hp.M_t.inverse, hp.kappa_t, hp.m_t, stats_t))
    return ObcPosterior(d=hp.d, nu=hp.nu, n_t=n_t, kappa_tn=kappa_tn, m_tn=m_tn, M_tn=M_tn)


def log_effective_density_obc(post: ObcPosterior, x):
    """Log effective density of the OBC (a multivariate Student-t), batched like OBTL."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    logs, _, _ = _student_log_density(post.kappa_tn, post.m_tn, post.M_tn, post.nu_tn, np.atleast_2d(X))
    return float(logs[0]) if single else logs


# --------------------------------------------------------------------------- #
# Class priors and classifiers
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class ClassPriorConfig:
    """Dirichlet concentrations ``xi`` for the target class probabilities."""

    xi: tuple[float, ...]

    def __post_init__(self):
        xi = tuple(float(v) for v in self.xi)
        if not xi or any(not v > 0 for v in xi):
            raise DomainError("Dirichlet concentrations must all be positive")
        object.__setattr__(self, "xi", xi)

    @classmethod
    def uniform(cls, L: int, xi: float = 1.0) -> "ClassPriorConfig":
        return cls((xi,) * L)


def class_prior_posterior_mean(cfg: ClassPriorConfig, counts: Sequence[int]) -> np.ndarray:
    """Posterior mean ``(xi_l + n_l) / (N + xi_0)`` of each class probability."""
    xi = np.asarray(cfg.xi)
    n = np.asarray(counts, dtype=float)
    if n.shape != xi.shape:
        raise DataError(f"expected {xi.size} class counts, got {n.size}")
    return (xi + n) / (n.sum() + xi.sum())


@dataclass(frozen=True)
class TrainedOBTL:
    states: tuple[PosteriorState, ...]
    prior: ClassPriorConfig
    counts: tuple[int, ...]
    mode: str = "laplace"
    exact_cap: int = 3
    ctrl: SeriesControl | None = None

    def __post_init__(self):
        if len(self.states) < 2:
            raise DataError("need at least two classes")
        if len({s.d for s in self.states}) != 1:
            raise DataError("all classes must share the feature dimension")
        if len(self.counts) != len(self.states) or len(self.prior.xi) != len(self.states):
            raise DataError("counts and Dirichlet prior must have one entry per class")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def d(self) -> int:
        return self.states[0].d

    @property
    def n_classes(self) -> int:
        return len(self.states)

    def to_dict(self) -> dict:
        return {
            "kind": "obtl",
            "mode": self.mode,
            "exact_cap": self.exact_cap,
            "xi": list(self.prior.xi),
            "counts": list(self.counts),
            "classes": [s.to_dict() for s in self.states],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainedOBTL":
        return cls(
            states=tuple(PosteriorState.from_dict(c) for c in data["classes"]),
            prior=ClassPriorConfig(tuple(data["xi"])),
            counts=tuple(int(n) for n in data["counts"]),
            mode=data.get("mode", "laplace"),
            exact_cap=int(data.get("exact_cap", 3)),
        )


@dataclass(frozen=True)
class TrainedOBC:
    posteriors: tuple[ObcPosterior, ...]
    prior: ClassPriorConfig
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.posteriors) < 2:
            raise DataError("need at least two classes")
        if len(self.counts) != len(self.posteriors) or len(self.prior.xi) != len(self.posteriors):
            raise DataError("counts and Dirichlet prior must have one entry per class")

    @property
    def d(self) -> int:
        return self.posteriors[0].d

    def to_dict(self) -> dict:
        return {
            "kind": "obc",
            "xi": list(self.prior.xi),
            "counts": list(self.counts),
            "classes": [p.to_dict() for p in self.posteriors],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainedOBC":
        return cls(
            posteriors=tuple(ObcPosterior.from_dict(c) for c in data["classes"]),
            prior=ClassPriorConfig(tuple(data["xi"])),
            counts=tuple(int(n) for n in data["counts"]),
        )


def _class_stats(samples, d):
    return [sufficient_statistics(np.asarray(s, dtype=float).reshape(-1, d), d) for s in samples]


def fit_obtl(
    hyperparameters: Sequence[ClassHyperparameters],
    target: Sequence,
    source: Sequence,
    prior: ClassPriorConfig | None = None,
    mode: str | None = None,
    exact_cap: int = 3,
    ctrl: SeriesControl | None = None,
) -> TrainedOBTL:
    """Train OBTL from per-class target and source samples (lists of ``(n_l, d)`` arrays)."""
    L = len(hyperparameters)
    if len(target) != L or len(source) != L:
        raise DataError("need one target and one source sample per class")
    d = hyperparameters[0].d
    st_t, st_s = _class_stats(target, d), _class_stats(source, d)
    states = tuple(posterior_update(hp, t, s) for hp, t, s in zip(hyperparameters, st_t, st_s))
    return TrainedOBTL(
        states=states,
        prior=prior or ClassPriorConfig.uniform(L),
        counts=tuple(s.n for s in st_t),
        mode=mode or default_mode(d),
        exact_cap=exact_cap,
        ctrl=ctrl,
    )


def fit_obc(hyperparameters: Sequence[ClassHyperparameters], target: Sequence, prior: ClassPriorConfig | None = None) -> TrainedOBC:
    """Train the target-only OBC."""
    L = len(hyperparameters)
    if len(target) != L:
        raise DataError("need one target sample per class")
    d = hyperparameters[0].d
    st_t = _class_stats(target, d)
    return TrainedOBC(
        posteriors=tuple(obc_posterior_update(hp, t) for hp, t in zip(hyperparameters, st_t)),
        prior=prior or ClassPriorConfig.uniform(L),
        counts=tuple(s.n for s in st_t),
    )


def _decide(scores: np.ndarray, single: bool):
    labels = np.argmax(scores, axis=1) + 1  # argmax keeps the first maximum
    if single:
        return int(labels[0]), scores[0]
    return labels, scores


def classify_obtl(model: TrainedOBTL, x):
    """OBTL decision: ``argmax_l log E[c_l] + log O_OBTL(x | l)``.

    Labels are 1-based and ties go to the lowest class index.  Returns
    ``(label, scores)`` for one point or ``(labels, scores)`` for a batch.

    If the Laplace approximation fails for any class at a point, that point
    is re-scored for every class with the exact series when
    ``model.d <= model.exact_cap``; otherwise the error is raised.
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != model.d:
        raise DataError(f"expected {model.d} features, got {X.shape[1]}")
    scores = np.empty((X.shape[0], model.n_classes))
    failed = np.zeros(X.shape[0], dtype=int)
    for l, state in enumerate(model.states):
        scores[:, l], status = _obtl_log_density(state, X, model.mode, model.ctrl)
        failed = np.where(failed == 0, status, failed)
    bad = np.nonzero(failed)[0]
    if bad.size:
        if model.d > model.exact_cap:
            _raise_for_status(int(failed[bad[0]]), f"query index {int(bad[0])}, d={model.d} above exact cap")
        log.warning("Laplace failed at %d point(s); re-scoring them with the exact series", bad.size)
        for l, state in enumerate(model.states):
            scores[bad, l], _ = _obtl_log_density(state, X[bad], "exact", model.ctrl)
    scores += np.log(class_prior_posterior_mean(model.prior, model.counts))[None, :]
    return _decide(scores, single)


def classify_obc(model: TrainedOBC, x):
    """OBC decision with the same conventions as :func:`classify_obtl`."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != model.d:
        raise DataError(f"expected {model.d} features, got {X.shape[1]}")
    scores = np.column_stack([log_effective_density_obc(p, X) for p in model.posteriors])
    scores = scores + np.log(class_prior_posterior_mean(model.prior, model.counts))[None, :]
    return _decide(scores, single)
