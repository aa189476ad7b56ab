"""Gaussian-Wishart transfer model: hyperparameters, prior densities, samplers.

Each class carries a joint Wishart prior on the pair of precision matrices
``(Lambda_t, Lambda_s)`` obtained by marginalizing the cross block of a
``2d x 2d`` Wishart matrix with scale ``M = [[M_t, M_ts], [M_ts', M_s]]``.
The coupling enters only through ``C = M_s - M_ts' M_t^-1 M_ts`` and
``F = C^-1 M_ts' M_t^-1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import linalg

from .errors import ConfigError, DomainError, FactorizationError
from .special import HypergeomParams, SeriesControl, hypergeom_series, log_multivariate_gamma

__all__ = [
    "SpdMatrix",
    "ClassHyperparameters",
    "ScalarPriorSpec",
    "build_hyperparameters",
    "derive_coupling",
    "wishart_log_density",
    "joint_prior_log_density",
    "sample_wishart",
    "sample_joint_precisions",
    "sample_class_data",
    "sample_mean_given_precision",
]

_SYMMETRY_TOL = 1e-8


class SpdMatrix:
    """Symmetric positive-definite matrix with a cached lower Cholesky factor.

    The input is symmetrized on construction; inputs that are visibly
    non-symmetric (relative asymmetry above 1e-8) are rejected.

    Raises
    ------
    FactorizationError
        If the Cholesky factorization fails.
    """

    def __init__(self, matrix):
        a = np.array(matrix, dtype=float, copy=True)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise FactorizationError("matrix has non-finite entries")
        scale = max(float(np.abs(a).max()), 1e-300)
        if float(np.abs(a - a.T).max()) > _SYMMETRY_TOL * scale:
            raise DomainError("matrix is not symmetric")
        a = 0.5 * (a + a.T)
        try:
            chol = np.linalg.cholesky(a)
        except np.linalg.LinAlgError as exc:
            raise FactorizationError("matrix is not positive definite") from exc
        a.setflags(write=False)
        chol.setflags(write=False)
        self.matrix = a
        self.chol = chol

    @classmethod
    def from_inverse(cls, inverse) -> "SpdMatrix":
        """Build ``A`` from ``A^-1`` without forming an explicit general inverse."""
        inv = SpdMatrix(inverse)
        return cls(inv.inverse)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def logdet(self) -> float:
        return float(2.0 * np.log(np.diag(self.chol)).sum())

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = linalg.cho_solve((self.chol, True), np.eye(self.d))
        inv = 0.5 * (inv + inv.T)
        inv.setflags(write=False)
        return inv

    @cached_property
    def sqrt(self) -> np.ndarray:
        """Symmetric positive-definite square root."""
        w, v = np.linalg.eigh(self.matrix)
        root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
        root = 0.5 * (root + root.T)
        root.setflags(write=False)
        return root

    def solve(self, b):
        return linalg.cho_solve((self.chol, True), b)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self) -> str:
        return f"SpdMatrix(d={self.d}, logdet={self.logdet:.6g})"


def _as_spd(m) -> SpdMatrix:
    return m if isinstance(m, SpdMatrix) else SpdMatrix(m)


def _vector(v, d: int, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = np.full(d, float(arr))
    if arr.shape != (d,):
        raise ConfigError(f"{name} must have length {d}, got shape {arr.shape}")
    return arr


def derive_coupling(M_t, M_s, M_ts) -> tuple[SpdMatrix, np.ndarray]:
    """Schur complement ``C`` and coupling matrix ``F`` of the block scale matrix.

    Returns ``C = M_s - M_ts' M_t^-1 M_ts`` and ``F = C^-1 M_ts' M_t^-1``.

    Raises
    ------
    FactorizationError
        If ``C`` is not positive definite, i.e. the block matrix is not.
    """
    M_t, M_s = _as_spd(M_t), _as_spd(M_s)
    M_ts = np.asarray(M_ts, dtype=float).reshape(M_t.d, M_s.d)
    mt_inv_mts = M_t.solve(M_ts)
    C = SpdMatrix(M_s.matrix - M_ts.T @ mt_inv_mts)
    F = C.solve(mt_inv_mts.T)
    return C, F


@dataclass(frozen=True)
class ClassHyperparameters:
    """Prior block for one class.

    ``C`` and ``F`` are derived from the scale blocks on construction and the
    ``2d x 2d`` block matrix is checked for positive definiteness.
    """

    nu: float
    kappa_t: float
    kappa_s: float
    m_t: np.ndarray
    m_s: np.ndarray
    M_t: SpdMatrix
    M_s: SpdMatrix
    M_ts: np.ndarray
    C: SpdMatrix = field(init=False, repr=False)
    F: np.ndarray = field(init=False, repr=False)
    M: SpdMatrix = field(init=False, repr=False)

    def __post_init__(self):
        M_t, M_s = _as_spd(self.M_t), _as_spd(self.M_s)
        d = M_t.d
        if M_s.d != d:
            raise ConfigError("M_t and M_s must have the same dimension")
        M_ts = np.array(self.M_ts, dtype=float).reshape(d, d)
        if not self.nu >= 2 * d:
            raise ConfigError(f"nu must be >= 2d = {2 * d}, got {self.nu}")
        if not (self.kappa_t > 0 and self.kappa_s > 0):
            raise ConfigError("kappa_t and kappa_s must be positive")
        try:
            M = SpdMatrix(np.block([[M_t.matrix, M_ts], [M_ts.T, M_s.matrix]]))
        except FactorizationError as exc:
            raise FactorizationError("block scale matrix [[M_t, M_ts], [M_ts', M_s]] is not positive definite") from exc
        C, F = derive_coupling(M_t, M_s, M_ts)
        set_ = object.__setattr__
        set_(self, "nu", float(self.nu))
        set_(self, "kappa_t", float(self.kappa_t))
        set_(self, "kappa_s", float(self.kappa_s))
        set_(self, "m_t", _vector(self.m_t, d, "m_t"))
        set_(self, "m_s", _vector(self.m_s, d, "m_s"))
        set_(self, "M_t", M_t)
        set_(self, "M_s", M_s)
        set_(self, "M_ts", M_ts)
        set_(self, "M", M)
        set_(self, "C", C)
        set_(self, "F", F)

    @property
    def d(self) -> int:
        return self.M_t.d

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "nu": self.nu,
            "kappa_t": self.kappa_t,
            "kappa_s": self.kappa_s,
            "m_t": self.m_t.tolist(),
            "m_s": self.m_s.tolist(),
            "M_t": self.M_t.matrix.tolist(),
            "M_s": self.M_s.matrix.tolist(),
            "M_ts": self.M_ts.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClassHyperparameters":
        d = int(data["d"])
        blocks = {k: np.asarray(data[k], dtype=float).reshape(d, d) for k in ("M_t", "M_s", "M_ts")}
        return cls(
            nu=data["nu"],
            kappa_t=data["kappa_t"],
            kappa_s=data["kappa_s"],
            m_t=data["m_t"],
            m_s=data["m_s"],
            **blocks,
        )


@dataclass(frozen=True)
class ScalarPriorSpec:
    """Isotropic prior: ``M_t = k_t I``, ``M_s = k_s I``, ``M_ts = alpha sqrt(k_t k_s) I``."""

    d: int
    nu: float
    kappa_t: float
    kappa_s: float
    m_t: Sequence[float] | float = 0.0
    m_s: Sequence[float] | float = 0.0
    k_t: float = 1.0
    k_s: float = 1.0
    alpha: float = 0.0

    def __post_init__(self):
        if self.d < 1:
            raise ConfigError("d must be >= 1")
        if not (self.k_t > 0 and self.k_s > 0):
            raise ConfigError("k_t and k_s must be positive")
        if not abs(self.alpha) < 1:
            raise ConfigError(f"|alpha| must be < 1, got {self.alpha}")


def build_hyperparameters(spec: ScalarPriorSpec) -> ClassHyperparameters:
    """Expand a :class:`ScalarPriorSpec` into full per-class hyperparameters."""
    eye = np.eye(spec.d)
    return ClassHyperparameters(
        nu=spec.nu,
        kappa_t=spec.kappa_t,
        kappa_s=spec.kappa_s,
        m_t=spec.m_t,
        m_s=spec.m_s,
        M_t=spec.k_t * eye,
        M_s=spec.k_s * eye,
        M_ts=spec.alpha * math.sqrt(spec.k_t * spec.k_s) * eye,
    )


def wishart_log_density(L, M, nu: float) -> float:
    """Log density of ``W_d(M, nu)`` at ``L``."""
    L, M = _as_spd(L), _as_spd(M)
    d = M.d
    if not nu >= d:
        raise DomainError(f"Wishart needs nu >= d = {d}, got {nu}")
    log_norm = 0.5 * nu * d * math.log(2.0) + log_multivariate_gamma(d, 0.5 * nu) + 0.5 * nu * M.logdet
    trace = float(np.sum(M.inverse * L.matrix))
    return 0.5 * (nu - d - 1) * L.logdet - 0.5 * trace - log_norm


def _spectrum(root: np.ndarray, F: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``root F inner F' root`` (symmetric by construction)."""
    B = root @ F
    G = B @ inner @ B.T
    return np.linalg.eigvalsh(0.5 * (G + G.T))


def joint_prior_log_density(L_t, L_s, hp: ClassHyperparameters, ctrl: SeriesControl | None = None) -> float:
    """Log of the joint prior density of ``(Lambda_t, Lambda_s)``.

    Evaluates the ``0F1(nu/2; G/4)`` factor with the truncated series, so it
    is only practical for small ``d``.  Truncation warnings propagate.
    """
    L_t, L_s = _as_spd(L_t), _as_spd(L_s)
    d, nu = hp.d, hp.nu
    log_k = -(d * nu * math.log(2.0) + 2 * log_multivariate_gamma(d, 0.5 * nu) + 0.5 * nu * hp.M.logdet)
    prec_t = hp.M_t.inverse + hp.F.T @ hp.C.matrix @ hp.F
    out = log_k
    out -= 0.5 * float(np.sum(prec_t * L_t.matrix))
    out -= 0.5 * float(np.sum(hp.C.inverse * L_s.matrix))
    out += 0.5 * (nu - d - 1) * (L_t.logdet + L_s.logdet)
    g = _spectrum(L_s.sqrt, hp.F, L_t.matrix)
    if np.any(g != 0):
        out += hypergeom_series(HypergeomParams((), (0.5 * nu,)), 0.25 * g, ctrl).log_value
    return out


def sample_wishart(M, nu: float, rng: np.random.Generator) -> SpdMatrix:
    """Draw from ``W_d(M, nu)`` by the Bartlett decomposition.

    ``nu`` may be non-integer; the diagonal of the Bartlett factor uses
    chi-square variates with ``nu - i`` degrees of freedom.
    """
    M = _as_spd(M)
    d = M.d
    if not nu >= d:
        raise DomainError(f"Wishart needs nu >= d = {d}, got {nu}")
    A = np.zeros((d, d))
    A[np.diag_indices(d)] = np.sqrt(rng.chisquare(nu - np.arange(d)))
    il = np.tril_indices(d, k=-1)
    A[il] = rng.standard_normal(il[0].size)
    LA = M.chol @ A
    return SpdMatrix(LA @ LA.T)


def sample_joint_precisions(hp: ClassHyperparameters, rng: np.random.Generator) -> tuple[SpdMatrix, SpdMatrix]:
    """Joint draw of ``(Lambda_t, Lambda_s)``: the diagonal blocks of a ``W_2d(M, nu)`` draw."""
    d = hp.d
    W = sample_wishart(hp.M, hp.nu, rng).matrix
    return SpdMatrix(W[:d, :d]), SpdMatrix(W[d:, d:])


def sample_class_data(mu, L, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Gaussian draws with mean ``mu`` and covariance ``L^-1``, shape ``(n, d)``."""
    L = _as_spd(L)
    mu = np.asarray(mu, dtype=float)
    if n < 0:
        raise ValueError("n must be >= 0")
    z = rng.standard_normal((L.d, n))
    # L = R R'  =>  R'^-1 z has covariance L^-1
    return mu + linalg.solve_triangular(L.chol.T, z, lower=False).T


def sample_mean_given_precision(m, kappa: float, L, rng: np.random.Generator) -> np.ndarray:
    """One draw from ``N(m, (kappa L)^-1)``."""
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    L = _as_spd(L)
    z = rng.standard_normal(L.d)
    return np.asarray(m, dtype=float) + linalg.solve_triangular(L.chol.T, z, lower=False) / math.sqrt(kappa)
