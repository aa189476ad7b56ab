"""Special functions of scalar and symmetric-matrix argument.

The hypergeometric function of one matrix argument

    pFq(a; b; X) = sum_k sum_{kappa |- k} [prod (a_i)_kappa / prod (b_j)_kappa] C_kappa(X) / k!

depends on ``X`` only through its eigenvalues, so every routine here takes
the spectrum rather than the matrix.  Zonal polynomials ``C_kappa`` are
expanded in the monomial symmetric functions with James' recurrence; the
coefficient tables are built once per ``(k, d)`` and cached.

The truncated series is the exact reference path.  It is meant for small
``d`` and moderate degree; :func:`log_gauss_2f1_laplace` is the scalable
approximation of the Gauss function used by the classifier.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .errors import (
    CurvatureError,
    DomainError,
    SaddlePointError,
    SeriesConvergenceError,
    TruncationWarning,
)

__all__ = [
    "Partition",
    "HypergeomParams",
    "SeriesControl",
    "SeriesResult",
    "log_multivariate_gamma",
    "enumerate_partitions",
    "gen_pochhammer",
    "zonal_polynomial",
    "hypergeom_series",
    "log_gauss_2f1_laplace",
    "log_gauss_2f1_laplace_batch",
]

_LOG_PI = math.log(math.pi)


# --------------------------------------------------------------------------- #
# Scalar pieces
# --------------------------------------------------------------------------- #


def log_multivariate_gamma(d: int, alpha: float) -> float:
    """Logarithm of the multivariate gamma function ``Gamma_d(alpha)``.

    Parameters
    ----------
    d : int
        Dimension, ``d >= 1``.
    alpha : float
        Argument; must exceed ``(d - 1) / 2``.

    Raises
    ------
    DomainError
        If ``alpha <= (d - 1) / 2``.
    """
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    if not alpha > (d - 1) / 2:
        raise DomainError(f"log_multivariate_gamma needs alpha > (d-1)/2; got d={d}, alpha={alpha}")
    shifts = alpha - 0.5 * np.arange(d)
    return float(0.25 * d * (d - 1) * _LOG_PI + gammaln(shifts).sum())


def _log_rising(x, n):
    """Sign-tracked log of the rising factorial ``(x)_n``, elementwise.

    Returns ``(log|(x)_n|, sign)``; ``sign`` is 0 where the product vanishes.
    """
    x, n = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(n, dtype=float))
    logabs = np.zeros(x.shape)
    sign = np.ones(x.shape)

    pole = (x <= 0) & (x == np.round(x))
    regular = ~pole
    if regular.any():
        xr, nr = x[regular], n[regular]
        logabs[regular] = gammaln(xr + nr) - gammaln(xr)
        # sign of Gamma(x+n)/Gamma(x) for real x: (-1)^(number of negative factors)
        neg = np.where(xr < 0, np.minimum(nr, np.ceil(-xr)), 0.0)
        sign[regular] = np.where(neg % 2 == 0, 1.0, -1.0)
    if pole.any():
        m, nn = -x[pole], n[pole]
        vanish = nn > m
        # (x)_n = (-1)^n m! / (m-n)! for x = -m, n <= m
        la = gammaln(m + 1) - gammaln(np.maximum(m - nn, 0) + 1)
        logabs[pole] = np.where(vanish, -np.inf, la)
        sign[pole] = np.where(vanish, 0.0, np.where(nn % 2 == 0, 1.0, -1.0))
    return logabs, sign


# --------------------------------------------------------------------------- #
# Partitions
# --------------------------------------------------------------------------- #


class Partition(tuple):
    """Integer partition stored as a non-increasing tuple of positive parts.

    Trailing zeros are accepted and dropped, so ``Partition((2, 1, 0))`` equals
    ``Partition((2, 1))``.
    """

    def __new__(cls, parts: Sequence[int] = ()):
        parts = [int(p) for p in parts]
        while parts and parts[-1] == 0:
            parts.pop()
        if any(p < 1 for p in parts):
            raise ValueError(f"partition parts must be positive: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"partition parts must be non-increasing: {parts}")
        return super().__new__(cls, parts)

    @property
    def parts(self) -> tuple[int, ...]:
        return tuple(self)

    @property
    def weight(self) -> int:
        return sum(self)

    def __repr__(self) -> str:
        return f"Partition({tuple(self)!r})"


def _partitions(k: int, max_parts: int, largest: int):
    if k == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(min(k, largest), 0, -1):
        # the remaining max_parts-1 parts can hold at most first*(max_parts-1)
        if first * max_parts < k:
            break
        for rest in _partitions(k - first, max_parts - 1, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _partition_tuples(k: int, max_parts: int) -> tuple[tuple[int, ...], ...]:
    return tuple(_partitions(k, max_parts, k))


def enumerate_partitions(k: int, max_parts: int) -> list[Partition]:
    """All partitions of ``k`` with at most ``max_parts`` parts.

    Ordered lexicographically decreasing, so ``(k)`` comes first.  For
    ``k == 0`` the single empty partition is returned.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if max_parts < 1:
        raise ValueError("max_parts must be >= 1")
    return [Partition(p) for p in _partition_tuples(k, max_parts)]


def gen_pochhammer(a: float, kappa: Sequence[int]) -> float:
    """Generalized Pochhammer symbol ``(a)_kappa = prod_i (a - (i-1)/2)_{k_i}``."""
    parts = np.asarray(Partition(kappa), dtype=float)
    if parts.size == 0:
        return 1.0
    logabs, sign = _log_rising(a - 0.5 * np.arange(parts.size), parts)
    s = float(np.prod(sign))
    return 0.0 if s == 0 else s * math.exp(float(logabs.sum()))


# --------------------------------------------------------------------------- #
# Zonal polynomials
# --------------------------------------------------------------------------- #


def _rho(parts: Sequence[int]) -> int:
    return sum(k * (k - i) for i, k in enumerate(parts, start=1))


def _dominates(kappa: Sequence[int], lam: Sequence[int]) -> bool:
    sk = sl = 0
    for i in range(max(len(kappa), len(lam))):
        sk += kappa[i] if i < len(kappa) else 0
        sl += lam[i] if i < len(lam) else 0
        if sk < sl:
            return False
    return True


def _log_zonal_at_identity(parts: Sequence[int], d: int) -> float:
    """``log C_kappa(I_d)`` in closed form (Muirhead, Thm 7.2.7)."""
    k = sum(parts)
    p = len(parts)
    if p > d:
        return -math.inf
    if p == 0:
        return 0.0
    out = 2 * k * math.log(2.0) + math.lgamma(k + 1)
    la, _ = _log_rising(0.5 * d - 0.5 * np.arange(p), np.asarray(parts, dtype=float))
    out += float(la.sum())
    for i in range(p):
        for j in range(i + 1, p):
            out += math.log(2 * parts[i] - 2 * parts[j] - i + j)
        out -= math.lgamma(2 * parts[i] + p - (i + 1) + 1)
    return out


def _log_monomial_count(parts: Sequence[int], d: int) -> float:
    """log of ``m_lambda(1, ..., 1)``: the number of distinct rearrangements."""
    mult: dict[int, int] = {}
    for v in list(parts) + [0] * (d - len(parts)):
        mult[v] = mult.get(v, 0) + 1
    return math.lgamma(d + 1) - sum(math.lgamma(m + 1) for m in mult.values())


@dataclass(frozen=True)
class _ZonalTable:
    """Everything needed to evaluate all ``C_kappa``, ``kappa |- k``, in ``d`` variables."""

    k: int
    d: int
    parts: tuple[tuple[int, ...], ...]
    padded: np.ndarray  # (P, d) int
    log_identity: np.ndarray  # (P,) log C_kappa(I_d)
    coef: np.ndarray = field(repr=False)  # (P, P) monomial coefficients, row = kappa
    exponents: np.ndarray = field(repr=False)  # (N, d) distinct rearrangements
    segments: np.ndarray = field(repr=False)  # (P,) start row in ``exponents``

    def monomials(self, x: np.ndarray) -> np.ndarray:
        vals = np.prod(x[None, :] ** self.exponents, axis=1)
        return np.add.reduceat(vals, self.segments)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.coef @ self.monomials(x)


@lru_cache(maxsize=None)
def _partition_table(k: int, d: int):
    parts = _partition_tuples(k, d)
    padded = np.zeros((len(parts), d), dtype=int)
    for r, p in enumerate(parts):
        padded[r, : len(p)] = p
    log_identity = np.array([_log_zonal_at_identity(p, d) for p in parts])
    return parts, padded, log_identity


@lru_cache(maxsize=None)
def _zonal_table(k: int, d: int) -> _ZonalTable:
    parts, padded, log_identity = _partition_table(k, d)
    P = len(parts)
    index = {p: j for j, p in enumerate(parts)}
    rho = np.array([_rho(p) for p in parts], dtype=float)

    # dominance mask: dom[r, j] true when parts[r] dominates parts[j]
    cums = np.cumsum(padded, axis=1)
    dom = np.all(cums[:, None, :] >= cums[None, :, :], axis=2)

    # James' recurrence with c_{kappa,kappa} = 1, rows normalized afterwards
    U = np.zeros((P, P))
    for j, lam in enumerate(parts):
        U[j, j] = 1.0
        rows = np.nonzero(dom[:j, j])[0]
        if rows.size == 0:
            continue
        num = np.zeros(rows.size)
        m = len(lam)
        for i in range(m):
            for jj in range(i + 1, m):
                for t in range(1, lam[jj] + 1):
                    mu = list(lam)
                    mu[i] += t
                    mu[jj] -= t
                    mu = tuple(sorted((v for v in mu if v), reverse=True))
                    num += ((lam[i] + t) - (lam[jj] - t)) * U[rows, index[mu]]
        U[rows, j] = num / (rho[rows] - rho[j])

    log_counts = np.array([_log_monomial_count(p, d) for p in parts])
    u_at_one = U @ np.exp(log_counts)
    coef = U * np.exp(log_identity - np.log(u_at_one))[:, None]

    rows_exp = []
    segments = []
    for p in padded:
        segments.append(len(rows_exp))
        rows_exp.extend(sorted(set(permutations(p.tolist())), reverse=True))
    return _ZonalTable(
        k=k,
        d=d,
        parts=parts,
        padded=padded,
        log_identity=log_identity,
        coef=coef,
        exponents=np.array(rows_exp, dtype=int).reshape(-1, d),
        segments=np.array(segments, dtype=int),
    )


def zonal_polynomial(kappa: Sequence[int], eigenvalues: Sequence[float]) -> float:
    """Zonal polynomial ``C_kappa(X)`` for a symmetric ``X`` with the given spectrum.

    Normalized so that ``sum_{kappa |- k} C_kappa(X) = tr(X)^k``.  A partition
    with more parts than ``len(eigenvalues)`` gives exactly 0.
    """
    kappa = Partition(kappa)
    x = np.asarray(eigenvalues, dtype=float).ravel()
    d = x.size
    if d < 1:
        raise ValueError("need at least one eigenvalue")
    if len(kappa) > d:
        return 0.0
    table = _zonal_table(kappa.weight, d)
    row = table.parts.index(tuple(kappa))
    return float(table.coef[row] @ table.monomials(x))


# --------------------------------------------------------------------------- #
# Truncated hypergeometric series
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class HypergeomParams:
    upper: tuple[float, ...] = ()
    lower: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "upper", tuple(float(a) for a in self.upper))
        object.__setattr__(self, "lower", tuple(float(b) for b in self.lower))

    def check(self, d: int) -> None:
        for b in self.lower:
            for i in range(d):
                shifted = b - 0.5 * i
                if shifted <= 0 and shifted == round(shifted):
                    raise DomainError(
                        f"lower parameter {b} makes (b)_kappa vanish in dimension {d}"
                    )


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy: stop once a degree layer is below ``rel_tol`` of the running sum."""

    max_degree: int = 40
    rel_tol: float = 1e-12

    def __post_init__(self):
        if self.max_degree < 0:
            raise ValueError("max_degree must be >= 0")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")


@dataclass(frozen=True)
class SeriesResult:
    """Value of a truncated series, kept as ``sign * exp(log_abs)``."""

    log_abs: float
    sign: float
    degree: int
    converged: bool

    @property
    def value(self) -> float:
        return self.sign * math.exp(self.log_abs) if self.sign else 0.0

    @property
    def log_value(self) -> float:
        if self.sign <= 0:
            raise DomainError("series sum is not positive; log undefined")
        return self.log_abs

    def __float__(self) -> float:
        return self.value


class _LogAccumulator:
    """Running signed sum kept as ``S * exp(M)`` to survive huge terms."""

    def __init__(self):
        self.M = 0.0
        self.S = 0.0

    def add(self, log_abs: float, sign: float) -> float:
        """Add a term; return its magnitude relative to the updated total."""
        if sign == 0 or log_abs == -math.inf:
            return 0.0
        if self.S == 0.0:
            self.M, self.S = log_abs, float(sign)
            return 1.0
        if log_abs > self.M:
            self.S = self.S * math.exp(self.M - log_abs) + sign
            self.M = log_abs
            term = 1.0
        else:
            term = math.exp(log_abs - self.M)
            self.S += sign * term
        return term / abs(self.S) if self.S != 0 else math.inf

    def result(self):
        if self.S == 0.0:
            return -math.inf, 0.0
        return self.M + math.log(abs(self.S)), math.copysign(1.0, self.S)


def _coef_logs(params: HypergeomParams, padded: np.ndarray):
    """log|prod (a)_kappa / prod (b)_kappa| and its sign for each row of ``padded``."""
    d = padded.shape[1]
    shifts = 0.5 * np.arange(d)
    logc = np.zeros(padded.shape[0])
    sign = np.ones(padded.shape[0])
    for a in params.upper:
        la, sa = _log_rising(a - shifts[None, :], padded)
        logc += la.sum(axis=1)
        sign *= sa.prod(axis=1)
    for b in params.lower:
        lb, sb = _log_rising(b - shifts[None, :], padded)
        logc -= lb.sum(axis=1)
        sign *= sb.prod(axis=1)
    return logc, sign


def _layer(params, x, k, d, equal):
    """Degree-``k`` layer of the series as ``(log|layer|, sign)``."""
    if equal:
        parts, padded, log_identity = _partition_table(k, d)
        zon_log = log_identity + (k * math.log(abs(x[0])) if k else 0.0)
        zon_sign = np.full(len(parts), 1.0 if (x[0] > 0 or k % 2 == 0) else -1.0)
    else:
        table = _zonal_table(k, d)
        padded = table.padded
        zon = table.evaluate(x)
        with np.errstate(divide="ignore"):
            zon_log = np.log(np.abs(zon))
        zon_sign = np.sign(zon)
    logc, csign = _coef_logs(params, padded)
    logs = logc + zon_log - math.lgamma(k + 1)
    signs = csign * zon_sign
    live = signs != 0
    if not live.any():
        return -math.inf, 0.0
    top = logs[live].max()
    s = float(np.sum(signs[live] * np.exp(logs[live] - top)))
    if s == 0.0:
        return -math.inf, 0.0
    return top + math.log(abs(s)), math.copysign(1.0, s)


def _scalar_series(params, x, ctrl):
    k = np.arange(ctrl.max_degree + 1, dtype=float)
    logs = -gammaln(k + 1)
    signs = np.ones_like(k)
    for a in params.upper:
        la, sa = _log_rising(a, k)
        logs += la
        signs *= sa
    for b in params.lower:
        lb, sb = _log_rising(b, k)
        logs -= lb
        signs *= sb
    if x == 0.0:
        return SeriesResult(0.0, 1.0, 0, True)
    logs += k * math.log(abs(x))
    if x < 0:
        signs *= np.where(k % 2 == 0, 1.0, -1.0)
    live = signs != 0
    top = logs[live].max()
    scaled = np.where(live, signs * np.exp(np.where(live, logs - top, 0.0)), 0.0)
    cums = np.cumsum(scaled)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(scaled) / np.abs(cums)
    small = np.nonzero(rel[1:] < ctrl.rel_tol)[0]
    if small.size:
        stop, converged = int(small[0]) + 1, True
    else:
        stop, converged = ctrl.max_degree, ctrl.max_degree == 0
    total = cums[stop]
    if total == 0.0:
        return SeriesResult(-math.inf, 0.0, stop, converged)
    return SeriesResult(top + math.log(abs(total)), math.copysign(1.0, total), stop, converged)


def hypergeom_series(
    params: HypergeomParams,
    eigenvalues: Sequence[float],
    ctrl: SeriesControl | None = None,
) -> SeriesResult:
    """Truncated ``pFq`` of a symmetric matrix argument given by its spectrum.

    Sums whole degree layers ``k = 0, 1, ...`` and stops at the first layer
    whose magnitude is below ``ctrl.rel_tol`` times the running total, or at
    ``ctrl.max_degree``.  Hitting the cap emits :class:`TruncationWarning` and
    sets ``converged=False`` on the result.

    Raises
    ------
    SeriesConvergenceError
        For ``p = q + 1`` when the spectral radius is ``>= 1``, and for
        ``p > q + 1`` with a nonzero argument.
    DomainError
        If a lower parameter zeroes a generalized Pochhammer denominator.
    """
    ctrl = ctrl or SeriesControl()
    x = np.asarray(eigenvalues, dtype=float).ravel()
    d = x.size
    if d < 1:
        raise ValueError("need at least one eigenvalue")
    if not np.all(np.isfinite(x)):
        raise DomainError("eigenvalues must be finite")
    params.check(d)
    p, q = len(params.upper), len(params.lower)
    radius = float(np.abs(x).max())
    if p == q + 1 and radius >= 1:
        raise SeriesConvergenceError(f"{p}F{q} needs spectral radius < 1, got {radius}")
    if p > q + 1 and radius > 0:
        raise SeriesConvergenceError(f"{p}F{q} diverges for a nonzero argument")

    if d == 1:
        res = _scalar_series(params, float(x[0]), ctrl)
    elif radius == 0.0:
        res = SeriesResult(0.0, 1.0, 0, True)
    else:
        equal = bool(np.all(x == x[0]))
        acc = _LogAccumulator()
        acc.add(0.0, 1.0)
        converged = ctrl.max_degree == 0
        k = 0
        for k in range(1, ctrl.max_degree + 1):
            rel = acc.add(*_layer(params, x, k, d, equal))
            if rel < ctrl.rel_tol:
                converged = True
                break
        log_abs, sign = acc.result()
        res = SeriesResult(log_abs, sign, k, converged)
    if not res.converged:
        warnings.warn(
            f"series truncated at degree {ctrl.max_degree} before reaching rel_tol={ctrl.rel_tol}",
            TruncationWarning,
            stacklevel=2,
        )
    return res


# --------------------------------------------------------------------------- #
# Calibrated Laplace approximation of 2F1
# --------------------------------------------------------------------------- #

_OK, _SADDLE, _CURVATURE = 0, 1, 2


def _laplace_core(a: float, b: float, c: float, x: np.ndarray):
    """Vectorized calibrated Laplace ``log 2F1``; ``x`` has shape ``(n, d)``.

    Returns ``(logs, status)`` with status 0 (ok), 1 (saddle), 2 (curvature).
    Failed entries hold NaN.
    """
    n, d = x.shape
    logs = np.zeros(n)
    status = np.zeros(n, dtype=int)
    if a == 0.0 or b == 0.0:
        return logs, status
    # c equal to a or b collapses 2F1 to the closed form 1F0
    if c == a or c == b:
        other = b if c == a else a
        return -other * np.log1p(-x).sum(axis=1), status

    zero = x == 0.0
    tau = x * (b - a) - c
    disc = tau * tau - 4.0 * a * x * (c - b)
    with np.errstate(invalid="ignore", divide="ignore"):
        y = np.where(zero, a / c, 2.0 * a / (np.sqrt(disc) - tau))
        r1 = y / a
        r2 = (1.0 - y) / (c - a)
        r3 = 1.0 - x * y
        ok = (disc >= 0) & np.isfinite(y) & (r1 > 0) & (r2 > 0) & (r3 > 0)
        per = a * np.log(r1) + (c - a) * np.log(r2) - b * np.log(r3)
        per = np.where(zero, -c * math.log(c), per)
        lcoef = x * y * (1.0 - y) / r3
        iu, ju = np.triu_indices(d)
        rij = (
            y[:, iu] * y[:, ju] / a
            + (1.0 - y[:, iu]) * (1.0 - y[:, ju]) / (c - a)
            - b * lcoef[:, iu] * lcoef[:, ju] / (a * (c - a))
        )
        log_r = np.log(np.abs(rij)).sum(axis=1)
        neg = (rij < 0).sum(axis=1)
        curv_ok = np.all(rij != 0, axis=1) & (neg % 2 == 0)

    saddle_ok = ok.all(axis=1)
    logs = (c * d - 0.25 * d * (d + 1)) * math.log(c) - 0.5 * log_r + per.sum(axis=1)
    status[~curv_ok] = _CURVATURE
    status[~saddle_ok] = _SADDLE
    logs[status != _OK] = np.nan
    logs[zero.all(axis=1)] = 0.0
    status[zero.all(axis=1)] = _OK
    return logs, status


def _check_laplace_domain(c: float, x: np.ndarray) -> None:
    d = x.shape[-1]
    if not c > (d - 1) / 2:
        raise DomainError(f"Laplace 2F1 needs c > (d-1)/2; got c={c}, d={d}")
    if not np.all(np.isfinite(x)):
        raise DomainError("eigenvalues must be finite")
    if np.any(x >= 1):
        raise DomainError("Laplace 2F1 needs every eigenvalue < 1")


def log_gauss_2f1_laplace_batch(a: float, b: float, c: float, eigenvalues) -> tuple[np.ndarray, np.ndarray]:
    """Batched Laplace ``log 2F1`` over rows of an ``(n, d)`` eigenvalue array.

    Does not raise on saddle or curvature failures; instead returns a status
    array (0 ok, 1 saddle, 2 curvature) alongside the values so that callers
    can route failures elsewhere.
    """
    x = np.atleast_2d(np.asarray(eigenvalues, dtype=float))
    _check_laplace_domain(c, x)
    return _laplace_core(float(a), float(b), float(c), x)


def log_gauss_2f1_laplace(a: float, b: float, c: float, eigenvalues: Sequence[float]) -> float:
    """Calibrated Laplace approximation of ``log 2F1(a, b; c; X)``.

    The approximation is normalized to be exact at ``X = 0``.  It is applied
    even when ``c - a < (d - 1) / 2``, where the underlying integral
    representation no longer holds; in that regime the saddle point
    ``y_hat`` exceeds 1 and the factor ``(1 - y_hat) / (c - a)`` stays
    positive.

    Raises
    ------
    SaddlePointError
        Complex saddle point, or one of ``y_hat / a``, ``(1 - y_hat) / (c - a)``,
        ``1 - x y_hat`` not positive.
    CurvatureError
        If the Hessian determinant ``R_{2,1}`` is not positive.
    """
    x = np.asarray(eigenvalues, dtype=float).reshape(1, -1)
    _check_laplace_domain(c, x)
    logs, status = _laplace_core(float(a), float(b), float(c), x)
    if status[0] == _SADDLE:
        raise SaddlePointError(f"no admissible saddle point for a={a}, b={b}, c={c}")
    if status[0] == _CURVATURE:
        raise CurvatureError(f"R_2,1 <= 0 for a={a}, b={b}, c={c}")
    return float(logs[0])
