"""Hypergeometric functions of a matrix argument.

Walks through the zonal-polynomial series, a few closed forms it must
reproduce, and the Laplace approximation of 2F1 used at higher dimension.

Run with ``python3 demos/hypergeometric_functions.py``.
"""

import numpy as np

from obtl.special import (
    HypergeomParams,
    SeriesControl,
    enumerate_partitions,
    hypergeom_series,
    log_gauss_2f1_laplace,
    zonal_polynomial,
)

# %% Partitions and zonal polynomials
# Zonal polynomials of degree k, summed over partitions of k, give (tr X)^k.
eigs = np.array([0.3, -0.1, 0.2])
for k in range(1, 5):
    parts = list(enumerate_partitions(k, len(eigs)))
    total = sum(zonal_polynomial(p, eigs) for p in parts)
    print(f"k={k}: {len(parts)} partitions, sum C_kappa = {total:.12f}, (tr X)^k = {eigs.sum() ** k:.12f}")

# %% Closed forms
# 0F0 is exp(tr X) and 1F0(a) is det(I - X)^-a.
ctrl = SeriesControl(max_degree=200, rel_tol=1e-14)
print("0F0:", hypergeom_series(HypergeomParams(), eigs, ctrl).value, np.exp(eigs.sum()))
print("1F0:", hypergeom_series(HypergeomParams((2.5,), ()), eigs, ctrl).value, np.prod(1 - eigs) ** -2.5)

# %% Laplace versus series for 2F1(3, 4; 6; tau I_5)
print("\n tau    series log    laplace log    gap")
for tau in (0.05, 0.1, 0.2, 0.3, 0.4, 0.5):
    x = [tau] * 5
    exact = hypergeom_series(HypergeomParams((3.0, 4.0), (6.0,)), x, SeriesControl(200, 1e-12))
    approx = log_gauss_2f1_laplace(3.0, 4.0, 6.0, x)
    print(f"{tau:5.2f}  {exact.log_value:12.6f}  {approx:12.6f}  {abs(approx - exact.log_value):.2e}")
