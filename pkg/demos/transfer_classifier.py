"""Training and using the transfer classifier on synthetic two-domain data.

Draws coupled source/target precision matrices from the joint prior,
samples a small target training set and a large source set, and compares
the transfer classifier against the target-only baseline.

Run with ``python3 demos/transfer_classifier.py``.
"""

import numpy as np

from obtl import (
    ScalarPriorSpec,
    build_hyperparameters,
    classify_obc,
    classify_obtl,
    fit_obc,
    fit_obtl,
)
from obtl.model import sample_class_data, sample_joint_precisions, sample_mean_given_precision

rng = np.random.default_rng(5)
d, n_t, n_s, n_test = 4, 6, 150, 2000

# %% Prior: strong positive coupling between domains
hps = [
    build_hyperparameters(ScalarPriorSpec(d=d, nu=12, kappa_t=50, kappa_s=50, alpha=0.9, m_t=m, m_s=m + 1))
    for m in (0.0, 0.3)
]

# %% Draw one "true" world and data from it
target, source, test_X, test_y = [], [], [], []
for label, hp in enumerate(hps, start=1):
    lam_t, lam_s = sample_joint_precisions(hp, rng)
    mu_t = sample_mean_given_precision(hp.m_t, hp.kappa_t, lam_t.matrix, rng)
    mu_s = sample_mean_given_precision(hp.m_s, hp.kappa_s, lam_s.matrix, rng)
    target.append(sample_class_data(mu_t, lam_t.matrix, n_t, rng))
    source.append(sample_class_data(mu_s, lam_s.matrix, n_s, rng))
    test_X.append(sample_class_data(mu_t, lam_t.matrix, n_test // 2, rng))
    test_y.append(np.full(n_test // 2, label))
test_X, test_y = np.vstack(test_X), np.concatenate(test_y)

# %% Fit and score
obtl = fit_obtl(hps, target, source, mode="laplace")
obc = fit_obc(hps, target)
pred_obtl, scores = classify_obtl(obtl, test_X)
pred_obc, _ = classify_obc(obc, test_X)
print(f"target-only error: {np.mean(pred_obc != test_y):.3f}")
print(f"transfer error:    {np.mean(pred_obtl != test_y):.3f}")
print("log scores of the first three test points:\n", scores[:3])

# %% Model files are plain JSON
model_dict = obtl.to_dict()
print("model kind:", model_dict["kind"], "| keys:", sorted(model_dict))
