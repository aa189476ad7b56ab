"""A small synthetic sweep over the number of source samples.

The target-only classifier ignores source data, so its error is flat in
n_s; the transfer classifier improves as n_s grows.  Uses a reduced
budget so it runs in a few seconds.

Run with ``python3 demos/synthetic_sweep.py``.
"""

from obtl import ScalarPriorSpec
from obtl.simulator import ExperimentConfig, run_experiment

cfg = ExperimentConfig(
    spec=ScalarPriorSpec(d=10, nu=25, kappa_t=100, kappa_s=100, alpha=0.9),
    n_t=10,
    reps_outer=20,
    reps_inner=5,
    seed=1,
    sweep_parameter="n_s",
    sweep_values=(0, 25, 100, 400),
)
curve = run_experiment(cfg)
print(curve.to_csv())

# %% Standard errors come from the outer-repetition means
for v, m, se in zip(curve.values, curve.mean("obtl"), curve.standard_error("obtl")):
    print(f"n_s={v:>4}: transfer error {m:.3f} +/- {se:.3f}")
