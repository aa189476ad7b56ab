"""From raw CSV files to a trained model with the CLI.

Writes toy source/target/test CSVs, reduces them to two principal
components with ``obtl prep``, then runs ``obtl train-eval`` on the result.

Run with ``python3 demos/csv_prep.py``.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from obtl.cli import main
from obtl.io import LabeledDataset, write_csv

rng = np.random.default_rng(0)
work = Path(tempfile.mkdtemp(prefix="obtl_demo_"))


def toy(n, shift, domain):
    y = rng.integers(1, 3, size=n)
    X = rng.normal(size=(n, 6)) + np.outer(y - 1.5, np.linspace(1, 0, 6)) + shift
    return LabeledDataset(X, y, domain=domain)


write_csv(toy(300, 0.5, "source"), work / "raw_source.csv")
write_csv(toy(20, 0.0, "target"), work / "raw_target.csv")
write_csv(toy(400, 0.0, "target"), work / "raw_test.csv")

# %% Standardize and project with statistics from training rows only
prep_cfg = {
    "data": {"source": "raw_source.csv", "target": "raw_target.csv", "test": "raw_test.csv"},
    "d_out": 2,
    "pooling": "pooled",
    "n_classes": 2,
}
(work / "prep.json").write_text(json.dumps(prep_cfg))
main(["prep", "--config", str(work / "prep.json"), "--out", str(work / "prep")])
print(json.loads((work / "prep" / "prep_manifest.json").read_text())["transform"]["explained_variance"])

# %% Train and evaluate on the reduced data
run_cfg = {
    "n_classes": 2,
    "data": {"source": "prep/source.csv", "target": "prep/target.csv", "test": "prep/test.csv"},
    "prior": {"d": 2, "nu": 8, "kappa_t": 1, "kappa_s": 1, "alpha": 0.8},
    "class_means": "pooled",
    "seed": 0,
}
(work / "run.json").write_text(json.dumps(run_cfg))
main(["train-eval", "--config", str(work / "run.json"), "--out", str(work / "metrics.json")])
metrics = json.loads((work / "metrics.json").read_text())
print("accuracy:", {k: metrics[k]["accuracy"] for k in ("obtl", "obc") if k in metrics})
