"""Command-line front end.

Subcommands
-----------
train-eval  train OBTL (and OBC) from CSV files and score a target test file
simulate    run a synthetic sweep and write the error-curve CSV plus manifest
hypergeom   evaluate a hypergeometric function of matrix argument
prep        standardize and PCA-project a source/target/test triple

Errors are reported as one JSON object on stderr and map to exit codes
by category (see ``EXIT_CODES``).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .errors import ConfigError, ObtlError, TruncationWarning
from .inference import classify_obc, classify_obtl, fit_obc, fit_obtl
from .simulator import ExperimentConfig, run_experiment, write_outputs
from .special import HypergeomParams, SeriesControl, log_gauss_2f1_laplace, hypergeom_series

EXIT_CODES = {"ok": 0, "internal": 1, "usage": 2, "config": 3, "data": 4, "numeric": 5}

_KINDS = {"0F0": (0, 0), "0F1": (0, 1), "1F0": (1, 0), "1F1": (1, 1), "2F1": (2, 1)}

log = logging.getLogger("obtl")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------- #
# train-eval
# --------------------------------------------------------------------------- #


def _confusion(y_true, y_pred, L: int) -> list[list[int]]:
    mat = np.zeros((L, L), dtype=int)
    np.add.at(mat, (y_true - 1, y_pred - 1), 1)
    return mat.tolist()


def cmd_train_eval(args) -> int:
    cfg = io.load_run_config(args.config)
    if args.mode:
        cfg = dataclasses.replace(cfg, mode=args.mode)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    L = cfg.n_classes
    source = io.ingest_csv(cfg.source, cfg.label_column, L, domain="source")
    target = io.ingest_csv(cfg.target, cfg.label_column, L, domain="target", d=source.d)
    test = io.ingest_csv(cfg.test, cfg.label_column, L, domain="target", d=source.d)
    pooled = np.vstack([source.X, target.X]).mean(axis=0) if source.n + target.n else None
    hps = cfg.hyperparameters(pooled)
    if hps[0].d != source.d:
        raise ConfigError(f"prior dimension {hps[0].d} does not match data dimension {source.d}")
    model = fit_obtl(
        hps, target.by_class(L), source.by_class(L), prior=cfg.class_prior, mode=cfg.mode, exact_cap=cfg.exact_cap, ctrl=cfg.series
    )
    labels, scores = classify_obtl(model, test.X)
    report = {
        "mode": model.mode,
        "seed": cfg.seed,
        "n_classes": L,
        "n_test": test.n,
        "obtl": {
            "accuracy": float(np.mean(labels == test.y)),
            "confusion": _confusion(test.y, labels, L),
            "predictions": labels.tolist(),
            "log_scores": scores.tolist(),
        },
    }
    if cfg.with_obc:
        obc = fit_obc(hps, target.by_class(L), prior=cfg.class_prior)
        obc_labels, obc_scores = classify_obc(obc, test.X)
        report["obc"] = {
            "accuracy": float(np.mean(obc_labels == test.y)),
            "confusion": _confusion(test.y, obc_labels, L),
            "predictions": obc_labels.tolist(),
            "log_scores": obc_scores.tolist(),
        }
    if args.save_model:
        io.save_model(model, args.save_model)
    _emit(report, args.out)
    return 0


# --------------------------------------------------------------------------- #
# simulate
# --------------------------------------------------------------------------- #


def cmd_simulate(args) -> int:
    data = io.load_json(args.config)
    data = data.get("experiment", data)
    if args.seed is not None:
        data = {**data, "seed": args.seed}
    if args.mode:
        data = {**data, "mode": args.mode}
    if args.workers is not None:
        data = {**data, "workers": args.workers}
    cfg = ExperimentConfig.from_dict(data)
    curve = run_experiment(cfg)
    out = args.out or "error_curve.csv"
    manifest = write_outputs(curve, cfg, out)
    sys.stdout.write(curve.to_csv())
    log.info("wrote %s (version %s)", out, manifest["version"])
    return 0


# --------------------------------------------------------------------------- #
# hypergeom
# --------------------------------------------------------------------------- #


def cmd_hypergeom(args) -> int:
    p, q = _KINDS[args.kind]
    upper, lower = args.upper or [], args.lower or []
    if len(upper) != p or len(lower) != q:
        raise ConfigError(f"{args.kind} takes {p} upper and {q} lower parameters, got {len(upper)} and {len(lower)}")
    eigs = np.asarray(args.eigenvalues, dtype=float)
    if args.scale is not None:
        eigs = eigs * args.scale
    mode = args.mode or "exact"
    if mode == "laplace" and args.kind != "2F1" and not args.both:
        raise ConfigError("the Laplace approximation is only available for 2F1")
    result = {"kind": args.kind, "upper": upper, "lower": lower, "eigenvalues": eigs.tolist()}
    if mode == "exact" or args.both:
        ctrl = SeriesControl(max_degree=args.max_degree, rel_tol=args.rel_tol)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", TruncationWarning)
            res = hypergeom_series(HypergeomParams(tuple(upper), tuple(lower)), eigs, ctrl)
        result["exact"] = {
            "log_value": res.log_abs if res.sign > 0 else None,
            "value": res.value,
            "sign": res.sign,
            "degree": res.degree,
            "converged": res.converged,
            "warnings": [str(w.message) for w in caught],
        }
    if (mode == "laplace" or args.both) and args.kind == "2F1":
        log_value = log_gauss_2f1_laplace(*upper, *lower, eigs)
        result["laplace"] = {"log_value": log_value, "value": float(np.exp(log_value))}
    if "exact" in result and "laplace" in result and result["exact"]["log_value"] is not None:
        result["log_difference"] = result["laplace"]["log_value"] - result["exact"]["log_value"]
    _emit(result, args.out)
    return 0


# --------------------------------------------------------------------------- #
# prep
# --------------------------------------------------------------------------- #


def cmd_prep(args) -> int:
    data = io.load_json(args.config)
    base = Path(args.config).parent
    try:
        files = data["data"]
        d_out = int(data["d_out"])
    except KeyError as exc:
        raise ConfigError(f"{args.config}: missing key {exc}") from None
    pooling = data.get("pooling", "pooled")
    label = files.get("label_column", "label")
    L = data.get("n_classes")
    try:
        source = io.ingest_csv(base / files["source"], label, L, domain="source")
        target = io.ingest_csv(base / files["target"], label, L, domain="target", d=source.d)
        test = io.ingest_csv(base / files["test"], label, L, domain="target", d=source.d)
    except KeyError as exc:
        raise ConfigError(f"{args.config}: data section is missing {exc}") from None
    s, t, te, pre = io.preprocess(source, target, test, d_out, pooling)
    out = Path(args.out or "prep")
    out.mkdir(parents=True, exist_ok=True)
    for name, ds in (("source", s), ("target", t), ("test", te)):
        io.write_csv(ds, out / f"{name}.csv", label)
    pooled_mean = np.vstack([s.X, t.X]).mean(axis=0)
    manifest = {
        "transform": pre.to_dict(),
        "pooled_mean": pooled_mean.tolist(),
        "mean_pooling": "after",
        "files": {"source": "source.csv", "target": "target.csv", "test": "test.csv"},
        "seed": args.seed if args.seed is not None else data.get("seed", 0),
    }
    (out / "prep_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return 0


# --------------------------------------------------------------------------- #
# entry point
# --------------------------------------------------------------------------- #


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="obtl", description="Bayesian transfer-learning classifier tools")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="output path")

    p = sub.add_parser("train-eval", help="train on CSV files and evaluate on a test CSV")
    common(p)
    p.add_argument("--mode", choices=("exact", "laplace"), default=None)
    p.add_argument("--save-model", default=None, help="write the trained OBTL model as JSON")
    p.set_defaults(func=cmd_train_eval)

    p = sub.add_parser("simulate", help="run a synthetic error-curve sweep")
    common(p)
    p.add_argument("--mode", choices=("exact", "laplace"), default=None)
    p.add_argument("--workers", type=int, default=None, help="parallel processes for outer repetitions")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("hypergeom", help="evaluate pFq of a symmetric matrix from its eigenvalues")
    common(p, config_required=False)
    p.add_argument("--kind", choices=tuple(_KINDS), required=True)
    p.add_argument("--upper", type=_floats, default=None, help="comma-separated upper parameters")
    p.add_argument("--lower", type=_floats, default=None, help="comma-separated lower parameters")
    p.add_argument("--eigenvalues", type=_floats, required=True, help="comma-separated eigenvalues of X")
    p.add_argument("--scale", type=float, default=None, help="multiply all eigenvalues by this factor")
    p.add_argument("--mode", choices=("exact", "laplace"), default=None)
    p.add_argument("--both", action="store_true", help="print exact and Laplace values side by side (2F1)")
    p.add_argument("--max-degree", type=int, default=200)
    p.add_argument("--rel-tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_hypergeom)

    p = sub.add_parser("prep", help="standardize and PCA-project CSV datasets")
    common(p)
    p.set_defaults(func=cmd_prep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ObtlError as exc:
        category = exc.category
        message = str(exc)
        kind = type(exc).__name__
    except Exception as exc:  # noqa: BLE001 - last-resort report for the CLI user
        category, message, kind = "internal", str(exc), type(exc).__name__
    sys.stderr.write(json.dumps({"error": category, "type": kind, "message": message}) + "\n")
    return EXIT_CODES[category]


if __name__ == "__main__":
    sys.exit(main())
