"""Command-line front end.

Exit codes: 0 success, 1 config or input error, 2 internal invariant
violation. Every experiment command writes a metrics document plus a manifest
that suffices to re-execute the run byte-for-byte (see `rerun`).
"""

from __future__ import annotations

import dataclasses
import os
import sys
import traceback
from pathlib import Path

import click

from . import __version__
from .data import (
    FeaturePolicy,
    GraphDataset,
    build_node_features,
    dataset_fingerprint,
    generate_synthetic,
    parse_tudataset,
    write_tudataset,
)
from .errors import InputError, InvariantViolation
from .reporting import (
    load_manifest,
    manifest_document,
    metrics_document,
    render_table,
    trend_report,
    write_artifact,
)
from .training import ExperimentResult, TrainConfig, gradient_suite, run_experiment

DATA_DIR_VAR = "GLAUG_DATA_DIR"


# ------------------------------------------------------------- resolution


def _resolve_dataset(path_str: str, name: str | None, features: str | None):
    """Locate and parse a TUDataset directory; returns (dataset, policy string).

    The path is tried as given, then under $GLAUG_DATA_DIR. The manifest
    stores `path_str` exactly as typed so reruns resolve the same way.
    """
    name = name or Path(path_str).name
    tried = []
    for base in (Path(path_str), *(
        [Path(os.environ[DATA_DIR_VAR]) / path_str] if os.environ.get(DATA_DIR_VAR) else []
    )):
        tried.append(base)
        if (base / f"{name}_A.txt").is_file():
            ds = parse_tudataset(base, name)
            break
    else:
        raise InputError(
            f"no dataset named {name!r} at " + " or ".join(str(t) for t in tried)
        )
    if features:
        policy = FeaturePolicy.parse(features)
        ds = build_node_features(ds, policy)
    else:
        has_labels = ds.graphs[0].node_labels is not None
        policy = FeaturePolicy("one_hot_node_labels") if has_labels else FeaturePolicy(
            "degree_one_hot", 10
        )
    return ds, policy.spelled()


def _parse_floats(text: str, flag: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise InputError(f"{flag}: expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise InputError(f"{flag}: empty value list")
    return values


def _fmt_summary(label: str, result: ExperimentResult) -> str:
    return (
        f"{label}: mean test accuracy "
        f"{result.mean_accuracy * 100:.2f} ± {result.std_accuracy * 100:.2f} "
        f"over {len(result.folds)} folds"
    )


def _mean_rate(result: ExperimentResult) -> float:
    return sum(f.label_invariant_rate for f in result.folds) / len(result.folds)


def _mean_chosen(result: ExperimentResult) -> float | None:
    vals = [f.mean_chosen_prob for f in result.folds if f.mean_chosen_prob is not None]
    return sum(vals) / len(vals) if vals else None


def _emit_trends(trends: list[dict]) -> None:
    for t in trends:
        if t["holds"]:
            click.echo(f"trend ok: {t['name']} ({t['detail']})")
        else:
            click.echo(f"warning: trend failed: {t['name']} ({t['detail']})", err=True)


# ------------------------------------------------------------- executors
#
# Command bodies are factored out so `rerun` can re-dispatch from a manifest.


def _exec_run(ds, path_str, policy, cfg: TrainConfig, out: Path, workers: int) -> None:
    result = run_experiment(ds, cfg, workers=workers)
    write_artifact(out / "metrics.json", metrics_document(cfg, policy, ds, path_str, result))
    write_artifact(
        out / "manifest.json",
        manifest_document("run", cfg, policy, ds, path_str, ["metrics.json"]),
    )
    click.echo(_fmt_summary(f"{ds.name} @ {cfg.label_ratio:g} labels", result))


def _exec_sweep_eta(ds, path_str, policy, cfg, out, workers, values: list[float]) -> None:
    runs = []
    for eta in values:
        sub = dataclasses.replace(cfg, eta=eta)
        runs.append(({"eta": eta}, run_experiment(ds, sub, workers=workers)))
    rows = [
        [eta["eta"], r.mean_accuracy, r.std_accuracy, _mean_rate(r)] for eta, r in runs
    ]
    write_artifact(
        out / "sweep_eta.tsv",
        render_table(["eta", "mean_accuracy", "std_accuracy", "mean_invariant_rate"], rows),
    )
    write_artifact(out / "metrics.json", metrics_document(cfg, policy, ds, path_str, runs))
    write_artifact(
        out / "manifest.json",
        manifest_document(
            "sweep-eta", cfg, policy, ds, path_str,
            ["metrics.json", "sweep_eta.tsv"], extra={"values": values},
        ),
    )
    for (key, r) in runs:
        click.echo(_fmt_summary(f"eta={key['eta']:g}", r))


def _exec_ablate_strategy(ds, path_str, policy, cfg, out, workers) -> None:
    strategies = ["hardest", "random", "easiest"]
    runs = []
    for strategy in strategies:
        sub = dataclasses.replace(cfg, strategy=strategy)
        runs.append(({"strategy": strategy}, run_experiment(ds, sub, workers=workers)))
    by = {key["strategy"]: r for key, r in runs}

    def chosen_cell(r):
        c = _mean_chosen(r)
        return c if c is not None else float("nan")  # all selections fell back

    rows = [
        [s, by[s].mean_accuracy, by[s].std_accuracy, chosen_cell(by[s]), _mean_rate(by[s])]
        for s in strategies
    ]
    trends = [
        trend_report(
            "hardest_accuracy_at_least_easiest",
            by["hardest"].mean_accuracy >= by["easiest"].mean_accuracy,
            f"hardest {by['hardest'].mean_accuracy:.4f} vs easiest "
            f"{by['easiest'].mean_accuracy:.4f}",
        )
    ]
    chosen = [_mean_chosen(by[s]) for s in strategies]
    if all(c is not None for c in chosen):
        trends.append(
            trend_report(
                "chosen_prob_ordered",
                chosen[0] <= chosen[1] <= chosen[2],
                "mean chosen target prob "
                + " <= ".join(f"{s}:{c:.4f}" for s, c in zip(strategies, chosen)),
            )
        )
    write_artifact(
        out / "ablate_strategy.tsv",
        render_table(
            ["strategy", "mean_accuracy", "std_accuracy", "mean_chosen_prob", "mean_invariant_rate"],
            rows,
        ),
    )
    write_artifact(
        out / "metrics.json", metrics_document(cfg, policy, ds, path_str, runs, trends)
    )
    write_artifact(
        out / "manifest.json",
        manifest_document(
            "ablate-strategy", cfg, policy, ds, path_str,
            ["metrics.json", "ablate_strategy.tsv"],
        ),
    )
    for key, r in runs:
        click.echo(_fmt_summary(key["strategy"], r))
    _emit_trends(trends)


def _exec_ablate_negatives(ds, path_str, policy, cfg, out, workers) -> None:
    if cfg.batch_size < 2:
        raise InputError("negative-pair ablation needs batch_size >= 2")
    without = run_experiment(ds, dataclasses.replace(cfg, negative_pairs=False), workers=workers)
    with_neg = run_experiment(ds, dataclasses.replace(cfg, negative_pairs=True), workers=workers)
    runs = [({"negative_pairs": False}, without), ({"negative_pairs": True}, with_neg)]
    paired = [
        w.test_accuracy - wo.test_accuracy for w, wo in zip(with_neg.folds, without.folds)
    ]
    delta = sum(paired) / len(paired)
    rows = [
        ["without_negatives", without.mean_accuracy, without.std_accuracy],
        ["with_negatives", with_neg.mean_accuracy, with_neg.std_accuracy],
    ]
    write_artifact(
        out / "ablate_negatives.tsv",
        render_table(["mode", "mean_accuracy", "std_accuracy"], rows),
    )
    trends = [
        trend_report(
            "positive_pairs_only_at_least_with_negatives",
            delta <= 0,
            f"paired mean delta (with - without) = {delta:+.4f}",
        )
    ]
    write_artifact(
        out / "metrics.json", metrics_document(cfg, policy, ds, path_str, runs, trends)
    )
    write_artifact(
        out / "manifest.json",
        manifest_document(
            "ablate-negatives", cfg, policy, ds, path_str,
            ["metrics.json", "ablate_negatives.tsv"],
            extra={"temperature": cfg.temperature},
        ),
    )
    click.echo(_fmt_summary("without negatives", without))
    click.echo(_fmt_summary("with negatives", with_neg))
    click.echo(f"paired delta (with - without): {delta * 100:+.2f} accuracy points")
    _emit_trends(trends)


def _exec_invariant_rate(ds, path_str, policy, cfg, out, workers, ratios: list[float]) -> None:
    runs = []
    for ratio in ratios:
        sub = dataclasses.replace(cfg, label_ratio=ratio)
        runs.append(({"label_ratio": ratio}, run_experiment(ds, sub, workers=workers)))
    rows = [
        [key["label_ratio"], _mean_rate(r), r.mean_accuracy] for key, r in runs
    ]
    rates = [_mean_rate(r) for _, r in runs]
    trends = []
    if len(rates) >= 2:
        trends.append(
            trend_report(
                "invariant_rate_nondecreasing_in_label_ratio",
                all(a <= b + 1e-12 for a, b in zip(rates, rates[1:])),
                "rates " + ", ".join(f"{ratio:g}:{rate:.4f}" for ratio, rate in zip(ratios, rates)),
            )
        )
    write_artifact(
        out / "invariant_rate.tsv",
        render_table(["label_ratio", "mean_invariant_rate", "mean_accuracy"], rows),
    )
    write_artifact(
        out / "metrics.json", metrics_document(cfg, policy, ds, path_str, runs, trends)
    )
    write_artifact(
        out / "manifest.json",
        manifest_document(
            "invariant-rate", cfg, policy, ds, path_str,
            ["metrics.json", "invariant_rate.tsv"], extra={"ratios": ratios},
        ),
    )
    for key, r in runs:
        click.echo(f"label ratio {key['label_ratio']:g}: mean invariant rate {_mean_rate(r):.4f}")
    _emit_trends(trends)


# ------------------------------------------------------------------- group


@click.group(name="glaug")
@click.version_option(version=__version__)
def cli():
    """Label-invariant representation-space augmentation experiments."""


def train_options(fn):
    opts = [
        click.option("--name", default=None, help="Dataset name (default: directory basename)."),
        click.option("--features", default=None,
                      help="one_hot_node_labels | degree_one_hot:CAP | constant_one."),
        click.option("--label-ratio", type=float, default=0.5, show_default=True),
        click.option("--eta", type=float, default=1.0, show_default=True),
        click.option("--k", "num_candidates", type=int, default=10, show_default=True,
                      help="Perturbation candidates per graph."),
        click.option("--strategy", type=click.Choice(["hardest", "random", "easiest"]),
                      default="hardest", show_default=True),
        click.option("--alpha", type=float, default=1.0, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--epochs", type=int, default=100, show_default=True),
        click.option("--dist-scope", type=click.Choice(["batch", "dataset"]),
                      default="batch", show_default=True),
        click.option("--lr", "learning_rate", type=float, default=1e-3, show_default=True),
        click.option("--batch-size", type=int, default=32, show_default=True),
        click.option("--hidden", type=int, default=128, show_default=True),
        click.option("--proj-dim", type=int, default=128, show_default=True),
        click.option("--depth", type=int, default=3, show_default=True),
        click.option("--temperature", type=float, default=0.5, show_default=True,
                      help="NT-Xent temperature (negatives mode only)."),
        click.option("--out", type=click.Path(path_type=Path), default=Path("runs"),
                      show_default=True),
        click.option("--parallel-folds", "workers", type=int, default=1, show_default=True),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


CFG_FIELD_NAMES = {f.name for f in dataclasses.fields(TrainConfig)}


def _build(kw: dict) -> tuple[TrainConfig, dict]:
    cfg = TrainConfig(**{k: v for k, v in kw.items() if k in CFG_FIELD_NAMES})
    rest = {k: v for k, v in kw.items() if k not in CFG_FIELD_NAMES}
    return cfg, rest


@cli.command("run")
@click.argument("dataset_path")
@click.option("--negative-pairs", is_flag=True, default=False,
              help="Use the NT-Xent loss with in-batch negatives.")
@train_options
def cmd_run(dataset_path, **kw):
    """Full 10-fold experiment on one dataset."""
    cfg, rest = _build(kw)
    ds, policy = _resolve_dataset(dataset_path, rest["name"], rest["features"])
    _exec_run(ds, dataset_path, policy, cfg, rest["out"], rest["workers"])


@cli.command("sweep-eta")
@click.argument("dataset_path")
@click.option("--values", default="0.1,0.5,1.0,2.0", show_default=True,
              help="Comma-separated eta values.")
@train_options
def cmd_sweep_eta(dataset_path, values, **kw):
    """One experiment per perturbation magnitude, fold-matched."""
    cfg, rest = _build(kw)
    etas = _parse_floats(values, "--values")
    ds, policy = _resolve_dataset(dataset_path, rest["name"], rest["features"])
    _exec_sweep_eta(ds, dataset_path, policy, cfg, rest["out"], rest["workers"], etas)


@cli.command("ablate-strategy")
@click.argument("dataset_path")
@train_options
def cmd_ablate_strategy(dataset_path, **kw):
    """Fold-matched comparison of hardest / random / easiest selection."""
    cfg, rest = _build(kw)
    ds, policy = _resolve_dataset(dataset_path, rest["name"], rest["features"])
    _exec_ablate_strategy(ds, dataset_path, policy, cfg, rest["out"], rest["workers"])


@cli.command("ablate-negatives")
@click.argument("dataset_path")
@train_options
def cmd_ablate_negatives(dataset_path, **kw):
    """Paired runs with and without in-batch negative pairs."""
    cfg, rest = _build(kw)
    ds, policy = _resolve_dataset(dataset_path, rest["name"], rest["features"])
    _exec_ablate_negatives(ds, dataset_path, policy, cfg, rest["out"], rest["workers"])


@cli.command("invariant-rate")
@click.argument("dataset_path", required=False)
@click.option("--ratios", default="0.3,0.5,0.7", show_default=True)
@click.option("--from-run", "from_run", type=click.Path(path_type=Path), default=None,
              help="Report rates recorded in an existing metrics.json instead of retraining.")
@train_options
def cmd_invariant_rate(dataset_path, ratios, from_run, **kw):
    """Label-invariant rate across label ratios (retrains per ratio)."""
    if from_run is not None:
        import json

        try:
            doc = json.loads(Path(from_run).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read metrics document {from_run}: {exc}") from None
        if doc.get("schema") != "glaug-metrics/1" or "folds" not in doc:
            raise InputError(f"{from_run}: not a single-run metrics document")
        rates = [f["label_invariant_rate"] for f in doc["folds"]]
        ratio = doc["config"]["label_ratio"]
        click.echo(render_table(
            ["label_ratio", "mean_invariant_rate"], [[ratio, sum(rates) / len(rates)]]
        ).rstrip("\n"))
        return
    if dataset_path is None:
        raise InputError("provide a dataset path or --from-run")
    cfg, rest = _build(kw)
    ratio_values = _parse_floats(ratios, "--ratios")
    ds, policy = _resolve_dataset(dataset_path, rest["name"], rest["features"])
    _exec_invariant_rate(
        ds, dataset_path, policy, cfg, rest["out"], rest["workers"], ratio_values
    )


@cli.command("gradcheck")
@click.option("--size", type=click.Choice(["small", "full"]), default="small", show_default=True)
def cmd_gradcheck(size):
    """Finite-difference check of every op and the composed objective."""
    checks = gradient_suite(size)
    failed = []
    for name, err in checks:
        ok = err < 1e-4
        click.echo(f"{name}: max rel err {err:.2e} {'ok' if ok else 'FAIL'}")
        if not ok:
            failed.append(name)
    if failed:
        raise InvariantViolation(f"gradient checks failed: {', '.join(failed)}")
    click.echo(f"all {len(checks)} gradient checks passed")


@cli.command("gen-synth")
@click.option("--graphs", type=int, default=60, show_default=True)
@click.option("--classes", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--sizes", default="8,12", show_default=True, help="Node-count range lo,hi.")
@click.option("--densities", default="0.1,0.9", show_default=True,
              help="Edge density per class, comma-separated.")
@click.option("--name", default="SYNTH", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def cmd_gen_synth(graphs, classes, seed, sizes, densities, name, out):
    """Write a synthetic dataset in the four-file text layout."""
    lo_hi = _parse_floats(sizes, "--sizes")
    if len(lo_hi) != 2:
        raise InputError("--sizes needs exactly lo,hi")
    dens = tuple(_parse_floats(densities, "--densities"))
    ds = generate_synthetic(
        graphs, classes, (int(lo_hi[0]), int(lo_hi[1])), dens, seed, name=name
    )
    write_tudataset(ds, out, name)
    click.echo(f"wrote {len(ds)} graphs to {out}")


@cli.command("rerun")
@click.argument("manifest_path", type=click.Path(path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Destination directory (default: alongside the manifest).")
@click.option("--parallel-folds", "workers", type=int, default=1, show_default=True)
def cmd_rerun(manifest_path, out, workers):
    """Re-execute a recorded run; artifacts reproduce byte-for-byte."""
    doc = load_manifest(manifest_path)
    conf = dict(doc["config"])
    policy = conf.pop("feature_policy")
    cfg = TrainConfig(**conf)
    path_str = doc["dataset"]["path"]
    name = doc["dataset"]["stats"]["name"]
    ds, _ = _resolve_dataset(path_str, name, policy)
    got = dataset_fingerprint(ds)
    want = doc["dataset"]["fingerprint"]
    if got != want:
        raise InputError(
            f"dataset at {path_str} no longer matches the manifest fingerprint "
            f"({got[:12]} != {want[:12]})"
        )
    out = out if out is not None else Path(manifest_path).parent
    extra = doc.get("extra", {})
    command = doc["command"]
    if command == "run":
        _exec_run(ds, path_str, policy, cfg, out, workers)
    elif command == "sweep-eta":
        _exec_sweep_eta(ds, path_str, policy, cfg, out, workers, extra["values"])
    elif command == "ablate-strategy":
        _exec_ablate_strategy(ds, path_str, policy, cfg, out, workers)
    elif command == "ablate-negatives":
        _exec_ablate_negatives(ds, path_str, policy, cfg, out, workers)
    elif command == "invariant-rate":
        _exec_invariant_rate(ds, path_str, policy, cfg, out, workers, extra["ratios"])
    else:
        raise InputError(f"manifest records unknown command {command!r}")


# -------------------------------------------------------------- entry point


def main(argv=None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False, prog_name="glaug")
        return 0
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except InputError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except InvariantViolation as exc:
        click.echo(f"internal invariant violation: {exc}", err=True)
        return 2
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
