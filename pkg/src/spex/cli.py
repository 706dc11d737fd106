"""Command-line surface: fit, predict, eval, verify, gen."""

from __future__ import annotations

import json
import os
import sys
import tempfile

import click
import numpy as np

from .data import (
    DataError,
    Dataset,
    ReferenceClustering,
    coordinatewise_median,
    ingest,
    kmeans_fit,
    read_labels,
    relabel_contiguous,
    synth,
)
from .graph import CliqueClusterGraph, GraphError, build_knn_graph
from .metrics import MetricError, agreement, tree_objective
from .tree import TreeError, assign, build_tree, from_json, to_json
from .algorithms import CartStrategy, ConductanceStrategy, emn_fit, imm_fit

ALGOS = ("spex-clique", "spex-knn", "cart", "imm", "emn")


def _atomic_write(path, text):
    """Write via a temp file in the destination directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".spex-tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_labels(path, labels):
    _atomic_write(path, "\n".join(str(int(x)) for x in labels) + "\n")


def _json_text(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _sidecar(out_path, suffix):
    stem, _ = os.path.splitext(out_path)
    return stem + suffix


def _parse_ref_spec(spec):
    """Parse the --ref convenience flag, currently 'kmeans:<k>'."""
    method, _, arg = spec.partition(":")
    if method != "kmeans" or not arg:
        raise click.UsageError(f"unsupported --ref {spec!r}; expected kmeans:<k>")
    try:
        k = int(arg)
    except ValueError:
        raise click.UsageError(f"--ref kmeans:{arg!r}: k must be an integer") from None
    if k < 1:
        raise click.UsageError("--ref kmeans k must be >= 1")
    return k


def _check_threads_env():
    raw = os.environ.get("SPEX_THREADS")
    if raw is None:
        return
    try:
        val = int(raw)
    except ValueError:
        raise click.UsageError(f"SPEX_THREADS must be an integer, got {raw!r}") from None
    if val < 0:
        raise click.UsageError("SPEX_THREADS must be >= 0")
    # Execution is serial; the cap is accepted for forward compatibility.


@click.group()
def cli():
    """Explainable clustering trees via graph conductance minimization."""
    _check_threads_env()


@cli.command()
@click.option("--algo", type=click.Choice(ALGOS), required=True)
@click.option("--points", "points_path", required=True, type=click.Path(exists=True))
@click.option("--labels", "labels_path", type=click.Path(exists=True),
              help="Reference clustering labels, one integer per line.")
@click.option("--ground-truth", "truth_path", type=click.Path(exists=True))
@click.option("--ref", "ref_spec", help="Built-in reference, e.g. kmeans:3.")
@click.option("--leaves", type=int, help="Leaf count; defaults to the reference k.")
@click.option("--knn", "kappa", type=int, help="Neighbor count for spex-knn.")
@click.option("--weight-mode", type=click.Choice(["indicator_sum", "union"]),
              default="indicator_sum", show_default=True)
@click.option("--norm", type=click.Choice(["l2", "l1"]), default="l2",
              show_default=True, help="Centroid distance norm for imm/emn.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--restarts", type=int, default=10, show_default=True)
@click.option("--header", is_flag=True, help="Skip the first CSV row.")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Tree JSON path; assignments and metrics go beside it.")
def fit(algo, points_path, labels_path, truth_path, ref_spec, leaves, kappa,
        weight_mode, norm, seed, restarts, header, out_path):
    """Fit a tree and write tree JSON, assignment CSV and metrics JSON."""
    ds, ref = ingest(points_path, labels_path, header=header)
    if ref is None and ref_spec is not None:
        ref = kmeans_fit(ds, _parse_ref_spec(ref_spec), restarts=restarts, seed=seed)

    if algo in ("imm", "emn") and ref is not None and ref.centroids is None:
        stat = coordinatewise_median if norm == "l1" else lambda p: p.mean(axis=0)
        centroids = np.stack(
            [stat(ds.points[ref.labels == i]) for i in range(ref.k)]
        )
        ref = ReferenceClustering(labels=ref.labels, k=ref.k, centroids=centroids)

    graph = None
    if algo == "spex-knn":
        if kappa is None:
            raise click.UsageError("spex-knn requires --knn")
        if leaves is None:
            raise click.UsageError("spex-knn requires --leaves")
        graph = build_knn_graph(ds, kappa, weight_mode)
        tree = build_tree(ds, ConductanceStrategy(graph), leaves)
    else:
        if ref is None:
            name = algo.upper() if algo in ("imm", "emn") else algo
            raise click.UsageError(
                f"{name} requires a centroid-bearing reference"
                if algo in ("imm", "emn")
                else f"{name} requires reference labels (--labels or --ref)"
            )
        if leaves is None:
            leaves = ref.k
        if algo == "spex-clique":
            graph = CliqueClusterGraph(ref.labels, ref.k)
            tree = build_tree(ds, ConductanceStrategy(graph), leaves)
        elif algo == "cart":
            tree = build_tree(ds, CartStrategy(ref, ds.n), leaves)
        elif algo == "imm":
            tree = imm_fit(ds, ref, norm=norm)
        else:
            tree = emn_fit(ds, ref, norm=norm)

    pred = assign(tree, ds)
    _atomic_write(out_path, to_json(tree) + "\n")
    _write_labels(_sidecar(out_path, ".assignments.csv"), pred)

    metrics = {}
    truth = None
    if truth_path is not None:
        truth, _ = relabel_contiguous(read_labels(truth_path, n=ds.n, header=header))
    if truth is not None or ref is not None:
        rep = agreement(pred, ground_truth=truth,
                        reference=ref.labels if ref is not None else None)
        metrics.update(rep.as_dict())
    if graph is None and ref is not None:
        graph = CliqueClusterGraph(ref.labels, ref.k)
    if graph is not None:
        leaves_idx = [np.flatnonzero(pred == c) for c in np.unique(pred)]
        metrics["objective"] = tree_objective(graph, leaves_idx)
    _atomic_write(_sidecar(out_path, ".metrics.json"), _json_text(metrics))
    click.echo(_json_text(metrics), nl=False)


@cli.command()
@click.option("--tree", "tree_path", required=True, type=click.Path(exists=True))
@click.option("--points", "points_path", required=True, type=click.Path(exists=True))
@click.option("--header", is_flag=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def predict(tree_path, points_path, header, out_path):
    """Route points through a saved tree; write one cluster id per line."""
    with open(tree_path, encoding="utf-8") as fh:
        tree = from_json(fh.read())
    ds, _ = ingest(points_path, header=header)
    if ds.d < tree.d:
        raise DataError(f"points have {ds.d} coordinates, tree expects {tree.d}")
    _write_labels(out_path, assign(tree, ds))


@cli.command(name="eval")
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True))
@click.option("--ground-truth", "truth_path", type=click.Path(exists=True))
@click.option("--ref", "ref_path", type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path())
def eval_cmd(pred_path, truth_path, ref_path, out_path):
    """Compare a predicted label file to ground truth and/or reference labels."""
    pred = read_labels(pred_path)
    truth = read_labels(truth_path, n=pred.size) if truth_path else None
    ref = read_labels(ref_path, n=pred.size) if ref_path else None
    if truth is None and ref is None:
        raise click.UsageError("eval needs --ground-truth or --ref")
    rep = agreement(pred, ground_truth=truth, reference=ref)
    text = _json_text(rep.as_dict())
    if out_path:
        _atomic_write(out_path, text)
    click.echo(text, nl=False)


@cli.command()
@click.option("--suite", "suites", multiple=True,
              type=click.Choice(["bound", "clique", "equivalence",
                                 "price", "all"]),
              default=("all",), show_default=True)
@click.option("--trials", type=int, help="Override per-suite trial counts.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path())
def verify(suites, trials, seed, out_path):
    """Run numerical verification suites; exit 2 if any check fails."""
    from .theory import SUITES, run_suites

    names = list(SUITES) if "all" in suites else list(dict.fromkeys(suites))
    results = run_suites(names, seed=seed, trials=trials)
    for res in results:
        status = "PASS" if res.ok else "FAIL"
        click.echo(f"{res.name}: {status} ({res.passed}/{res.trials})")
    if out_path:
        _atomic_write(out_path, _json_text([r.as_dict() for r in results]))
    if not all(r.ok for r in results):
        sys.exit(2)


@cli.command()
@click.option("--kind", required=True,
              type=click.Choice(["two_moons", "three_gaussians", "cart_trap"]))
@click.option("--n", type=int, required=True)
@click.option("--noise", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Points CSV path; labels go beside it.")
def gen(kind, n, noise, seed, out_path):
    """Generate a synthetic dataset and its ground-truth labels."""
    ds, labels = synth(kind, n, noise=noise, seed=seed)
    rows = "\n".join(",".join(repr(v) for v in row) for row in ds.points.tolist())
    _atomic_write(out_path, rows + "\n")
    _write_labels(_sidecar(out_path, ".labels.csv"), labels)


def main():
    try:
        cli.main(standalone_mode=False)
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    except (DataError, GraphError, TreeError, MetricError, OSError,
            ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
