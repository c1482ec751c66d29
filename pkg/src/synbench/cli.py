"""Command-line entry points for the benchmark pipeline and study service."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np


@click.group()
def main():
    """Synthetic-image benchmark toolkit."""


# --------------------------------------------------------------- prepare-data


@main.command("prepare-data")
@click.option("--source", type=click.Path(), help="raw corpus directory (chest/ct policies)")
@click.option("--policy", type=click.Choice(["chest", "ct", "toy"]), required=True)
@click.option("--min-count", type=int, default=1, show_default=True,
              help="drop label combinations rarer than this")
@click.option("--ratios", default="0.8,0.1,0.1", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--toy-spec", type=click.Path(), help="JSON toy-corpus spec (toy policy)")
def prepare_data(source, policy, min_count, ratios, seed, out, toy_spec):
    """Build a split, filtered corpus with manifest and fold assignments."""
    from .data import (
        ToySpec, filter_rare_combinations, generate_toy_corpus, load_set, save_set,
        stratified_patient_split,
    )
    from .data.policies import binarize_labels

    ratio_tuple = tuple(float(x) for x in ratios.split(","))
    if policy == "toy":
        spec_args = json.loads(Path(toy_spec).read_text()) if toy_spec else {
            "n_patients": 260, "labels": ["disc", "bar", "ring"],
            "images_per_patient": 12, "resolution": 32, "noise_level": 0.1,
        }
        dataset = generate_toy_corpus(ToySpec(**spec_args), seed=seed)
    else:
        if not source:
            raise click.UsageError("--source is required for chest/ct policies")
        # source is expected in manifest form with raw states encoded as labels
        dataset, _ = load_set(source)
    if min_count > 1:
        dataset = filter_rare_combinations(dataset, min_count)
    folds = stratified_patient_split(dataset, ratio_tuple, seed=seed)
    manifest = save_set(dataset, out, folds.fold_of())
    click.echo(f"wrote {len(dataset)} records to {manifest}")
    counts = {f: len(getattr(folds, f)) for f in ("train", "val", "test")}
    click.echo(f"folds: {counts}")


# ------------------------------------------------------------------ train-gan


@main.command("train-gan")
@click.option("--setting", "setting_dir", type=click.Path(exists=True), required=True,
              help="directory with train/ val/ test/ manifests")
@click.option("--model", type=click.Choice(["cpd", "prog"]), required=True)
@click.option("--schedule", "schedule_file", type=click.Path(), help="JSON schedule overrides")
@click.option("--preset", type=click.Choice(["desk", "full"]), default="desk", show_default=True)
@click.option("--seeds", type=int, default=1, show_default=True)
@click.option("--max-channels", type=int, default=128, show_default=True)
@click.option("--latent-dim", type=int, default=64, show_default=True)
@click.option("--embedder", "embedder_file", type=click.Path(),
              help="frozen embedder checkpoint; trained on the fold when absent")
@click.option("--out", type=click.Path(), required=True)
def train_gan_cmd(setting_dir, model, schedule_file, preset, seeds, max_channels,
                  latent_dim, embedder_file, out):
    """Train one or more GAN repetitions on a prepared setting."""
    from .data import load_set
    from .metrics import load_embedder, save_embedder, train_embedder
    from .models import cpd_topology, prog_topology, save_checkpoint
    from .training import desk_schedule, full_scale_schedule, run_repetitions, write_fid_history

    train_set, _ = load_set(Path(setting_dir) / "train")
    overrides = json.loads(Path(schedule_file).read_text()) if schedule_file else {}
    schedule = (desk_schedule if preset == "desk" else full_scale_schedule)(**overrides)
    factory = cpd_topology if model == "cpd" else prog_topology
    topology = factory(train_set.side, len(train_set.labels),
                       max_channels=max_channels, latent_dim=latent_dim)

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    if embedder_file and Path(embedder_file).exists():
        embedder = load_embedder(embedder_file)
    else:
        embedder = train_embedder(train_set, seed=schedule.seed)
        save_embedder(embedder, out / "embedder.npz")

    results = run_repetitions(train_set, topology, schedule, embedder, n_seeds=seeds)
    for k, ckpt in enumerate(results, start=1):
        save_checkpoint(ckpt, out / f"seed{k}" / "checkpoint.npz")
        write_fid_history(out / f"seed{k}" / "fid_history.csv", ckpt.fid_history)
        click.echo(f"seed {k}: stopped at {ckpt.stopped_at} images, "
                   f"final FID {ckpt.fid_history[-1][1]:.3f}")


@main.command("generate")
@click.option("--checkpoint", "ckpt_file", type=click.Path(exists=True), required=True)
@click.option("--labels-from", type=click.Path(exists=True), required=True,
              help="fold manifest directory whose label multiset to mirror")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def generate_cmd(ckpt_file, labels_from, seed, out):
    """Synthesize a fold conditioned on an existing fold's labels."""
    from .data import load_set, save_set
    from .models import load_checkpoint
    from .training import synthesize_fold

    ckpt = load_checkpoint(ckpt_file)
    fold, _ = load_set(labels_from)
    syn = synthesize_fold(ckpt, fold, seed=seed)
    manifest = save_set(syn, out)
    click.echo(f"wrote {len(syn)} synthetic records to {manifest}")


# -------------------------------------------------------------------- metrics


@main.group()
def metrics():
    """Distribution metrics."""


@metrics.command("fid")
@click.option("--real", "real_dir", type=click.Path(exists=True), required=True)
@click.option("--syn", "syn_dir", type=click.Path(exists=True), required=True)
@click.option("--embedder", "embedder_file", type=click.Path(exists=True), required=True)
@click.option("--n", type=int, default=2048, show_default=True)
def fid_cmd(real_dir, syn_dir, embedder_file, n):
    """FID between two manifest directories; prints JSON."""
    from .data import load_set
    from .metrics import compute_fid, load_embedder

    real, _ = load_set(real_dir)
    syn, _ = load_set(syn_dir)
    embedder = load_embedder(embedder_file)
    fid = compute_fid(real.pixel_array(), syn.pixel_array(), embedder, n)
    click.echo(json.dumps({"fid": fid, "n": n, "dim": embedder.dim}))


# ----------------------------------------------------------- train-classifier


@main.command("train-classifier")
@click.option("--train", "train_dir", type=click.Path(exists=True), required=True)
@click.option("--val", "val_dir", type=click.Path(exists=True), required=True)
@click.option("--protocol", "protocol_file", type=click.Path(), help="JSON protocol overrides")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def train_classifier_cmd(train_dir, val_dir, protocol_file, seed, out):
    """Train the predictive model; emits history.csv and auc_report.json."""
    from .classifier import ClassifierProtocol, evaluate, train_classifier, write_history
    from .data import load_set

    overrides = json.loads(Path(protocol_file).read_text()) if protocol_file else {}
    overrides["seed"] = seed
    protocol = ClassifierProtocol(**overrides)
    train_set, _ = load_set(train_dir)
    val_set, _ = load_set(val_dir)
    model, history = train_classifier(train_set, val_set, protocol)

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_history(out / "history.csv", history)
    report = evaluate(model, val_set)
    (out / "auc_report.json").write_text(json.dumps({
        "per_label": report.per_label,
        "mean_auc": report.mean_auc,
        "n_eval": report.n_eval,
        "undefined": report.undefined,
    }, indent=2))
    import torch

    torch.save(model.state_dict(), out / "classifier.pt")
    click.echo(f"best val mean AUC {history.best_val_auc:.4f} at epoch {history.best_epoch}")


# ------------------------------------------------------------------- analysis


@main.command("nn-audit")
@click.option("--syn", "syn_dir", type=click.Path(exists=True), required=True)
@click.option("--train", "train_dir", type=click.Path(exists=True), required=True)
@click.option("--classifier", "clf_file", type=click.Path(exists=True), required=True)
@click.option("--width", type=int, default=16, show_default=True)
@click.option("--panels", type=int, default=0, help="write this many side-by-side panels")
@click.option("--out", type=click.Path(), required=True)
def nn_audit_cmd(syn_dir, train_dir, clf_file, width, panels, out):
    """Nearest-real-neighbor audit of a synthetic fold."""
    import torch

    from .analysis import masking_attribution, nn_audit, save_panel
    from .data import load_set
    from .nets import SmallConvNet

    syn, _ = load_set(syn_dir)
    train, _ = load_set(train_dir)
    model = SmallConvNet(len(train.labels), width=width)
    model.load_state_dict(torch.load(clf_file, weights_only=True))
    results = nn_audit(syn, train, model)

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "neighbors.json").write_text(json.dumps(
        [{"syn_id": r.syn_id, "train_id": r.train_id, "distance": r.distance}
         for r in results], indent=2))
    if panels:
        train_by_id = train.by_id()
        for r, rec in list(zip(results, syn.records))[:panels]:
            nn_rec = train_by_id[r.train_id]
            amap = masking_attribution(model, nn_rec.pixels, nn_rec.bits)
            save_panel(out / f"panel_{r.syn_id}.png", rec.pixels, nn_rec.pixels,
                       attribution=amap, distance=r.distance)
    dists = [r.distance for r in results]
    click.echo(json.dumps({"n": len(dists), "min": min(dists), "median": float(np.median(dists))}))


@main.command("attribute")
@click.option("--fold", "fold_dir", type=click.Path(exists=True), required=True)
@click.option("--classifier", "clf_file", type=click.Path(exists=True), required=True)
@click.option("--width", type=int, default=16, show_default=True)
@click.option("--mask-size", type=int, default=2, show_default=True)
@click.option("--limit", type=int, default=8, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def attribute_cmd(fold_dir, clf_file, width, mask_size, limit, out):
    """Masking-based attribution maps for the first images of a fold."""
    import torch

    from .analysis import masking_attribution, save_panel
    from .data import load_set
    from .nets import SmallConvNet

    fold, _ = load_set(fold_dir)
    model = SmallConvNet(len(fold.labels), width=width)
    model.load_state_dict(torch.load(clf_file, weights_only=True))
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for rec in fold.records[:limit]:
        amap = masking_attribution(model, rec.pixels, rec.bits, mask_size=mask_size)
        np.save(out / f"attribution_{rec.image_id}.npy", amap.values)
        save_panel(out / f"panel_{rec.image_id}.png", rec.pixels, rec.pixels, amap)
    click.echo(f"wrote {min(limit, len(fold))} attribution maps to {out}")


@main.group()
def stats():
    """Nonparametric tests."""


@stats.command("mwu")
@click.option("--a", "a_str", required=True, help="comma-separated sample")
@click.option("--b", "b_str", required=True)
def mwu_cmd(a_str, b_str):
    from .analysis import mann_whitney_one_sided

    a = [float(x) for x in a_str.split(",")]
    b = [float(x) for x in b_str.split(",")]
    u, p = mann_whitney_one_sided(a, b)
    click.echo(json.dumps({"U": u, "p": p, "alternative": "a greater than b"}))


@stats.command("wilcoxon")
@click.option("--sample", "sample_str", required=True, help="comma-separated sample")
@click.option("--mu", type=float, default=0.5, show_default=True)
def wilcoxon_cmd(sample_str, mu):
    from .analysis import wilcoxon_signed_rank_vs

    sample = [float(x) for x in sample_str.split(",")]
    p = wilcoxon_signed_rank_vs(sample, mu)
    click.echo(json.dumps({"p": p, "alternative": f"median below {mu}"}))


# ---------------------------------------------------------------------- bench


@main.group()
def bench():
    """Benchmark sweeps."""


@bench.command("run")
@click.option("--plan", "plan_file", type=click.Path(exists=True), required=True)
@click.option("--store", "store_dir", type=click.Path(), default="bench-results",
              show_default=True)
@click.option("--parallel", type=int, default=1, show_default=True)
def bench_run(plan_file, store_dir, parallel):
    from .bench import load_plan, run_benchmark

    plan = load_plan(plan_file)
    store = run_benchmark(plan, store_dir, parallel=parallel)
    reports = store.read_reports()
    click.echo(f"store: {store.root}")
    click.echo(f"completed cells: {len(reports)}")


@bench.command("aggregate")
@click.option("--plan", "plan_file", type=click.Path(exists=True), required=True)
@click.option("--store", "store_dir", type=click.Path(exists=True), required=True)
def bench_aggregate(plan_file, store_dir):
    from .bench import ResultStore, aggregate, load_plan

    store = ResultStore(store_dir, load_plan(plan_file))
    paths = aggregate(store, formats=("csv",))
    click.echo(f"wrote {paths['csv']}")


@bench.command("report")
@click.option("--plan", "plan_file", type=click.Path(exists=True), required=True)
@click.option("--store", "store_dir", type=click.Path(exists=True), required=True)
@click.option("--format", "formats", multiple=True,
              type=click.Choice(["csv", "md", "png"]), default=("csv", "md", "png"),
              show_default=True)
def bench_report(plan_file, store_dir, formats):
    from .bench import ResultStore, aggregate, load_plan

    store = ResultStore(store_dir, load_plan(plan_file))
    paths = aggregate(store, formats=tuple(formats))
    for kind, path in paths.items():
        click.echo(f"{kind}: {path}")


# ---------------------------------------------------------------------- serve


@main.command("serve")
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--data-root", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--ui-dir", type=click.Path(), default=None,
              help="built frontend bundle to serve at /")
def serve_cmd(port, data_root, seed, ui_dir):
    """Run the blinded reader-study service."""
    import uvicorn

    from .study import create_app

    app = create_app(data_root, seed=seed, ui_dir=ui_dir)
    uvicorn.run(app, host="0.0.0.0", port=port)


@main.command("study-client")
@click.option("--base-url", default="http://127.0.0.1:8000", show_default=True)
@click.option("--reader", "reader_id", required=True)
@click.option("--modality", default="toy", show_default=True)
@click.option("--resolution", type=int, default=32, show_default=True)
@click.option("--strategy", type=click.Choice(["random", "all-real", "all-synthetic"]),
              default="random", show_default=True)
@click.option("--seed", type=int, default=None)
def study_client_cmd(base_url, reader_id, modality, resolution, strategy, seed):
    """Complete one scripted reader session against a running service."""
    import httpx

    from .study import StudyClient

    with httpx.Client(timeout=30.0) as http:
        client = StudyClient(http, base_url)
        report = client.run_session(reader_id, modality, resolution,
                                    strategy=strategy, seed=seed)
    click.echo(report.model_dump_json(indent=2))


if __name__ == "__main__":
    sys.exit(main())
