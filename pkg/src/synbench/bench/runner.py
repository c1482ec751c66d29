"""Benchmark sweep execution over setting x model x seed cells.

Every cell is persisted under a content-addressed directory (plan hash), so
re-running a plan resumes where it stopped and never collides with a modified
plan. One failed cell marks itself failed and the sweep continues.
"""

from __future__ import annotations

import json
import time
import traceback
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..classifier.train import run_pair
from ..data.manifest import load_set, save_set
from ..data.records import LabeledImageSet
from ..data.splits import FoldAssignment, build_benchmark_setting
from ..metrics.embedder import load_embedder, save_embedder, train_embedder
from ..models.checkpoint import save_checkpoint
from ..models.topology import NetworkTopology, cpd_topology, prog_topology
from ..training.loop import run_to_completion, write_fid_history
from ..training.synthesis import synthesize_fold
from .plan import ExperimentPlan, SettingConfig


class ResultStore:
    """Directory layout:

    <root>/<plan-name>-<hash>/
        plan.json
        embedder.npz
        <setting>/real/{train,val,test}/manifest.csv
        <setting>/<model>/seed<k>/{status.json, report.json, checkpoint.npz,
                                   fid_history.csv}
        extrema.json
    """

    def __init__(self, root: str | Path, plan: ExperimentPlan):
        self.plan = plan
        self.root = Path(root) / f"{plan.name}-{plan.content_hash()}"
        self.root.mkdir(parents=True, exist_ok=True)
        plan_file = self.root / "plan.json"
        if not plan_file.exists():
            plan_file.write_text(plan.canonical_json())

    def setting_dir(self, setting: str) -> Path:
        return self.root / setting

    def cell_dir(self, setting: str, model: str, seed: int) -> Path:
        return self.root / setting / model / f"seed{seed}"

    def cell_status(self, setting: str, model: str, seed: int) -> str | None:
        status = self.cell_dir(setting, model, seed) / "status.json"
        if not status.exists():
            return None
        return json.loads(status.read_text())["status"]

    def mark(self, setting: str, model: str, seed: int, status: str, error: str = "") -> None:
        d = self.cell_dir(setting, model, seed)
        d.mkdir(parents=True, exist_ok=True)
        (d / "status.json").write_text(json.dumps({"status": status, "error": error}))

    def write_report(self, setting: str, model: str, seed: int, report: dict) -> None:
        d = self.cell_dir(setting, model, seed)
        d.mkdir(parents=True, exist_ok=True)
        (d / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True))

    def read_reports(self) -> list[dict]:
        out = []
        for status_file in sorted(self.root.glob("*/*/seed*/status.json")):
            if json.loads(status_file.read_text())["status"] != "done":
                continue
            report_file = status_file.parent / "report.json"
            if report_file.exists():
                out.append(json.loads(report_file.read_text()))
        return out


def _auc_dict(report) -> dict:
    return {
        "per_label": report.per_label,
        "mean_auc": report.mean_auc,
        "undefined": report.undefined,
    }


def build_setting_folds(store: ResultStore, plan: ExperimentPlan, setting: SettingConfig,
                        pool: LabeledImageSet, folds: FoldAssignment):
    """Materialize (or reload) the real folds of one setting."""
    base = store.setting_dir(setting.name) / "real"
    names = ("train", "val", "test")
    if all((base / n / "manifest.csv").exists() for n in names):
        return tuple(load_set(base / n)[0] for n in names)
    built = build_benchmark_setting(pool, folds, setting.to_setting(), seed=plan.seed)
    for fold_set, n in zip(built, names):
        save_set(fold_set, base / n)
    return built


def run_cell(
    store: ResultStore,
    plan: ExperimentPlan,
    setting: SettingConfig,
    model: str,
    seed: int,
    real_folds,
    embedder,
    fixed_budget: int | None,
) -> dict:
    """Train GAN -> synthesize folds -> classifier pair -> report dict."""
    t0 = time.time()
    train, val, test = real_folds
    label_dim = len(train.labels)
    factory = cpd_topology if model == "cpd" else prog_topology
    topology = factory(setting.resolution, label_dim,
                       max_channels=plan.gan.max_channels, latent_dim=plan.gan.latent_dim)
    schedule = plan.gan.schedule(seed=seed)

    ckpt = run_to_completion(train, topology, schedule, embedder, fixed_budget=fixed_budget)

    cell = store.cell_dir(setting.name, model, seed)
    cell.mkdir(parents=True, exist_ok=True)
    save_checkpoint(ckpt, cell / "checkpoint.npz")
    write_fid_history(cell / "fid_history.csv", ckpt.fid_history)

    generator = ckpt.build_generator()
    syn_train = synthesize_fold(generator, train, seed=seed * 1000 + 1)
    syn_val = synthesize_fold(generator, val, seed=seed * 1000 + 2)
    syn_test = synthesize_fold(generator, test, seed=seed * 1000 + 3)

    protocol = plan.classifier.protocol(seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        pair = run_pair(train, val, test, syn_train, syn_val, protocol,
                        seeds=[seed], syn_test=syn_test)[0]

    report = {
        "setting": setting.name,
        "model": model,
        "seed": seed,
        "auc_real": _auc_dict(pair.auc_real),
        "auc_syn": _auc_dict(pair.auc_syn),
        "delta": pair.delta,
        "delta_syn": pair.delta_syn,
        "fid_final": ckpt.fid_history[-1][1] if ckpt.fid_history else None,
        "stopped_at": ckpt.stopped_at,
        "runtime_s": round(time.time() - t0, 1),
    }
    store.write_report(setting.name, model, seed, report)
    return report


def _prepare_store(plan: ExperimentPlan, out_root: str | Path) -> tuple[ResultStore, object, FoldAssignment, object]:
    store = ResultStore(out_root, plan)
    pool, fold_map = load_set(plan.pool)
    fold_sets = {"train": set(), "val": set(), "test": set()}
    for image_id, fold in fold_map.items():
        fold_sets[fold].add(image_id)
    folds = FoldAssignment(fold_sets["train"], fold_sets["val"], fold_sets["test"],
                           ratios=(0.8, 0.1, 0.1), seed=plan.seed)

    embedder_path = store.root / "embedder.npz"
    if embedder_path.exists():
        embedder = load_embedder(embedder_path)
    else:
        embedder = train_embedder(pool.subset(fold_sets["train"]), seed=plan.seed)
        save_embedder(embedder, embedder_path)
    return store, pool, folds, embedder


def _run_group(plan: ExperimentPlan, out_root: str, setting_name: str, model: str) -> None:
    """One (setting, model) group: seed 1 sets the image budget, remaining
    seeds follow it. Runs in-process or as a worker."""
    store, pool, folds, embedder = _prepare_store(plan, out_root)
    setting = next(s for s in plan.settings if s.name == setting_name)
    try:
        real_folds = build_setting_folds(store, plan, setting, pool, folds)
    except Exception:
        err = traceback.format_exc()
        for seed in plan.seeds_for(setting):
            store.mark(setting.name, model, seed, "failed", err)
        return
    budget: int | None = None
    for seed in plan.seeds_for(setting):
        if store.cell_status(setting.name, model, seed) == "done":
            report_file = store.cell_dir(setting.name, model, seed) / "report.json"
            if budget is None and report_file.exists():
                budget = json.loads(report_file.read_text())["stopped_at"]
            continue
        try:
            report = run_cell(store, plan, setting, model, seed, real_folds,
                              embedder, fixed_budget=budget)
            if budget is None:
                budget = report["stopped_at"]
            store.mark(setting.name, model, seed, "done")
        except Exception:
            store.mark(setting.name, model, seed, "failed", traceback.format_exc())


def run_benchmark(plan: ExperimentPlan, out_root: str | Path, parallel: int = 1) -> ResultStore:
    """Execute the full sweep; failed cells are recorded and skipped on resume.

    Groups (setting x model) are independent jobs; `parallel` > 1 fans them
    out over worker processes. Seeds inside a group stay sequential because
    later seeds reuse the first seed's stopping point.
    """
    store, pool, folds, embedder = _prepare_store(plan, out_root)
    # materialize folds up front so workers only ever read them; build errors
    # surface later as per-cell failures inside the owning group
    for setting in plan.settings:
        try:
            build_setting_folds(store, plan, setting, pool, folds)
        except Exception:
            pass

    groups = [(s.name, m) for s in plan.settings for m in plan.models]
    if parallel <= 1:
        for setting_name, model in groups:
            _run_group(plan, str(out_root), setting_name, model)
    else:
        with ProcessPoolExecutor(max_workers=parallel) as pool_exec:
            futures = [
                pool_exec.submit(_run_group, plan, str(out_root), setting_name, model)
                for setting_name, model in groups
            ]
            for f in futures:
                f.result()

    if plan.extrema:
        _extrema_analysis(store, plan)
    return store


def _extrema_analysis(store: ResultStore, plan: ExperimentPlan) -> None:
    """Per-model distribution comparison between the two extreme settings:
    delta scores tested one-sided (harder extreme greater), FID and
    label-overfitting score distributions collected alongside."""
    from ..analysis.stats import mann_whitney_one_sided

    harder, easier = plan.extrema
    reports = store.read_reports()
    out: dict = {"harder": harder, "easier": easier, "models": {}}
    for model in plan.models:
        def _collect(setting_name, key):
            return [r[key] for r in reports
                    if r["setting"] == setting_name and r["model"] == model and r[key] is not None]

        deltas_h = _collect(harder, "delta")
        deltas_e = _collect(easier, "delta")
        entry: dict = {
            "delta": {harder: deltas_h, easier: deltas_e},
            "fid": {harder: _collect(harder, "fid_final"), easier: _collect(easier, "fid_final")},
            "delta_syn": {harder: _collect(harder, "delta_syn"), easier: _collect(easier, "delta_syn")},
        }
        if deltas_h and deltas_e:
            u, p = mann_whitney_one_sided(deltas_h, deltas_e)
            entry["mwu"] = {"U": u, "p": p, "alternative": f"{harder} delta > {easier} delta"}
        out["models"][model] = entry
    (store.root / "extrema.json").write_text(json.dumps(out, indent=2, sort_keys=True))
