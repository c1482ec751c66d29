"""Aggregate per-cell reports into tables and benchmark plots.

Per (setting, model): mean and standard deviation (population) of the real
and synthetic mean-AUC scores and of their difference, with per-seed values
preserved so every row stays traceable to its cells. Aggregation is pure:
re-running it over the same store yields byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .runner import ResultStore

COLUMNS = [
    "setting", "model", "n_seeds",
    "auc_real_mean", "auc_real_std",
    "auc_syn_mean", "auc_syn_std",
    "delta_mean", "delta_std",
    "delta_syn_mean", "fid_final_mean",
    "per_seed_delta",
]


def aggregate_rows(store: ResultStore) -> list[dict]:
    reports = store.read_reports()
    groups: dict[tuple[str, str], list[dict]] = {}
    for r in reports:
        groups.setdefault((r["setting"], r["model"]), []).append(r)

    setting_order = {s.name: i for i, s in enumerate(store.plan.settings)}
    rows = []
    for (setting, model) in sorted(groups, key=lambda k: (setting_order.get(k[0], 99), k[1])):
        cells = sorted(groups[(setting, model)], key=lambda r: r["seed"])
        deltas = np.array([c["delta"] for c in cells])
        auc_r = np.array([c["auc_real"]["mean_auc"] for c in cells])
        auc_s = np.array([c["auc_syn"]["mean_auc"] for c in cells])
        dsyn = [c["delta_syn"] for c in cells if c["delta_syn"] is not None]
        fids = [c["fid_final"] for c in cells if c["fid_final"] is not None]
        rows.append({
            "setting": setting,
            "model": model,
            "n_seeds": len(cells),
            "auc_real_mean": float(auc_r.mean()),
            "auc_real_std": float(auc_r.std()),
            "auc_syn_mean": float(auc_s.mean()),
            "auc_syn_std": float(auc_s.std()),
            "delta_mean": float(deltas.mean()),
            "delta_std": float(deltas.std()),
            "delta_syn_mean": float(np.mean(dsyn)) if dsyn else None,
            "fid_final_mean": float(np.mean(fids)) if fids else None,
            "per_seed_delta": json.dumps([round(float(d), 6) for d in deltas]),
        })
    return rows


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_csv(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_format(row[c]) for c in COLUMNS])
    path.write_text(buf.getvalue())
    return path


def write_markdown(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = ["setting", "model", "n_seeds", "auc_real_mean", "auc_syn_mean",
            "delta_mean", "delta_std"]
    lines = ["| " + " | ".join(cols) + " |",
             "|" + "|".join("---" for _ in cols) + "|"]
    for row in rows:
        lines.append("| " + " | ".join(_format(row[c]) for c in cols) + " |")
    path.write_text("\n".join(lines) + "\n")
    return path


def plot_benchmark(rows: list[dict], path: str | Path, title: str = "") -> Path:
    """Bar chart per setting: synthetic-trained mean AUC by model, real-trained
    AUC drawn as a line with a deviation band."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    settings = sorted({r["setting"] for r in rows},
                      key=[r["setting"] for r in rows].index)
    models = sorted({r["model"] for r in rows})
    x = np.arange(len(settings))
    width = 0.8 / max(len(models), 1)
    colors = {"cpd": "#3465a4", "prog": "#cc0000"}

    fig, ax = plt.subplots(figsize=(1.8 + 1.6 * len(settings), 4.2))
    by_key = {(r["setting"], r["model"]): r for r in rows}
    for i, model in enumerate(models):
        means = [by_key[(s, model)]["auc_syn_mean"] if (s, model) in by_key else np.nan
                 for s in settings]
        stds = [by_key[(s, model)]["auc_syn_std"] if (s, model) in by_key else 0.0
                for s in settings]
        ax.bar(x + (i - (len(models) - 1) / 2) * width, means, width, yerr=stds,
               capsize=3, label=f"{model} (synthetic)", color=colors.get(model, None))

    real_means = []
    real_stds = []
    for s in settings:
        vals = [by_key[(s, m)] for m in models if (s, m) in by_key]
        real_means.append(np.mean([v["auc_real_mean"] for v in vals]) if vals else np.nan)
        real_stds.append(np.mean([v["auc_real_std"] for v in vals]) if vals else 0.0)
    real_means = np.array(real_means)
    real_stds = np.array(real_stds)
    ax.plot(x, real_means, color="black", marker="o", label="real")
    ax.fill_between(x, real_means - real_stds, real_means + real_stds,
                    color="black", alpha=0.15)

    ax.set_xticks(x)
    ax.set_xticklabels(settings, rotation=20, ha="right")
    ax.set_ylabel("mean AUC on real test fold")
    ax.set_ylim(0.4, 1.05)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def aggregate(store: ResultStore, formats: tuple[str, ...] = ("csv",)) -> dict[str, Path]:
    rows = aggregate_rows(store)
    out: dict[str, Path] = {}
    if "csv" in formats:
        out["csv"] = write_csv(rows, store.root / "aggregate.csv")
    if "md" in formats:
        out["md"] = write_markdown(rows, store.root / "aggregate.md")
    if "png" in formats:
        out["png"] = plot_benchmark(rows, store.root / "benchmark.png", title=store.plan.name)
    return out
