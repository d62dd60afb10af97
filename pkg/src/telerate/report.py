"""Summary tables and figures from batch trial results.

Reads the per-trial ``*.summary.json`` files a batch run leaves behind,
aggregates mean/stddev of the four metrics per (method, env, operator),
writes a CSV, and renders one bar chart per metric next to it.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

METRICS = ("t_trial", "d_total", "t_collision", "d_overshoot")

_CSV_COLUMNS = ["method", "env", "operator", "trials", "completed"] + [
    f"{m}_{s}" for m in METRICS for s in ("mean", "std")
]


def load_summaries(directory: str | Path) -> list[dict]:
    rows = []
    for path in sorted(Path(directory).glob("*.summary.json")):
        with open(path, "r", encoding="utf-8") as f:
            rows.append(json.load(f))
    return rows


def aggregate(rows: list[dict]) -> list[dict]:
    """Mean/stddev (population) of each metric per (method, env, operator).

    Statistics run over all finalized trials, completed or capped; the
    `completed` column says how many finished.
    """
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["method"], row["env"], row["operator"]), []).append(row)
    table = []
    for (method, env, operator), cell in sorted(groups.items()):
        out = {
            "method": method,
            "env": env,
            "operator": operator,
            "trials": len(cell),
            "completed": sum(1 for r in cell if r["completed"]),
        }
        for metric in METRICS:
            values = np.array([r[metric] for r in cell])
            out[f"{metric}_mean"] = float(values.mean())
            out[f"{metric}_std"] = float(values.std())
        table.append(out)
    return table


def write_summary_csv(table: list[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=_CSV_COLUMNS)
        writer.writeheader()
        for row in table:
            writer.writerow({k: row[k] for k in _CSV_COLUMNS})


_METRIC_LABELS = {
    "t_trial": "trial time (s)",
    "d_total": "distance traveled (m)",
    "t_collision": "collision duration (s)",
    "d_overshoot": "final-target overshoot (m)",
}


def render_figures(table: list[dict], out_dir: str | Path) -> list[Path]:
    """One grouped bar chart per metric: env groups, one bar per method.

    Separate operators get separate figure files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    operators = sorted({row["operator"] for row in table})
    written = []
    for operator in operators:
        rows = [row for row in table if row["operator"] == operator]
        envs = sorted({row["env"] for row in rows})
        methods = sorted({row["method"] for row in rows})
        by_key = {(row["method"], row["env"]): row for row in rows}
        suffix = "" if len(operators) == 1 else f"_{operator}"
        for metric in METRICS:
            fig, ax = plt.subplots(figsize=(7, 4))
            width = 0.8 / max(len(methods), 1)
            x = np.arange(len(envs))
            for i, method in enumerate(methods):
                means = [by_key.get((method, env), {}).get(f"{metric}_mean", np.nan)
                         for env in envs]
                stds = [by_key.get((method, env), {}).get(f"{metric}_std", 0.0)
                        for env in envs]
                ax.bar(x + (i - (len(methods) - 1) / 2) * width, means, width,
                       yerr=stds, capsize=3, label=method)
            ax.set_xticks(x)
            ax.set_xticklabels(envs)
            ax.set_ylabel(_METRIC_LABELS[metric])
            ax.set_title(f"{metric} by environment and method ({operator})")
            ax.legend(title="method")
            fig.tight_layout()
            path = out / f"fig_{metric}{suffix}.png"
            fig.savefig(path, dpi=120)
            plt.close(fig)
            written.append(path)
    return written
