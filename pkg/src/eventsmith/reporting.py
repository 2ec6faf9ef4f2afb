"""Report writers for the evaluation commands.

Every eval subcommand produces three files next to each other: the JSON
report, a delimited CSV with the same numbers, and a rendered PNG figure.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics.control import ControlReport
from .metrics.diversity import DiversityReport
from .metrics.perplexity import PerplexityReport


def sibling(out_path: str | Path, suffix: str) -> Path:
    return Path(out_path).with_suffix(suffix)


def _prepared(out_path: str | Path) -> Path:
    path = Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_json(payload: dict, out_path: str | Path) -> None:
    with open(_prepared(out_path), "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, ensure_ascii=False)
        handle.write("\n")


def write_csv(rows: list[dict], out_path: str | Path) -> None:
    if not rows:
        return
    with open(_prepared(out_path), "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


def _finish(fig, png_path: str | Path) -> None:
    fig.tight_layout()
    fig.savefig(_prepared(png_path), dpi=150)
    plt.close(fig)


def render_diversity(report: DiversityReport, png_path: str | Path) -> None:
    lengths = sorted(report.per_length)
    values = [report.per_length[length] for length in lengths]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(lengths, values, marker="o", label=report.variant)
    ax.set_xlabel("Sequence length")
    ax.set_ylabel("Self-BLEU")
    ax.set_title(f"Diversity over {report.num_contexts} contexts")
    ax.legend()
    _finish(fig, png_path)


def diversity_rows(report: DiversityReport) -> list[dict]:
    return [
        {"length": length, "mean_self_bleu": report.per_length[length]}
        for length in sorted(report.per_length)
    ]


def render_control(report: ControlReport, png_path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    bars = ["fail_pct"]
    values = [report.fail_pct]
    if report.avg_samples is not None:
        bars.append("avg_samples")
        values.append(report.avg_samples)
    ax.bar(bars, values, color=["firebrick", "steelblue"][: len(bars)])
    ax.set_title(f"Controllability ({report.mode}, {report.criterion}, budget {report.budget})")
    for i, value in enumerate(values):
        ax.text(i, value, f"{value:.2f}", ha="center", va="bottom")
    _finish(fig, png_path)


def render_perplexity(report: PerplexityReport, png_path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    labels = ["per_token_ppl"]
    values = [report.per_token_ppl]
    if report.cloze_accuracy is not None:
        labels.append("cloze_accuracy")
        values.append(report.cloze_accuracy)
    ax.bar(labels, values, color="slategray")
    ax.set_title(f"Sequence modeling ({report.mode}, n={report.num_instances})")
    for i, value in enumerate(values):
        ax.text(i, value, f"{value:.2f}", ha="center", va="bottom")
    _finish(fig, png_path)


def render_cloze(accuracy: float, num_documents: int, png_path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(["model"], [accuracy], color="seagreen")
    ax.axhline(100.0 / 6.0, linestyle="--", color="gray", label="random (6 choices)")
    ax.set_ylabel("accuracy %")
    ax.set_ylim(0, 100)
    ax.set_title(f"Narrative cloze over {num_documents} documents")
    ax.legend()
    _finish(fig, png_path)


def render_overlap(per_domain: dict[str, float], overall: float, png_path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(max(5, 1 + len(per_domain)), 4))
    names = list(per_domain) + ["overall"]
    values = [per_domain[name] for name in per_domain] + [overall]
    ax.bar(names, values, color="slateblue")
    ax.set_ylabel("gold events matched %")
    ax.set_title("Schema overlap")
    ax.tick_params(axis="x", rotation=30)
    _finish(fig, png_path)
