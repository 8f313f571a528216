"""Rendered reports: matplotlib figures plus the plain-text and
tab-separated serializations that sit alongside them.

Everything draws through the Agg backend so commands work headless.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluate import AmbiguityReport, EvalReport


def training_curves(epochs: list[tuple[int, float, float]], out_png: str) -> None:
    """Loss and dev-F curves over epochs, one panel each."""
    xs = [e for e, _, _ in epochs]
    losses = [l for _, l, _ in epochs]
    devs = [f for _, _, f in epochs]
    fig, (ax_loss, ax_dev) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_loss.plot(xs, losses, marker="o", markersize=3, color="tab:red")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("training loss")
    ax_loss.grid(True, alpha=0.3)
    ax_dev.plot(xs, devs, marker="o", markersize=3, color="tab:blue")
    ax_dev.set_xlabel("epoch")
    ax_dev.set_ylabel("dev F (%)")
    ax_dev.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


def eval_text(report: EvalReport, show_oov: bool) -> str:
    lines = [
        f"precision {report.precision:.2f}",
        f"recall    {report.recall:.2f}",
        f"f1        {report.f1:.2f}",
    ]
    if show_oov:
        lines.append(f"oov_recall {report.oov_display()}")
    lines.append(
        f"matched {report.matched}  gold {report.n_gold}  predicted {report.n_pred}"
    )
    return "\n".join(lines) + "\n"


def eval_tsv(report: EvalReport, show_oov: bool) -> str:
    rows = [
        ("precision", f"{report.precision:.2f}"),
        ("recall", f"{report.recall:.2f}"),
        ("f1", f"{report.f1:.2f}"),
        ("matched", str(report.matched)),
        ("gold", str(report.n_gold)),
        ("predicted", str(report.n_pred)),
    ]
    if show_oov:
        rows.append(("oov_recall", report.oov_display()))
        rows.append(("oov_words", str(report.n_oov)))
    return "".join(f"{k}\t{v}\n" for k, v in rows)


def eval_figure(report: EvalReport, out_png: str) -> None:
    labels = ["P", "R", "F"]
    values = [report.precision, report.recall, report.f1]
    if report.oov_recall is not None:
        labels.append("R_OOV")
        values.append(report.oov_recall)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    bars = ax.bar(labels, values, color="tab:blue", width=0.55)
    ax.set_ylim(0, 105)
    ax.set_ylabel("percent")
    for bar, value in zip(bars, values):
        ax.text(
            bar.get_x() + bar.get_width() / 2,
            value + 1,
            f"{value:.2f}",
            ha="center",
            fontsize=8,
        )
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


def ambiguity_text(report: AmbiguityReport) -> str:
    header = f"{'a b':<6} {'gold B E S':>10} {'gold S B E':>10} {'total':>7}"
    lines = [header]
    for cell, label in [
        ("both_wrong", "✗ ✗"),
        ("a_right_b_wrong", "✓ ✗"),
        ("a_wrong_b_right", "✗ ✓"),
    ]:
        bes = getattr(report.cases["BES"], cell)
        sbe = getattr(report.cases["SBE"], cell)
        lines.append(f"{label:<6} {bes:>10} {sbe:>10} {bes + sbe:>7}")
    return "\n".join(lines) + "\n"


def ambiguity_tsv(report: AmbiguityReport) -> str:
    rows = []
    for case in ("BES", "SBE"):
        counts = report.cases[case]
        for cell in ("both_wrong", "a_right_b_wrong", "a_wrong_b_right", "both_right"):
            rows.append((f"{case}.{cell}", str(getattr(counts, cell))))
    return "".join(f"{k}\t{v}\n" for k, v in rows)


def ambiguity_figure(report: AmbiguityReport, out_png: str) -> None:
    cells = ["both_wrong", "a_right_b_wrong", "a_wrong_b_right"]
    labels = ["both wrong", "a right, b wrong", "a wrong, b right"]
    bes = [getattr(report.cases["BES"], c) for c in cells]
    sbe = [getattr(report.cases["SBE"], c) for c in cells]
    x = range(len(cells))
    width = 0.38
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar([i - width / 2 for i in x], bes, width, label="gold B E S", color="tab:blue")
    ax.bar([i + width / 2 for i in x], sbe, width, label="gold S B E", color="tab:orange")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel("windows")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


def write_report_dir(
    out_dir: str,
    text: str,
    tsv: str,
    render_png,
) -> None:
    """Write report.txt, report.tsv, and report.png into out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    with open(os.path.join(out_dir, "report.tsv"), "w", encoding="utf-8") as fh:
        fh.write(tsv)
    render_png(os.path.join(out_dir, "report.png"))
