"""Figure rendering for the report-producing CLI paths.

Figures are written next to the delimited output with deterministic bytes:
fixed size and dpi, no timestamps, and the Software metadata stripped.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = dict(dpi=130, metadata={"Software": None})


def _save(fig, path):
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def render_trace(trace, path, ylabel="batch loss"):
    fig, ax = plt.subplots(figsize=(6.0, 3.4))
    ax.plot(np.arange(len(trace)), trace, lw=0.9)
    ax.set_xlabel("step")
    ax.set_ylabel(ylabel)
    ax.set_yscale("log")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def render_rate_records(records, path, xlabel="n", ylabel="mean", title=None):
    """Log-log scatter of RateRecord-like rows grouped by label."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    labels = []
    for rec in records:
        if rec.label not in labels:
            labels.append(rec.label)
    for lab in labels:
        ns = [r.n for r in records if r.label == lab]
        ms = [r.mean for r in records if r.label == lab]
        ax.loglog(ns, ms, "o-", ms=4, lw=1.0, label=lab)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_power_curves(records, path):
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6))
    names = []
    for rec in records:
        if rec.statistic not in names:
            names.append(rec.statistic)
    for name in names:
        rows = [r for r in records if r.statistic == name]
        ns = [r.n for r in rows]
        axes[0].semilogx(ns, [r.power for r in rows], "o-", ms=4, label=name)
        axes[1].loglog(ns, [r.mean_stat for r in rows], "o-", ms=4, label=name)
    axes[0].set_xlabel("n")
    axes[0].set_ylabel("rejection frequency")
    axes[0].grid(alpha=0.3)
    axes[1].set_xlabel("n")
    axes[1].set_ylabel("mean statistic")
    axes[1].grid(alpha=0.3, which="both")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_slopes(reports, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for rep in reports:
        ax.loglog(rep.r_list, rep.values, "o-", ms=4, lw=1.0,
                  label=f"{rep.quantity} (slope {rep.slope:.3f})")
    ax.set_xlabel("r")
    ax.set_ylabel("value")
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_densities(c, path):
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(c.x, c.p, lw=0.9, label="p")
    ax.plot(c.x, c.q, lw=0.9, label="q")
    ax.plot(c.x, c.p0, lw=0.8, ls="--", color="gray", label="baseline")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def render_ordering(records, path):
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    names = []
    for rec in records:
        if rec.statistic not in names:
            names.append(rec.statistic)
    for name in names:
        rows = [r for r in records if r.statistic == name]
        ax.semilogx([r.n for r in rows], [r.separation for r in rows], "o-", ms=4, label=name)
    ax.axhline(3.0, color="gray", lw=0.8, ls="--")
    ax.set_xlabel("n")
    ax.set_ylabel("mean shift / SE")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
