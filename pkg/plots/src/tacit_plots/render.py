"""Render publication-style figures from simulation result CSVs.

Three figure kinds, all read-only over the input directory:

- ccdf: complementary CDF panels (depth, max breadth, unique readers,
  tweets per claim) split by claim veracity, log-scaled by default.
- ate_summary: per-community mean outcome per mitigation with standard
  error bars and dashed no-mitigation baselines.
- misinfo_series: cumulative misinformation reads per node over time,
  lines per community, panels per (topic, mitigation).

Numeric truth lives in the CSVs; figures are regenerated artifacts.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["PlotSpec", "render", "SchemaError"]

logger = logging.getLogger(__name__)

FIGURE_KINDS = ("ccdf", "ate_summary", "misinfo_series")

CCDF_PANELS = (
    ("ccdf_depth.csv", "cascade depth"),
    ("ccdf_max_breadth.csv", "max breadth"),
    ("ccdf_unique_readers.csv", "unique readers"),
    ("ccdf_utterances_per_claim.csv", "tweets per claim"),
)

VERACITY_STYLE = {
    -1: ("anti-misinformation", "tab:green"),
    0: ("noise", "tab:gray"),
    1: ("misinformation", "tab:red"),
}

BASELINE = "none"


class SchemaError(ValueError):
    """An input CSV does not match its documented schema."""


@dataclass
class PlotSpec:
    input_dir: Path
    kind: str
    output_path: Path
    log_axes: bool = True
    max_mitigations: int = 6
    dpi: int = 150

    def __post_init__(self):
        self.input_dir = Path(self.input_dir)
        self.output_path = Path(self.output_path)
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {FIGURE_KINDS}")


def _read_csv(path: Path, required: list[str]) -> list[dict]:
    if not path.exists():
        raise SchemaError(f"{path} does not exist")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [col for col in required if col not in header]
        if missing:
            raise SchemaError(f"{path.name}: missing columns {missing}")
        extra = [col for col in header if col not in required]
        if extra:
            logger.warning("%s: ignoring unknown columns %s", path.name, extra)
        return list(reader)


def render(spec: PlotSpec) -> Path:
    """Render the requested figure and return the output path."""
    if spec.kind == "ccdf":
        fig = _render_ccdf(spec)
    elif spec.kind == "ate_summary":
        fig = _render_ate_summary(spec)
    else:
        fig = _render_misinfo_series(spec)
    spec.output_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output_path, dpi=spec.dpi)
    plt.close(fig)
    return spec.output_path


def _validate_ccdf_curve(name: str, xs: np.ndarray, ps: np.ndarray) -> None:
    # pre-draw sanity: a CCDF is non-increasing and starts at 1
    if np.any(np.diff(xs) <= 0):
        raise SchemaError(f"{name}: x values not strictly increasing")
    if np.any(np.diff(ps) > 1e-12):
        raise SchemaError(f"{name}: probabilities not non-increasing")
    if abs(ps[0] - 1.0) > 1e-9:
        raise SchemaError(f"{name}: curve does not start at 1.0")


def _render_ccdf(spec: PlotSpec):
    fig, axes = plt.subplots(1, len(CCDF_PANELS), figsize=(4 * len(CCDF_PANELS), 3.4))
    for ax, (filename, label) in zip(np.atleast_1d(axes), CCDF_PANELS):
        rows = _read_csv(spec.input_dir / filename, ["veracity", "x", "p"])
        by_veracity: dict[int, list[tuple[float, float]]] = {}
        for row in rows:
            by_veracity.setdefault(int(row["veracity"]), []).append((float(row["x"]), float(row["p"])))
        for veracity in sorted(by_veracity):
            pts = sorted(by_veracity[veracity])
            xs = np.array([x for x, _ in pts])
            ps = np.array([p for _, p in pts])
            _validate_ccdf_curve(f"{filename} veracity={veracity}", xs, ps)
            name, color = VERACITY_STYLE.get(veracity, (str(veracity), None))
            if spec.log_axes:
                keep = xs > 0
                xs, ps = xs[keep], ps[keep]
                if len(xs) == 0:
                    continue
            ax.plot(xs, ps, drawstyle="steps-post", label=name, color=color)
        if spec.log_axes:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(label)
        ax.set_ylabel("CCDF")
        ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def _load_iwcib(spec: PlotSpec):
    rows = _read_csv(
        spec.input_dir / "iwcib.csv",
        ["repetition", "mitigation", "node", "community", "iwcib"],
    )
    # mean per (mitigation, community, repetition), then mean/se across reps
    acc: dict[tuple[str, int, int], list[float]] = {}
    for row in rows:
        key = (row["mitigation"], int(row["community"]), int(row["repetition"]))
        acc.setdefault(key, []).append(float(row["iwcib"]))
    per_rep = {key: float(np.mean(vals)) for key, vals in acc.items()}
    out: dict[tuple[str, int], tuple[float, float]] = {}
    for (name, community, _rep) in per_rep:
        key = (name, community)
        if key in out:
            continue
        reps = sorted(r for (n, c, r) in per_rep if n == name and c == community)
        vals = [per_rep[(name, community, r)] for r in reps]
        se = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
        out[key] = (float(np.mean(vals)), se)
    return out


def _render_ate_summary(spec: PlotSpec):
    summary = _load_iwcib(spec)
    mitigations = sorted({name for name, _ in summary}, key=lambda n: (n == BASELINE, n))
    communities = sorted({c for _, c in summary})
    fig, axes = plt.subplots(
        1, len(communities), figsize=(4.2 * len(communities), 0.45 * len(mitigations) + 2.2),
        sharey=True,
    )
    for ax, community in zip(np.atleast_1d(axes), communities):
        ys = np.arange(len(mitigations))
        for y, name in zip(ys, mitigations):
            mean, se = summary[(name, community)]
            ax.errorbar(mean, y, xerr=se, fmt="o", color="tab:blue", capsize=3)
        if (BASELINE, community) in summary:
            base_mean, _ = summary[(BASELINE, community)]
            ax.axvline(base_mean, linestyle="--", color="tab:gray", linewidth=1)
        ax.set_yticks(ys)
        ax.set_yticklabels(mitigations, fontsize=7)
        ax.set_xlabel("impactedness-weighted change in belief")
        ax.set_title(f"community {community}", fontsize=9)
        ax.axvline(0.0, color="black", linewidth=0.6)
    fig.tight_layout()
    return fig


def _render_misinfo_series(spec: PlotSpec):
    rows = _read_csv(
        spec.input_dir / "misinfo_read.csv",
        ["repetition", "mitigation", "community", "topic", "t", "reads_per_node"],
    )
    acc: dict[tuple[str, int, int, int], list[float]] = {}
    for row in rows:
        key = (row["mitigation"], int(row["topic"]), int(row["community"]), int(row["t"]))
        acc.setdefault(key, []).append(float(row["reads_per_node"]))
    averaged = {key: float(np.mean(vals)) for key, vals in acc.items()}

    mitigations = sorted({k[0] for k in averaged}, key=lambda n: (n != BASELINE, n))
    mitigations = mitigations[: spec.max_mitigations]
    topics = sorted({k[1] for k in averaged})
    communities = sorted({k[2] for k in averaged})
    fig, axes = plt.subplots(
        len(mitigations), len(topics),
        figsize=(4.5 * len(topics), 2.4 * len(mitigations)),
        squeeze=False, sharex=True,
    )
    for i, name in enumerate(mitigations):
        for j, topic in enumerate(topics):
            ax = axes[i][j]
            for community in communities:
                ts = sorted(t for (n, tp, c, t) in averaged if n == name and tp == topic and c == community)
                series = [averaged[(name, topic, community, t)] for t in ts]
                ax.plot(ts, series, label=f"community {community}")
            ax.set_title(f"{name} | topic {topic}", fontsize=8)
            if i == len(mitigations) - 1:
                ax.set_xlabel("time step")
            if j == 0:
                ax.set_ylabel("misinfo reads / node")
    np.atleast_2d(axes)[0][0].legend(fontsize=7)
    fig.tight_layout()
    return fig
