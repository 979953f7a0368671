"""Figure rendering for exported results.

One PNG per experiment present in a record stream, written next to the
delimited output.  Curve-style experiments get line plots with confidence
bands; everything else falls back to a labelled bar chart of estimates.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _grouped(records, metric: str, coord: str):
    pts = [(r.coords[coord], r) for r in records if r.metric == metric and coord in r.coords]
    pts.sort(key=lambda kv: kv[0])
    return pts


def _curve_with_band(ax, records, metric: str, coord: str, label: str, logy: bool = False):
    pts = _grouped(records, metric, coord)
    if not pts:
        return False
    xs = [x for x, _ in pts]
    ys = [r.estimate for _, r in pts]
    ax.plot(xs, ys, marker="o", label=label)
    if all(r.ci_low is not None and r.ci_high is not None for _, r in pts):
        ax.fill_between(xs, [r.ci_low for _, r in pts], [r.ci_high for _, r in pts], alpha=0.25)
    if logy:
        positive = [y for y in ys if y > 0]
        if positive:
            ax.set_yscale("log")
    return True


def _plot_deviation(ax, records):
    _curve_with_band(ax, records, "deviation_mass", "t", "deviation mass", logy=True)
    ax.set_xlabel("t")
    ax.set_ylabel("P(| |X| - sqrt(n) | >= t sqrt(n))")


def _plot_small_ball(ax, records):
    _curve_with_band(ax, records, "small_ball_mass", "eps", "small-ball mass", logy=True)
    ax.set_xscale("log")
    ax.set_xlabel("eps")
    ax.set_ylabel("P(|X| <= eps sqrt(n))")


def _plot_gaussian_floor(ax, records):
    _curve_with_band(ax, records, "floor_bound", "t", "convolution floor")
    pts = _grouped(records, "mixing_bound", "t")
    if pts:
        ax.plot([x for x, _ in pts], [r.estimate for _, r in pts], marker="s", label="mixing bound")
    ax.set_xlabel("t")
    ax.set_ylabel("lower-tail bound")
    ax.legend()


def _plot_transference(ax, records):
    for side, mark in (("at_least", "o"), ("at_most", "s")):
        sub = [r for r in records if r.coords.get("side") == side]
        lhs = _grouped(sub, "tail_transfer", "t")
        bound = _grouped(sub, "transfer_bound", "t")
        if lhs:
            ax.plot([x for x, _ in lhs], [r.estimate for _, r in lhs], marker=mark, label=f"{side} tail")
        if bound:
            ax.plot([x for x, _ in bound], [r.estimate for _, r in bound], linestyle="--", label=f"{side} bound")
    ax.set_yscale("symlog", linthresh=1e-6)
    ax.set_xlabel("t")
    ax.set_ylabel("probability / bound")
    ax.legend(fontsize=8)


def _plot_by_p(metrics):
    def plot(ax, records):
        for metric in metrics:
            _curve_with_band(ax, records, metric, "p", metric)
        ax.set_xscale("log", base=2)
        ax.set_xlabel("p")
        ax.legend(fontsize=8)

    return plot


def _plot_gruenbaum(ax, records):
    pts = _grouped(records, "positive_mass", "theta_index")
    if pts:
        xs = [x for x, _ in pts]
        ax.errorbar(xs, [r.estimate for _, r in pts],
                    yerr=[4 * (r.stderr or 0) for _, r in pts], fmt="o", label="positive mass")
        import math

        ax.axhline(1 / math.e, color="gray", linestyle="--")
        ax.axhline(1 - 1 / math.e, color="gray", linestyle="--")
    ax.set_xlabel("direction index")
    ax.set_ylabel("P(<X, theta> >= 0)")


def _plot_cap_bound(ax, records):
    _curve_with_band(ax, records, "cap_measure", "eps", "cap measure", logy=True)
    ax.set_xlabel("eps")
    ax.set_ylabel("cap measure")


def _plot_bars(ax, records):
    by_metric = defaultdict(list)
    for r in records:
        by_metric[r.metric].append(r.estimate)
    names = sorted(by_metric)
    values = [sum(by_metric[n]) / len(by_metric[n]) for n in names]
    ax.bar(range(len(names)), values)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=7)
    ax.set_ylabel("estimate")


_PLOTTERS = {
    "deviation-curve": _plot_deviation,
    "small-ball": _plot_small_ball,
    "gaussian-floor": _plot_gaussian_floor,
    "thm1-transference": _plot_transference,
    "gruenbaum": _plot_gruenbaum,
    "cap-bound": _plot_cap_bound,
    "super-gaussian": _plot_by_p(["min_ratio_gaussian", "max_ratio_gaussian", "min_ratio_sqrtp"]),
    "mean-width": _plot_by_p(["mean_width", "mean_width_over_sqrtp"]),
    "berwald": _plot_by_p(["growth_ratio"]),
    "cube-counterexample": _plot_by_p(["axis_ratio_sqrtp", "worst_ratio_sqrtp", "recovery_factor"]),
    "thm1-part3": _plot_by_p(["floor_ratio_sqrtp"]),
    "thm1-part2": _plot_by_p(["envelope_ratio"]),
    "lemma0": _plot_by_p(["sum_lower_margin"]),
}


def render_figures(records, directory, stem: str) -> list[Path]:
    """Render one figure per experiment present in ``records``.

    Files are named ``<stem>_<experiment>.png`` inside ``directory``.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    by_experiment = defaultdict(list)
    for rec in records:
        by_experiment[rec.experiment].append(rec)
    paths = []
    for experiment, recs in sorted(by_experiment.items()):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        plotter = _PLOTTERS.get(experiment, _plot_bars)
        plotter(ax, recs)
        ax.set_title(experiment)
        fig.tight_layout()
        out = directory / f"{stem}_{experiment}.png"
        fig.savefig(out, dpi=150)
        plt.close(fig)
        paths.append(out)
    return paths
