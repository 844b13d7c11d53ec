"""The five figure kinds: radar, pdf, cdf, fdc, walk, persistence.

Output is always SVG so structural tests (axis counts, one polygon per
source) survive backend changes. Rendering is deterministic: embedded
dates are suppressed and hash salts pinned. Every drawable that a test or
downstream tool may want to count carries a stable gid.
"""

from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "plotkit"

import matplotlib.pyplot as plt  # noqa: E402
from scipy import special  # noqa: E402

from . import schemas  # noqa: E402
from .schemas import SchemaError  # noqa: E402

# Sensor-style palette: first three sources mirror the blue/yellow/green
# convention of the footprint radar; families keep red/green/blue.
SOURCE_COLORS = ("#1f77b4", "#e6b800", "#2ca02c", "#d62728", "#9467bd", "#8c564b")
FAMILY_COLORS = {"BETA": "#d62728", "WEIBULL": "#2ca02c", "LOGNORMAL": "#1f77b4"}

FIGURE_KINDS = ("radar", "pdf", "cdf", "fdc", "walk", "persistence")


def _save(fig, out_path) -> None:
    """Atomic SVG write: render to a sibling temp file, then rename."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out_path.parent, prefix=out_path.name, suffix=".tmp")
    os.close(fd)
    try:
        fig.savefig(tmp, format="svg", metadata={"Date": None})
        os.replace(tmp, out_path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    finally:
        plt.close(fig)


def _source_color(index: int, source: str, style: dict) -> str:
    return style.get("colors", {}).get(source, SOURCE_COLORS[index % len(SOURCE_COLORS)])


def render_radar(inputs: dict, out_path, style: dict | None = None) -> None:
    """Footprint radar: 8 labeled axes, one closed polygon per source."""
    style = style or {}
    if "comparison" in inputs:
        report = schemas.load_comparison(inputs["comparison"])
    elif "radar_csv" in inputs:
        report = schemas.load_radar_csv(inputs["radar_csv"])
    else:
        raise SchemaError("<spec>", "inputs", "radar needs 'comparison' or 'radar_csv'")
    axes_names = report["axes"]
    sources = report["sources"]

    angles = [2.0 * math.pi * i / len(axes_names) for i in range(len(axes_names))]
    fig = plt.figure(figsize=(6.5, 6.5))
    ax = fig.add_subplot(111, polar=True)
    ax.set_theta_offset(math.pi / 2)
    ax.set_theta_direction(-1)
    ax.set_xticks(angles)
    ax.set_xticklabels(axes_names)
    ax.set_ylim(0.0, 1.05)
    ax.set_yticks([0.25, 0.5, 0.75, 1.0])
    ax.set_yticklabels(["0.25", "0.50", "0.75", "1.00"], fontsize=8)

    for i, (angle, name) in enumerate(zip(angles, axes_names)):
        spoke, = ax.plot([angle, angle], [0.0, 1.0], color="0.8", lw=0.8, zorder=1)
        spoke.set_gid(f"radar-axis-{i}-{name}")

    for idx, source in enumerate(sources):
        values = list(report["normalized"][source])
        closed_angles = angles + angles[:1]
        closed_values = values + values[:1]
        color = _source_color(idx, source, style)
        line, = ax.plot(closed_angles, closed_values, color=color, lw=2, label=source)
        line.set_gid(f"radar-polygon-{source}")
        fill = ax.fill(closed_angles, closed_values, color=color, alpha=0.15)[0]
        fill.set_gid(f"radar-fill-{source}")

    ax.set_title(style.get("title", "Fitness landscape footprint"))
    ax.legend(loc="upper right", bbox_to_anchor=(1.25, 1.1))
    fig.text(
        0.02, 0.02,
        "axes min-max normalized across sources; raw orientation (no inversion)",
        fontsize=7, color="0.4",
    )
    _save(fig, out_path)


def _family_pdf(family: str, params: dict, xs: np.ndarray) -> np.ndarray:
    if family == "BETA":
        a, b = params["alpha"], params["beta"]
        ln_b = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
        with np.errstate(divide="ignore", invalid="ignore"):
            inside = (xs > 0) & (xs < 1)
            out = np.zeros_like(xs)
            out[inside] = np.exp(
                (a - 1) * np.log(xs[inside]) + (b - 1) * np.log1p(-xs[inside]) - ln_b
            )
        return out
    if family == "WEIBULL":
        k, lam = params["shape"], params["scale"]
        out = np.zeros_like(xs)
        pos = xs > 0
        z = xs[pos] / lam
        out[pos] = (k / lam) * z ** (k - 1) * np.exp(-(z**k))
        return out
    if family == "LOGNORMAL":
        m, s = params["logmean"], params["logsd"]
        out = np.zeros_like(xs)
        pos = xs > 0
        out[pos] = np.exp(-((np.log(xs[pos]) - m) ** 2) / (2 * s**2)) / (
            xs[pos] * s * math.sqrt(2 * math.pi)
        )
        return out
    raise SchemaError("<fits>", "family", f"unknown family {family!r}")


def _family_cdf(family: str, params: dict, xs: np.ndarray) -> np.ndarray:
    if family == "BETA":
        return special.betainc(params["alpha"], params["beta"], np.clip(xs, 0.0, 1.0))
    if family == "WEIBULL":
        out = np.zeros_like(xs)
        pos = xs > 0
        out[pos] = -np.expm1(-((xs[pos] / params["scale"]) ** params["shape"]))
        return out
    if family == "LOGNORMAL":
        out = np.zeros_like(xs)
        pos = xs > 0
        out[pos] = special.ndtr((np.log(xs[pos]) - params["logmean"]) / params["logsd"])
        return out
    raise SchemaError("<fits>", "family", f"unknown family {family!r}")


def _fitness_values(inputs: dict) -> tuple[np.ndarray, dict]:
    fits = schemas.load_fits(inputs["fits"])
    rows = schemas.load_evals(inputs["evals"])
    values = np.array(
        [
            r["fitness_test"]
            for r in rows
            if r["source"] == fits["source"] and r["budget"] == fits["budget"]
        ]
    )
    if values.size == 0:
        raise SchemaError(
            inputs["evals"], "rows", f"no rows for ({fits['source']}, {fits['budget']})"
        )
    return values, fits


def render_pdf(inputs: dict, out_path, style: dict | None = None) -> None:
    """Empirical fitness density with the three fitted family curves."""
    style = style or {}
    values, fits = _fitness_values(inputs)
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    _, _, patches = ax.hist(
        values, bins=min(30, max(8, values.size // 8)), density=True,
        color="0.75", edgecolor="white",
    )
    for patch in patches:
        patch.set_gid("pdf-hist")
    lo, hi = float(values.min()), float(values.max())
    pad = 0.15 * (hi - lo) if hi > lo else 0.05
    xs = np.linspace(max(1e-6, lo - pad), hi + pad, 400)
    for fit in fits["fits"]:
        family = fit["family"]
        line, = ax.plot(
            xs, _family_pdf(family, fit["params"], xs),
            color=FAMILY_COLORS.get(family, "black"), lw=1.8,
            label=f"{family.title()} (AIC {fit['aic']:.2f})",
        )
        line.set_gid(f"pdf-fit-{family}")
    ax.set_xlabel("fitness")
    ax.set_ylabel("density")
    ax.set_title(style.get("title", f"Fitness PDF: {fits['source']} at {fits['budget']} epochs"))
    ax.legend(fontsize=8)
    _save(fig, out_path)


def render_cdf(inputs: dict, out_path, style: dict | None = None) -> None:
    """Empirical CDF against the fitted theoretical CDFs."""
    style = style or {}
    values, fits = _fitness_values(inputs)
    ordered = np.sort(values)
    steps = np.arange(1, ordered.size + 1) / ordered.size
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    emp, = ax.step(ordered, steps, where="post", color="0.3", lw=1.8, label="empirical")
    emp.set_gid("cdf-empirical")
    lo, hi = float(ordered[0]), float(ordered[-1])
    pad = 0.15 * (hi - lo) if hi > lo else 0.05
    xs = np.linspace(max(1e-6, lo - pad), hi + pad, 400)
    for fit in fits["fits"]:
        family = fit["family"]
        line, = ax.plot(
            xs, _family_cdf(family, fit["params"], xs),
            color=FAMILY_COLORS.get(family, "black"), lw=1.5, label=family.title(),
        )
        line.set_gid(f"cdf-fit-{family}")
    ax.set_xlabel("fitness")
    ax.set_ylabel("cumulative probability")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(style.get("title", f"Fitness CDF: {fits['source']} at {fits['budget']} epochs"))
    ax.legend(fontsize=8)
    _save(fig, out_path)


def render_fdc(inputs: dict, out_path, style: dict | None = None) -> None:
    """Fitness versus Hamming distance to the best sampled solution."""
    style = style or {}
    points, meta = schemas.load_fdc(inputs["points"], inputs["meta"])
    distances = [d for d, _ in points]
    fitness = [f for _, f in points]
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    scatter = ax.scatter(distances, fitness, s=18, alpha=0.7, color="#1f77b4")
    scatter.set_gid("fdc-points")
    pearson = meta.get("pearson_r")
    pearson_text = "undefined" if pearson is None else f"{pearson:.3f}"
    ax.set_xlabel("Hamming distance to sampled optimum")
    ax.set_ylabel("fitness")
    ax.set_title(
        style.get(
            "title",
            f"FDC: {meta.get('source', '?')} at {meta.get('budget', '?')} epochs "
            f"(pearson {pearson_text})",
        )
    )
    _save(fig, out_path)


def render_walk(inputs: dict, out_path, style: dict | None = None) -> None:
    """A random-walk route: raw fitness plus the pre-smoothed series.

    The smoothed series is plotted exactly as produced upstream (moving
    average already applied); plotkit does not re-smooth.
    """
    style = style or {}
    steps = schemas.load_walk(inputs["walk"])
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    raw, = ax.plot(
        [t for t, _ in steps], [f for _, f in steps],
        color="0.7", lw=0.9, label="fitness",
    )
    raw.set_gid("walk-raw")
    if "smoothed" in inputs and inputs["smoothed"]:
        smoothed = schemas.load_smoothed(inputs["smoothed"])
        line, = ax.plot(
            [t for t, _ in smoothed], [f for _, f in smoothed],
            color="#d62728", lw=1.8, label="moving average (as produced)",
        )
        line.set_gid("walk-smoothed")
    ax.set_xlabel("step")
    ax.set_ylabel("fitness")
    ax.set_title(style.get("title", "Random walk route"))
    ax.legend(fontsize=8)
    _save(fig, out_path)


def render_persistence(inputs: dict, out_path, style: dict | None = None) -> None:
    """Persistence bars: one bar group per percentile, one series per curve."""
    style = style or {}
    curve_paths = inputs["curves"]
    if isinstance(curve_paths, (str, Path)):
        curve_paths = [curve_paths]
    if not curve_paths:
        raise SchemaError("<spec>", "inputs.curves", "needs at least one curve CSV")
    series = []
    for path in curve_paths:
        curve = schemas.load_persistence_curve(path)
        label = Path(path).parent.name or Path(path).stem
        series.append((label, curve))
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    width = 0.8 / len(series)
    for idx, (label, curve) in enumerate(series):
        xs = [n + (idx - (len(series) - 1) / 2.0) * width for n, _ in curve]
        bars = ax.bar(
            xs, [p for _, p in curve], width=width,
            color=_source_color(idx, label, style), label=label,
        )
        for bar in bars:
            bar.set_gid(f"persistence-{label}")
    ax.set_xlabel("rank percentile N")
    ax.set_ylabel("persistence (%)")
    ax.set_ylim(0, 105)
    ax.set_title(style.get("title", "Rank persistence"))
    ax.legend(fontsize=8)
    _save(fig, out_path)


RENDERERS = {
    "radar": render_radar,
    "pdf": render_pdf,
    "cdf": render_cdf,
    "fdc": render_fdc,
    "walk": render_walk,
    "persistence": render_persistence,
}


def render(spec: dict) -> None:
    """Render one FigureSpec: {kind, inputs, out, style?}."""
    kind = spec.get("kind")
    if kind not in RENDERERS:
        raise SchemaError("<spec>", "kind", f"unknown figure kind {kind!r}")
    inputs = spec.get("inputs")
    if not isinstance(inputs, dict):
        raise SchemaError("<spec>", "inputs", "expected an object")
    out = spec.get("out")
    if not out:
        raise SchemaError("<spec>", "out", "missing output path")
    RENDERERS[kind](inputs, out, spec.get("style") or {})
