"""Rendering backend: CSV in, deterministic PNG/SVG out."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .recipes import FigureRecipe

# byte-stable output: no dates, fixed hash salt for SVG element ids
matplotlib.rcParams["svg.hashsalt"] = "ccqed-figures"


class FigureDataError(ValueError):
    """A CSV input was missing, truncated or malformed."""


def _read_csv(path: Path, expected_columns: int):
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise FigureDataError(f"{path}: cannot read ({exc})") from None
    if not lines:
        raise FigureDataError(f"{path}: file is empty")
    header = lines[0].split(",")
    if len(header) != expected_columns:
        raise FigureDataError(
            f"{path}: line 1: expected {expected_columns} columns, found {len(header)}"
        )
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != expected_columns:
            raise FigureDataError(
                f"{path}: line {lineno}: expected {expected_columns} fields, found {len(parts)}"
            )
        rows.append((lineno, parts))
    if not rows:
        raise FigureDataError(f"{path}: no data rows")
    return header, rows


def _parse_float(path: Path, lineno: int, text: str, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise FigureDataError(
            f"{path}: line {lineno}: column {column!r} is not a number: {text!r}"
        ) from None


def read_density(path: Path):
    """Long-format density CSV -> (times, sites, grid, emitter_series)."""
    _, rows = _read_csv(path, 3)
    times: list[float] = []
    per_time: dict[float, dict] = {}
    for lineno, (t_text, l_text, v_text) in rows:
        t = _parse_float(path, lineno, t_text, "t")
        value = _parse_float(path, lineno, v_text, "value")
        slot = per_time.setdefault(t, {"sites": {}, "e": 0.0})
        if l_text == "e":
            slot["e"] = value
        else:
            try:
                site = int(l_text)
            except ValueError:
                raise FigureDataError(
                    f"{path}: line {lineno}: column 'l' is neither an integer nor 'e': {l_text!r}"
                ) from None
            slot["sites"][site] = value
    times = sorted(per_time)
    sites = sorted(per_time[times[0]]["sites"])
    grid = np.empty((len(times), len(sites)))
    emitter = np.empty(len(times))
    for i, t in enumerate(times):
        slot = per_time[t]
        if sorted(slot["sites"]) != sites:
            raise FigureDataError(f"{path}: inconsistent site set at t={t}")
        grid[i] = [slot["sites"][site] for site in sites]
        emitter[i] = slot["e"]
    return np.asarray(times), np.asarray(sites), grid, emitter


def read_series(path: Path):
    """Two-column CSV -> (x, y)."""
    header, rows = _read_csv(path, 2)
    xs, ys = [], []
    for lineno, (x_text, y_text) in rows:
        xs.append(_parse_float(path, lineno, x_text, header[0]))
        ys.append(_parse_float(path, lineno, y_text, header[1]))
    return np.asarray(xs), np.asarray(ys)


def _apply_transform(values: np.ndarray, transform: str) -> np.ndarray:
    if transform == "one_minus":
        return 1.0 - values
    if transform == "sqrt":
        return np.sqrt(np.clip(values, 0.0, None))
    return values


def _pick_times(available: np.ndarray, requested) -> list[int]:
    if len(requested) == 0:
        count = min(4, len(available))
        return sorted({int(i) for i in np.linspace(0, len(available) - 1, count)})
    indices = []
    for t in requested:
        indices.append(int(np.argmin(np.abs(available - t))))
    return indices


def _render_profile_panels(recipe: FigureRecipe, fig):
    n_inputs = len(recipe.inputs)
    first = True
    summary = {"panels": 0, "magnitude": recipe.magnitude}
    axes = fig.subplots(1, n_inputs, squeeze=False)[0]
    for ax, input_path in zip(axes, recipe.inputs):
        times, sites, grid, emitter = read_density(Path(input_path))
        picks = _pick_times(times, recipe.times)
        for idx in picks:
            profile = grid[idx]
            if recipe.magnitude:
                profile = np.sqrt(np.clip(profile, 0.0, None))
            ax.plot(sites, profile, lw=1.0, label=f"t={times[idx]:g}")
            e_value = math.sqrt(max(emitter[idx], 0.0)) if recipe.magnitude else emitter[idx]
            ax.axhline(e_value, color="crimson", lw=0.8, alpha=0.6)
        label = (
            recipe.labels[list(recipe.inputs).index(input_path)]
            if recipe.labels
            else Path(input_path).stem
        )
        ax.set_title(label, fontsize=9)
        ax.set_xlabel(recipe.xlabel or "site")
        if first:
            ax.set_ylabel(
                recipe.ylabel or ("sqrt(P(l,t))" if recipe.magnitude else "P(l,t)")
            )
            ax.legend(fontsize=7)
            first = False
        summary["panels"] += 1
    return summary


def _render_heatmap(recipe: FigureRecipe, fig):
    times, sites, grid, _ = read_density(Path(recipe.inputs[0]))
    values = _apply_transform(grid, recipe.transform)
    ax = fig.subplots()
    mesh = ax.pcolormesh(sites, times, values, shading="nearest", cmap="magma")
    fig.colorbar(mesh, ax=ax, label=recipe.ylabel or "P(l,t)")
    ax.set_xlabel(recipe.xlabel or "site")
    ax.set_ylabel("t")
    return {"shape": list(values.shape)}


def _render_gamma_curve(recipe: FigureRecipe, fig):
    k0, gamma = read_series(Path(recipe.inputs[0]))
    ax = fig.subplots()
    ax.plot(k0 / math.pi, gamma, "o-", ms=3, lw=1.0)
    ax.set_xlabel(recipe.xlabel or "k0 / pi")
    ax.set_ylabel(recipe.ylabel or "emission probability")
    peak = int(np.argmax(gamma))
    if recipe.annotate_peak:
        ax.annotate(
            f"max {gamma[peak]:.2f} at {k0[peak] / math.pi:.2f} pi",
            xy=(k0[peak] / math.pi, gamma[peak]),
            xytext=(0.05, 0.92),
            textcoords="axes fraction",
            arrowprops={"arrowstyle": "->", "lw": 0.8},
            fontsize=8,
        )
    return {"points": len(k0), "peak_value": float(gamma[peak])}


def _render_timeseries(recipe: FigureRecipe, fig):
    ax = fig.subplots()
    for i, input_path in enumerate(recipe.inputs):
        t, values = read_series(Path(input_path))
        values = _apply_transform(values, recipe.transform)
        label = recipe.labels[i] if recipe.labels else Path(input_path).stem
        ax.plot(t, values, lw=0.9, label=label)
    ax.set_xlabel(recipe.xlabel or "t")
    ax.set_ylabel(recipe.ylabel or "value")
    ax.legend(fontsize=8)
    return {"traces": len(recipe.inputs)}


_RENDERERS = {
    "profile_panels": _render_profile_panels,
    "heatmap": _render_heatmap,
    "gamma_curve": _render_gamma_curve,
    "timeseries": _render_timeseries,
}


def render(recipe: FigureRecipe, out_path) -> dict:
    """Render a recipe to PNG or SVG; returns a small summary for callers.

    Output is deterministic for fixed inputs (no embedded timestamps).
    """
    out_path = Path(out_path)
    if out_path.suffix.lower() not in (".png", ".svg"):
        raise FigureDataError(f"unsupported output format {out_path.suffix!r}")
    fig = plt.figure(figsize=(6.4, 3.6) if recipe.kind == "profile_panels" else (4.8, 3.4))
    try:
        summary = _RENDERERS[recipe.kind](recipe, fig)
        if recipe.title:
            fig.suptitle(recipe.title, fontsize=10)
        for ax in fig.get_axes():
            if recipe.x_range is not None:
                ax.set_xlim(*recipe.x_range)
            if recipe.y_range is not None:
                ax.set_ylim(*recipe.y_range)
        fig.tight_layout()
        out_path.parent.mkdir(parents=True, exist_ok=True)
        metadata = {"Date": None} if out_path.suffix.lower() == ".svg" else {}
        fig.savefig(out_path, dpi=150, metadata=metadata)
    finally:
        plt.close(fig)
    summary["output"] = str(out_path)
    summary["kind"] = recipe.kind
    return summary
