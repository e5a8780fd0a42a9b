"""Figure recipes: a JSON document fully determines one rendered image.

Kinds
-----
profile_panels  site-density profiles at selected instants, one panel per
                input file; ``magnitude: true`` plots sqrt(P) to make faint
                outgoing packets visible, and the emitter value is drawn as
                a horizontal marker line.
heatmap         (t, l) colour map of one density series.
gamma_curve     emission probability versus momentum, peak annotated.
timeseries      one trace per input file, optionally transformed
                (``one_minus`` turns P_res into the emission deficit).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

KINDS = ("profile_panels", "heatmap", "gamma_curve", "timeseries")
TRANSFORMS = ("none", "one_minus", "sqrt")


class RecipeError(ValueError):
    """Recipe failed validation."""


@dataclass(frozen=True)
class FigureRecipe:
    kind: str
    inputs: tuple[Path, ...]
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    labels: tuple[str, ...] = ()
    times: tuple[float, ...] = ()
    magnitude: bool = False
    transform: str = "none"
    annotate_peak: bool = False
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise RecipeError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise RecipeError("recipe needs at least one input file")
        if self.transform not in TRANSFORMS:
            raise RecipeError(f"unknown transform {self.transform!r}")
        if self.kind in ("heatmap", "gamma_curve") and len(self.inputs) != 1:
            raise RecipeError(f"{self.kind} takes exactly one input file")
        if self.labels and len(self.labels) != len(self.inputs):
            raise RecipeError("labels must match inputs one to one")


_KNOWN_KEYS = {
    "kind",
    "inputs",
    "title",
    "xlabel",
    "ylabel",
    "labels",
    "times",
    "magnitude",
    "transform",
    "annotate_peak",
    "x_range",
    "y_range",
}


def load_recipe(path) -> FigureRecipe:
    """Read and validate a recipe JSON; input paths resolve relative to it."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise RecipeError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise RecipeError(f"{path}: recipe must be a JSON object")
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise RecipeError(f"{path}: unknown key(s) {sorted(unknown)}")
    if "kind" not in raw or "inputs" not in raw:
        raise RecipeError(f"{path}: recipe needs 'kind' and 'inputs'")
    inputs = tuple((path.parent / p).resolve() for p in raw["inputs"])
    for input_path in inputs:
        if not input_path.exists():
            raise RecipeError(f"{path}: input file {input_path} does not exist")
    return FigureRecipe(
        kind=str(raw["kind"]),
        inputs=inputs,
        title=str(raw.get("title", "")),
        xlabel=str(raw.get("xlabel", "")),
        ylabel=str(raw.get("ylabel", "")),
        labels=tuple(str(x) for x in raw.get("labels", ())),
        times=tuple(float(t) for t in raw.get("times", ())),
        magnitude=bool(raw.get("magnitude", False)),
        transform=str(raw.get("transform", "none")),
        annotate_peak=bool(raw.get("annotate_peak", False)),
        x_range=tuple(raw["x_range"]) if raw.get("x_range") else None,
        y_range=tuple(raw["y_range"]) if raw.get("y_range") else None,
    )
