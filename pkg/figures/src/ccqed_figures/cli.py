"""Command line: ``ccqed-render --recipe recipe.json --out figure.png``."""

from __future__ import annotations

import argparse
import sys

from .recipes import RecipeError, load_recipe
from .render import FigureDataError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccqed-render", description="Render a ccqed CSV figure recipe"
    )
    parser.add_argument("--recipe", required=True, help="recipe JSON path")
    parser.add_argument("--out", required=True, help="output image (.png or .svg)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        recipe = load_recipe(args.recipe)
        summary = render(recipe, args.out)
    except (RecipeError, FigureDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{summary['kind']}: wrote {summary['output']}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
