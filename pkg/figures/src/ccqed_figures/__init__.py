"""Figure rendering for ccqed CSV outputs (CSV-only coupling)."""

__version__ = "0.1.0"

from .recipes import FigureRecipe, RecipeError, load_recipe
from .render import FigureDataError, render

__all__ = ["FigureRecipe", "RecipeError", "FigureDataError", "load_recipe", "render"]
