"""Figure rendering for the cislunar simulator's CSV artifacts."""

__version__ = "0.1.0"

from .figures import FIGURE_KINDS, FigureSpec, FigureSpecError, render
from .schema import EmptyInputError, SchemaError, load_table

__all__ = ["FIGURE_KINDS", "FigureSpec", "FigureSpecError", "render",
           "EmptyInputError", "SchemaError", "load_table"]
