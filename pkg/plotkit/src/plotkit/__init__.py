"""SVG figure rendering for fitscape analysis artifacts."""

__version__ = "0.1.0"

from .figures import FIGURE_KINDS, render
from .schemas import SchemaError

__all__ = ["FIGURE_KINDS", "render", "SchemaError", "__version__"]
