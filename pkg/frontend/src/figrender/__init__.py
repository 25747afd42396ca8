"""Figure rendering for the selective-inference simulation harness.

Consumes the harness CSV outputs (length curves, quantile floors, the
certificate heatmap, and the quantile study with its fitted curves) and
writes deterministic images, SVG by default.
"""

__version__ = "0.1.0"

from .figures import STANDARD_LENGTH_95, FigureJob, Style, render
from .schemas import KINDS, SCHEMAS, SchemaError, read_table

__all__ = [
    "__version__",
    "STANDARD_LENGTH_95",
    "FigureJob",
    "Style",
    "render",
    "KINDS",
    "SCHEMAS",
    "SchemaError",
    "read_table",
]
