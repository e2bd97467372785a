"""Charts and tables rendered from eovsim sweep summary CSVs."""

__version__ = "0.1.0"

from .charts import offsets_figure, slope_figure, slope_points
from .summary import Summary, SummaryFormatError, load_summary
from .table import format_table

__all__ = [
    "Summary",
    "SummaryFormatError",
    "format_table",
    "load_summary",
    "offsets_figure",
    "slope_figure",
    "slope_points",
]
