"""Post-hoc figure generation from capflow trace CSV and snapshot files."""

from .render import KINDS, PlotSpec, render
from .schema import SchemaMismatch, load_snapshot, load_trace

__version__ = "0.1.0"
