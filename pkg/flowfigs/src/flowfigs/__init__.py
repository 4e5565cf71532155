"""Figure rendering for curveflow experiment artifacts."""

from .figures import KINDS, PlotSpec, render
from .io import SchemaError

__version__ = "0.1.0"
