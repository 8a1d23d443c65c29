"""Hole percolation on the d-dimensional cubical lattice.

Faces of the unit lattice are open independently with probability ``p``; holes
are the bounded components of the complement, equivalently the finite clusters
of the dual bonds crossing closed faces.
"""

from .config import Configuration, SimulationParams, coupled_field, sample_configuration, threshold
from .errors import InvariantViolation, OracleScaleExceeded, UnknownClusterError
from .holes import build_hole_graph, extract_holes, trifurcations
from .lattice import DualBond, DualVertex, Face, Window

__version__ = "0.1.0"

__all__ = [
    "Configuration", "SimulationParams", "coupled_field", "sample_configuration", "threshold",
    "InvariantViolation", "OracleScaleExceeded", "UnknownClusterError",
    "build_hole_graph", "extract_holes", "trifurcations",
    "DualBond", "DualVertex", "Face", "Window",
]
