"""Spectral analysis of bubble-diamond graphs.

Graph construction, direct diagonalization, spectral decimation, densities
of states, exact gap labels and the compact-limit spectrum.
"""

from .graph import BubbleGraph, GraphError, build_graph, vertex_count
from .oracle import dirichlet_laplacian, eigensolve, neumann_laplacian, oracle_spectrum
from .decimation import (
    decimation_map,
    inverse_branch,
    predicted_dirichlet_spectrum,
    predicted_neumann_spectrum,
    schur_residual,
)
from .dos import counting_function, finite_dos, limit_dos, staircase
from .gaps import enumerate_gaps, gap_label, ifs_orbit
from .compact import compact_spectrum, koenigs_T

__version__ = "0.1.0"
