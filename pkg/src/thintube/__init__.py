"""thintube: spectral verification toolkit for magnetic Laplacians on thin closed tubes.

Subpackages by task:

* ``forms``          finite-dimensional complex quadratic-form laboratory
* ``curves``         closed arc-length curves, Frenet frames, tube-map scalars
* ``cross_section``  2-D Dirichlet eigenproblems on masked grids
* ``tube``           pullback, gauge shift and assembly of the renormalized tube form
* ``effective``      one-dimensional effective operator on the curve
* ``eigs``           shared Hermitian eigen-kernel
* ``cli``            batch driver with CSV outputs
"""

__version__ = "0.1.0"

from .eigs import SpectrumReport, apply_resolvent, operator_norm, smallest_eigs  # noqa: F401
