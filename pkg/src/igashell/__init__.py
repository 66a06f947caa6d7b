"""Rotation-free isogeometric Kirchhoff-Love thin-shell solver.

Smooth NURBS surface patches carry both membrane and bending response
through displacement degrees of freedom only; edge rotation conditions
(clamps, symmetry planes, patch coupling across folds) enter through
penalty or Lagrange-multiplier constraints on the surface normal.
"""

__version__ = "0.1.0"

from .geometry import Mesh, Patch
from .materials import (CanhamMaterial, KoiterMaterial, MixedMaterial,
                        ProjectedNeoHooke)
from .constraints import Multiplier, Penalty, RotationConstraint
from .solver import (Model, NonConvergenceError, StepResult, displacement_at,
                     linear_solve, solve)

__all__ = [
    "__version__", "Mesh", "Patch", "CanhamMaterial", "KoiterMaterial",
    "MixedMaterial", "ProjectedNeoHooke", "Multiplier", "Penalty",
    "RotationConstraint", "Model", "NonConvergenceError", "StepResult",
    "displacement_at", "linear_solve", "solve",
]
