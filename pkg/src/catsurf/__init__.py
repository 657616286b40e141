"""Computational toolkit for polyhedral surfaces with curvature bounded above.

Modules:

- ``model_space``: the model planes of constant curvature and their triangles
- ``comparison``: comparison triangles and sampled CAT(kappa) tests
- ``triangulation``: vertex-edge refinements in projective charts
- ``polyhedral``: glued surfaces, cone curvature, refinement, distances
- ``smoothing``: certified smoothing of cone points
- ``cli``: the ``catsurf`` command
"""

from .model_space import ModelSpace, TriangleData, model_space

__all__ = ["ModelSpace", "TriangleData", "model_space"]
__version__ = "0.1.0"
