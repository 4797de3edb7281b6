"""Numeric inner loops behind a backend switch.

Two implementations share one contract: allocation-free loops compiled by
numba (default) and vectorized numpy (``FIXGEN_BACKEND=numpy``).  Callers
pass contiguous float64 arrays.

Functions
---------
ball_slacks(centers, radii, y)
    ``||y - c_i|| - r_i`` for every row of ``centers``.
minmax_ball_center(centers, radii, y0, gap_tol)
    Minimize ``max_i ||y - c_i|| - r_i``; returns ``(y, value, rounds)``
    where ``value`` is the max slack at ``y`` over all balls.
nearest_in_hull(vertices, x, tol)
    Nearest point of the convex hull of the rows of ``vertices`` to ``x``
    and its barycentric weights (Wolfe's minimum-norm-point method).
dykstra_halfspaces(x, normals, offsets, max_sweeps, tol)
    Projection onto ``{z : normals @ z <= offsets}``; returns
    ``(y, sweeps, residual)``.
pairwise_ratio_max(xs, ys, min_sep)
    Largest ``||y_i - y_j|| / ||x_i - x_j||`` over pairs separated by at
    least ``min_sep``; returns ``(ratio, i, j)``.
"""
from ._accel import backend

if backend() == "numba":
    from ._kernels_numba import (
        ball_slacks,
        dykstra_halfspaces,
        minmax_ball_center,
        nearest_in_hull,
        pairwise_ratio_max,
    )
else:
    from ._kernels_numpy import (
        ball_slacks,
        dykstra_halfspaces,
        minmax_ball_center,
        nearest_in_hull,
        pairwise_ratio_max,
    )

__all__ = [
    "ball_slacks",
    "minmax_ball_center",
    "nearest_in_hull",
    "dykstra_halfspaces",
    "pairwise_ratio_max",
]
