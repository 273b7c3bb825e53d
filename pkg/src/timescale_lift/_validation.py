"""Input validation helpers shared by every module."""

import numpy as np

from .exceptions import NotSymmetricError

TAU_SYM = 1e-10


def as_matrix(x, name="matrix", allow_empty=False):
    """Return ``x`` as a finite 2-D float array.

    Scalars become 1x1 matrices and 1-D inputs become column vectors.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got {arr.ndim} dimensions")
    if not allow_empty and arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def check_square(x, name="matrix"):
    arr = as_matrix(x, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def check_symmetric(x, name="matrix", tol=TAU_SYM):
    """Validate near-symmetry and return the symmetrized matrix.

    The relative asymmetry ``max|M - M'| / max|M|`` must not exceed ``tol``.
    """
    arr = check_square(x, name)
    scale = np.max(np.abs(arr)) if arr.size else 0.0
    asym = np.max(np.abs(arr - arr.T)) if arr.size else 0.0
    if asym > tol * max(scale, np.finfo(float).tiny):
        raise NotSymmetricError(
            f"{name} is not symmetric: asymmetry {asym:.3e} vs scale {scale:.3e}"
        )
    return 0.5 * (arr + arr.T)


def check_dims(rows, expected, name):
    if rows != expected:
        raise ValueError(f"{name} has {rows} rows, expected {expected}")


def symmetrize(x):
    return 0.5 * (x + x.T)
