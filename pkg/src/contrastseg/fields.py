"""Dense field types and the shared normalization / threshold helpers.

All fields are numpy arrays in a single canonical layout: scalar fields
are (H, W) float64, feature maps are (C, H, W) float64, binary masks are
(H, W) uint8 with values in {0, 1}.  Storage is row-major with
(row=y, col=x) indexing; external (x, y) coordinates are converted at
the I/O boundary.
"""

import numpy as np

from .errors import ValidationError

__all__ = [
    "as_scalar_field",
    "as_feature_map",
    "as_binary_mask",
    "normalize_minmax",
    "threshold",
    "field_stats",
]


def as_scalar_field(m):
    """Validate and convert ``m`` to a 2-D float64 field.

    Parameters
    ----------
    m : array_like
        Any 2-D numeric array.

    Returns
    -------
    numpy.ndarray
        (H, W) float64 array with all values finite.
    """
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError("scalar field must be 2-D, got shape %s" % (arr.shape,))
    if arr.size == 0:
        raise ValidationError("scalar field must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("scalar field contains non-finite values")
    return arr


def as_feature_map(a):
    """Validate and convert ``a`` to a 3-D (C, H, W) float64 feature map."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 3:
        raise ValidationError("feature map must be 3-D (C, H, W), got shape %s" % (arr.shape,))
    if arr.size == 0:
        raise ValidationError("feature map must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("feature map contains non-finite values")
    return arr


def as_binary_mask(m):
    """Validate and convert ``m`` to a (H, W) uint8 mask with values in {0, 1}."""
    arr = np.asarray(m)
    if arr.ndim != 2:
        raise ValidationError("binary mask must be 2-D, got shape %s" % (arr.shape,))
    if arr.size == 0:
        raise ValidationError("binary mask must be nonempty")
    vals = np.unique(arr)
    if not np.all(np.isin(vals, (0, 1))):
        raise ValidationError("binary mask values must be exactly 0 or 1")
    return arr.astype(np.uint8)


def as_unit_field(u, name="field"):
    """Validate a scalar field whose values must lie in [0, 1]."""
    arr = as_scalar_field(u)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValidationError("%s values must lie in [0, 1]" % name)
    return arr


def normalize_minmax(m):
    """Rescale a field affinely onto [0, 1].

    Returns ``(m - min) / (max - min)``.  A constant field is degenerate
    (max equals min) and maps to the all-zero field: a flat map carries
    no localization evidence, and zero keeps downstream averaging
    well-defined.
    """
    arr = as_scalar_field(m)
    lo = arr.min()
    hi = arr.max()
    if hi == lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)


def threshold(u, gamma):
    """Binarize ``u`` by the strict rule ``u > gamma``.

    Parameters
    ----------
    u : array_like
        Scalar field with values in [0, 1].
    gamma : float
        Cut level in [0, 1].

    Returns
    -------
    numpy.ndarray
        uint8 mask, 1 exactly where ``u`` strictly exceeds ``gamma``.
    """
    if not 0.0 <= float(gamma) <= 1.0:
        raise ValidationError("gamma must lie in [0, 1], got %r" % (gamma,))
    arr = as_unit_field(u, "threshold input")
    return (arr > float(gamma)).astype(np.uint8)


def field_stats(m):
    """Return ``(min, max, mean)`` over all elements of ``m``."""
    arr = as_scalar_field(m)
    return float(arr.min()), float(arr.max()), float(arr.mean())
