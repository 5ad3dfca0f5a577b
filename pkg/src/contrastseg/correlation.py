"""Correlation and contrast maps from annotated points over a feature map.

For an annotated point with feature vector f, the correlation map S is
the per-pixel cosine similarity between f and the feature vector at
every location.  A contrast map subtracts a scaled out-of-target
correlation map, rectifies, squares, and min-max normalizes:
C = N((relu(S_p - eta * S_q))^2).  Averaging over all out-of-target
points q gives the contrast mean map z_p that the variational solver
segments.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fields import as_feature_map, normalize_minmax

__all__ = [
    "extract_feature",
    "cosine_similarity_map",
    "contrast_map",
    "ContrastSet",
    "build_contrast_set",
]

ETA_DEFAULT = 0.6


def extract_feature(features, point):
    """Return the channel vector of ``features`` at field-space ``point``.

    Parameters
    ----------
    features : array_like
        (C, H, W) feature map.
    point : tuple
        (x, y) integer coordinates in feature-map space.

    Returns
    -------
    numpy.ndarray
        Length-C vector.
    """
    a = as_feature_map(features)
    x, y = int(point[0]), int(point[1])
    _, h, w = a.shape
    if not (0 <= x < w and 0 <= y < h):
        raise ValidationError("point (%d, %d) is outside the %dx%d feature grid"
                              % (x, y, w, h))
    return a[:, y, x].copy()


def cosine_similarity_map(f, features):
    """Cosine similarity between vector ``f`` and every pixel's feature vector.

    Zero-norm vectors (either ``f`` or a pixel's vector) yield similarity
    0 there: a zero feature carries no evidence either way.  Output is
    clipped to [-1, 1] to absorb floating-point overshoot.
    """
    a = as_feature_map(features)
    vec = np.asarray(f, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != a.shape[0]:
        raise ValidationError("feature vector length %s does not match %d channels"
                              % (vec.shape, a.shape[0]))
    fnorm = np.linalg.norm(vec)
    anorm = np.sqrt((a * a).sum(axis=0))
    dots = np.tensordot(vec, a, axes=([0], [0]))
    denom = fnorm * anorm
    with np.errstate(invalid="ignore", divide="ignore"):
        sim = np.where(denom > 0.0, dots / np.where(denom > 0.0, denom, 1.0), 0.0)
    return np.clip(sim, -1.0, 1.0)


def contrast_map(s_p, s_q, eta):
    """Contrast map N((relu(S_p - eta * S_q))^2), values in [0, 1]."""
    if not 0.0 <= float(eta) <= 1.0:
        raise ValidationError("eta must lie in [0, 1], got %r" % (eta,))
    sp = np.asarray(s_p, dtype=np.float64)
    sq = np.asarray(s_q, dtype=np.float64)
    if sp.shape != sq.shape:
        raise ValidationError("correlation map shapes differ: %s vs %s"
                              % (sp.shape, sq.shape))
    diff = np.maximum(sp - float(eta) * sq, 0.0)
    return normalize_minmax(diff * diff)


@dataclass
class ContrastSet:
    """All correlation and contrast maps for one annotation set.

    Point lists are stored in canonical sorted order so every derived
    artifact is invariant, bit for bit, under permutations of the input
    sets.
    """

    points_in: list
    points_out: list
    corr_in: list
    corr_out: list
    maps: list  # maps[i][j] = contrast map for (p_i, q_j)
    means: list  # means[i] = z_p for p_i

    def __len__(self):
        return len(self.points_in)


def _canonical(points):
    return sorted((int(x), int(y)) for x, y in points)


def build_contrast_set(features, annotations, eta=ETA_DEFAULT):
    """Build every S_p, S_q, C_{p,q}, and contrast mean map z_p.

    Parameters
    ----------
    features : array_like
        (C, H, W) feature map.
    annotations : Annotations
        Point sets; rescaled to field space internally.
    eta : float
        Contrast strength in [0, 1].

    Returns
    -------
    ContrastSet
    """
    a = as_feature_map(features)
    p_pts, q_pts = annotations.field_points()
    if len(p_pts) < 1 or len(q_pts) < 1:
        raise ValidationError("need at least one in-target and one out-of-target point")
    p_pts = _canonical(p_pts)
    q_pts = _canonical(q_pts)
    corr_in = [cosine_similarity_map(extract_feature(a, p), a) for p in p_pts]
    corr_out = [cosine_similarity_map(extract_feature(a, q), a) for q in q_pts]
    maps = []
    means = []
    for s_p in corr_in:
        row = [contrast_map(s_p, s_q, eta) for s_q in corr_out]
        maps.append(row)
        means.append(np.mean(np.stack(row), axis=0))
    return ContrastSet(points_in=p_pts, points_out=q_pts,
                       corr_in=corr_in, corr_out=corr_out,
                       maps=maps, means=means)
