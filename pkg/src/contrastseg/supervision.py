"""Training-signal formulas: partial cross-entropy, entropy weights, weighted KL.

Labels are sparse: only annotated pixels carry a 0/1 class.  The
partial cross-entropy averages the negative log-likelihood over those
pixels.  The weighted KL divergence aligns a prediction with the
variational supervision field u over all pixels, each pixel weighted by
w = exp(-2 h(u)) where h is the binary entropy in nats, so confident
supervision pixels dominate.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import rel_entr

from .errors import ValidationError
from .fields import as_unit_field

__all__ = [
    "EPS_LOG",
    "SparseLabels",
    "labels_from_annotations",
    "partial_cross_entropy",
    "entropy_weights",
    "weighted_kl",
    "total_loss",
]

EPS_LOG = 1e-7


@dataclass
class SparseLabels:
    """Sparse pixel labels: parallel flat indices and {0, 1} classes."""

    indices: np.ndarray
    labels: np.ndarray
    shape: tuple = field(default=None)

    def validate(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        lab = np.asarray(self.labels)
        if idx.ndim != 1 or lab.shape != idx.shape:
            raise ValidationError("indices and labels must be parallel 1-D arrays")
        if idx.size and len(np.unique(idx)) != idx.size:
            raise ValidationError("label indices must be unique")
        if not np.all(np.isin(lab, (0, 1))):
            raise ValidationError("labels must be 0 or 1")
        if self.shape is not None:
            n = int(self.shape[0]) * int(self.shape[1])
            if idx.size and (idx.min() < 0 or idx.max() >= n):
                raise ValidationError("label index out of bounds for shape %s" % (self.shape,))
        self.indices = idx
        self.labels = lab.astype(np.float64)
        return self

    def __len__(self):
        return int(np.asarray(self.indices).size)


def labels_from_annotations(annotations, shape, expand=False):
    """Build sparse labels from an annotation set in field space.

    in_target points label 1, out_of_target points label 0.  With
    ``expand`` each point grows to its 3x3 neighborhood, clipped at the
    borders; pixels claimed by both classes are dropped.
    """
    h, w = int(shape[0]), int(shape[1])
    p_pts, q_pts = annotations.field_points()

    def collect(points):
        out = set()
        for x, y in points:
            if not (0 <= x < w and 0 <= y < h):
                raise ValidationError("annotation point (%d, %d) is outside the "
                                      "%dx%d field" % (x, y, w, h))
            if expand:
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        nx, ny = x + dx, y + dy
                        if 0 <= nx < w and 0 <= ny < h:
                            out.add(ny * w + nx)
            else:
                out.add(y * w + x)
        return out

    pos = collect(p_pts)
    neg = collect(q_pts)
    both = pos & neg
    pos -= both
    neg -= both
    idx = np.array(sorted(pos) + sorted(neg), dtype=np.int64)
    lab = np.array([1] * len(pos) + [0] * len(neg), dtype=np.float64)
    order = np.argsort(idx, kind="stable")
    return SparseLabels(indices=idx[order], labels=lab[order], shape=(h, w)).validate()


def partial_cross_entropy(yhat, labels):
    """Mean negative log-likelihood over the labeled pixels.

    Probabilities are clamped to [EPS_LOG, 1 - EPS_LOG] before the logs.
    """
    pred = as_unit_field(yhat, "prediction")
    labels.validate()
    if len(labels) == 0:
        raise ValidationError("need at least one labeled pixel")
    p = np.clip(pred.ravel()[labels.indices], EPS_LOG, 1.0 - EPS_LOG)
    y = labels.labels
    ll = y * np.log(p) + (1.0 - y) * np.log(1.0 - p)
    return float(-ll.mean())


def entropy_weights(u):
    """Confidence weights w = exp(-2 h(u)), h the binary entropy in nats.

    Evaluated as 2**(-2 h2) with h2 the entropy in bits, the same
    quantity, so w is exactly 1 where u is 0 or 1 and exactly 0.25 at
    the maximum-entropy point u = 0.5.
    """
    arr = as_unit_field(u, "entropy input")
    with np.errstate(divide="ignore", invalid="ignore"):
        h2 = -np.where(arr > 0.0, arr * np.log2(arr), 0.0) \
             - np.where(arr < 1.0, (1.0 - arr) * np.log2(1.0 - arr), 0.0)
    return np.exp2(-2.0 * h2)


def weighted_kl(yhat, u):
    """Entropy-weighted mean KL divergence KL(u || yhat) over all pixels.

    Each pixel contributes w * (u ln(u/yhat) + (1-u) ln((1-u)/(1-yhat)))
    with yhat clamped away from {0, 1}; the zero-probability terms of u
    follow the 0 ln 0 = 0 convention, so the divergence is always
    nonnegative.
    """
    pred = as_unit_field(yhat, "prediction")
    sup = as_unit_field(u, "supervision")
    if pred.shape != sup.shape:
        raise ValidationError("prediction and supervision shapes differ: %s vs %s"
                              % (pred.shape, sup.shape))
    w = entropy_weights(sup)
    p = np.clip(pred, EPS_LOG, 1.0 - EPS_LOG)
    kl = rel_entr(sup, p) + rel_entr(1.0 - sup, 1.0 - p)
    return float((w * kl).mean())


def total_loss(yhat, labels, u):
    """Overall loss: (total, pce, wkl) with total = pce + wkl exactly."""
    pce = partial_cross_entropy(yhat, labels)
    wkl = weighted_kl(yhat, u)
    return pce + wkl, pce, wkl
