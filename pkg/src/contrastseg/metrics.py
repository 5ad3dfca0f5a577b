"""Segmentation metrics: Dice, accuracy, Cohen's kappa, rank-based AUC."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import ValidationError
from .fields import as_binary_mask, as_scalar_field

__all__ = [
    "ConfusionCounts",
    "confusion",
    "dice",
    "accuracy",
    "kappa",
    "auc",
    "evaluate",
]


@dataclass
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


def confusion(pred, gt):
    """Exact confusion counts between two binary masks."""
    p = as_binary_mask(pred)
    g = as_binary_mask(gt)
    if p.shape != g.shape:
        raise ValidationError("mask shapes differ: %s vs %s" % (p.shape, g.shape))
    pb = p.astype(bool)
    gb = g.astype(bool)
    return ConfusionCounts(
        tp=int(np.count_nonzero(pb & gb)),
        fp=int(np.count_nonzero(pb & ~gb)),
        tn=int(np.count_nonzero(~pb & ~gb)),
        fn=int(np.count_nonzero(~pb & gb)),
    )


def dice(c):
    """Dice coefficient 2 tp / (2 tp + fp + fn); both-empty counts as 1."""
    denom = 2 * c.tp + c.fp + c.fn
    if denom == 0:
        return 1.0
    return 2.0 * c.tp / denom


def accuracy(c):
    """Fraction of agreeing pixels."""
    if c.total == 0:
        raise ValidationError("empty confusion counts")
    return (c.tp + c.tn) / c.total


def kappa(c):
    """Cohen's kappa (p_o - p_e) / (1 - p_e) with marginal chance agreement p_e.

    When p_e = 1 (both raters constant and equal marginals), kappa is 1
    for perfect agreement and 0 otherwise.
    """
    n = c.total
    if n == 0:
        raise ValidationError("empty confusion counts")
    p_o = (c.tp + c.tn) / n
    pred_pos = (c.tp + c.fp) / n
    gt_pos = (c.tp + c.fn) / n
    p_e = pred_pos * gt_pos + (1.0 - pred_pos) * (1.0 - gt_pos)
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return (p_o - p_e) / (1.0 - p_e)


def auc(scores, gt):
    """Area under the ROC curve by the rank statistic, ties counting half.

    Equivalent to the normalized Mann-Whitney U: the probability that a
    random positive pixel outscores a random negative one.
    """
    s = as_scalar_field(scores).ravel()
    g = as_binary_mask(gt).ravel()
    if s.shape != g.shape:
        raise ValidationError("scores and gt sizes differ: %d vs %d" % (s.size, g.size))
    n_pos = int(g.sum())
    n_neg = g.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("AUC is undefined for single-class ground truth")
    ranks = rankdata(s, method="average")
    u_stat = ranks[g == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u_stat / (n_pos * n_neg))


def evaluate(pred, gt, scores=None):
    """All four metrics as a report dict.

    With ``scores`` omitted the binary prediction itself serves as the
    score field for AUC.
    """
    c = confusion(pred, gt)
    s = as_scalar_field(np.asarray(pred, dtype=np.float64) if scores is None else scores)
    return {
        "dice": float(dice(c)),
        "accuracy": float(accuracy(c)),
        "kappa": float(kappa(c)),
        "auc": auc(s, gt),
    }
