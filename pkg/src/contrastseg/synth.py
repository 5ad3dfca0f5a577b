"""Deterministic synthetic instances with known ground truth.

Instances are fully determined by a seed: blob layout, per-pixel
features, image noise, and annotation points each consume an
independent, documented substream of a counter-based generator
(Philox).  Class feature centers are unit vectors separated by a
configurable angle, so correlation-map levels are known analytically;
an optional novel region draws from a third center orthogonal to both
classes.  A brute-force oracle enumerates every binary mask on grids up
to 4x4.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import distance_transform_edt, gaussian_filter

from .errors import GenerationError, ValidationError
from .fields import as_scalar_field
from .io import Annotations

__all__ = ["SynthSpec", "SynthInstance", "generate", "oracle_best_mask"]

# Substream indices: same seed, different roles.
_STREAM_BLOBS = 0
_STREAM_FEATURES = 1
_STREAM_IMAGE = 2
_STREAM_POINTS = 3

_LEVEL_IN = 0.8
_LEVEL_OUT = 0.25
_LEVEL_NOVEL = 0.55


@dataclass
class SynthSpec:
    """Parameters of one synthetic instance."""

    seed: int
    height: int = 64
    width: int = 64
    channels: int = 8
    n_blobs: int = 1
    blob_kind: str = "disk"
    feature_separation: float = 90.0
    noise_sigma: float = 0.0
    novel_region: bool = False
    pairs: int = 3
    margin: int = 1

    def validate(self):
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64):
            raise ValidationError("seed must be a 64-bit nonnegative integer")
        for name in ("height", "width", "channels", "n_blobs", "pairs"):
            val = getattr(self, name)
            if not (isinstance(val, int) and val > 0):
                raise ValidationError("%s must be a positive integer" % name)
        if self.blob_kind not in ("disk", "noise"):
            raise ValidationError("blob_kind must be 'disk' or 'noise'")
        if not 0.0 < self.feature_separation <= 180.0:
            raise ValidationError("feature_separation must be in (0, 180] degrees")
        if self.noise_sigma < 0:
            raise ValidationError("noise_sigma must be >= 0")
        if not (isinstance(self.margin, int) and self.margin >= 0):
            raise ValidationError("margin must be a nonnegative integer")
        if self.novel_region and self.channels < 3:
            raise ValidationError("novel_region needs at least 3 channels")
        return self

    def to_mapping(self):
        return {
            "seed": self.seed, "height": self.height, "width": self.width,
            "channels": self.channels, "n_blobs": self.n_blobs,
            "blob_kind": self.blob_kind,
            "feature_separation": self.feature_separation,
            "noise_sigma": self.noise_sigma, "novel_region": self.novel_region,
            "pairs": self.pairs, "margin": self.margin,
        }

    @classmethod
    def from_mapping(cls, mapping):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(mapping) - known
        if unknown:
            raise ValidationError("unknown synth spec keys: %s" % sorted(unknown))
        if "seed" not in mapping:
            raise ValidationError("synth spec requires a seed")
        return cls(**mapping).validate()


@dataclass
class SynthInstance:
    """One generated instance: the four artifacts plus the novel mask."""

    features: np.ndarray
    image: np.ndarray
    gt: np.ndarray
    annotations: Annotations
    novel: np.ndarray = None


def _stream(seed, index):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _disk_layout(spec, rng):
    h, w = spec.height, spec.width
    n_regions = spec.n_blobs + (1 if spec.novel_region else 0)
    r_hi = max(2.0, min(h, w) / 5.0)
    r_lo = max(1.5, min(h, w) / 8.0)
    gap = 2.0 * spec.margin + 2.0
    for _ in range(200):
        disks = []
        ok = True
        for _ in range(n_regions):
            placed = False
            for _ in range(200):
                r = rng.uniform(r_lo, r_hi)
                cx = rng.uniform(r + 1, w - r - 2) if w - r - 2 > r + 1 else w / 2.0
                cy = rng.uniform(r + 1, h - r - 2) if h - r - 2 > r + 1 else h / 2.0
                if all(math.hypot(cx - ox, cy - oy) >= r + orad + gap
                       for ox, oy, orad in disks):
                    disks.append((cx, cy, r))
                    placed = True
                    break
            if not placed:
                ok = False
                break
        if ok:
            yy, xx = np.mgrid[0:h, 0:w]
            gt = np.zeros((h, w), dtype=np.uint8)
            for cx, cy, r in disks[:spec.n_blobs]:
                gt |= ((xx - cx) ** 2 + (yy - cy) ** 2 <= r * r).astype(np.uint8)
            novel = None
            if spec.novel_region:
                cx, cy, r = disks[-1]
                novel = ((xx - cx) ** 2 + (yy - cy) ** 2 <= r * r).astype(np.uint8)
            if gt.any() and not gt.all():
                return gt, novel
    raise GenerationError("could not place %d disjoint blobs on a %dx%d grid"
                          % (n_regions, w, h))


def _noise_layout(spec, rng):
    h, w = spec.height, spec.width
    base = rng.normal(size=(h, w))
    smooth = gaussian_filter(base, sigma=max(1.0, min(h, w) / 8.0))
    gt = (smooth > np.quantile(smooth, 0.7)).astype(np.uint8)
    novel = None
    if spec.novel_region:
        lo, hi = np.quantile(smooth, [0.45, 0.6])
        novel = ((smooth > lo) & (smooth <= hi)).astype(np.uint8)
        novel[gt == 1] = 0
    if not gt.any() or gt.all():
        raise GenerationError("noise layout degenerated to a single class")
    return gt, novel


def _feature_centers(spec):
    c = spec.channels
    theta = math.radians(spec.feature_separation)
    e_in = np.zeros(c)
    e_in[0] = 1.0
    e_out = np.zeros(c)
    if c >= 2:
        e_out[0] = math.cos(theta)
        e_out[1] = math.sin(theta)
    else:
        e_out[0] = math.cos(theta)
    e_nov = np.zeros(c)
    if spec.novel_region:
        e_nov[2] = 1.0
    return e_in, e_out, e_nov


def generate(spec):
    """Generate one instance; a pure, bitwise-reproducible function of its SynthSpec.

    Returns
    -------
    SynthInstance
        features (C, H, W), image (H, W) in [0, 1], gt mask, annotation
        set (reduction_factor 1), and the novel-region mask when
        requested.
    """
    spec.validate()
    h, w = spec.height, spec.width

    rng_blobs = _stream(spec.seed, _STREAM_BLOBS)
    if spec.blob_kind == "disk":
        gt, novel = _disk_layout(spec, rng_blobs)
    else:
        gt, novel = _noise_layout(spec, rng_blobs)

    e_in, e_out, e_nov = _feature_centers(spec)
    centers = np.empty((h, w, spec.channels))
    centers[:, :] = e_out
    centers[gt == 1] = e_in
    if novel is not None:
        centers[novel == 1] = e_nov
    rng_feat = _stream(spec.seed, _STREAM_FEATURES)
    features = centers + spec.noise_sigma * rng_feat.normal(size=centers.shape)
    features = np.ascontiguousarray(features.transpose(2, 0, 1))

    image = np.full((h, w), _LEVEL_OUT)
    image[gt == 1] = _LEVEL_IN
    if novel is not None:
        image[novel == 1] = _LEVEL_NOVEL
    rng_img = _stream(spec.seed, _STREAM_IMAGE)
    image = np.clip(image + spec.noise_sigma * rng_img.normal(size=image.shape), 0.0, 1.0)

    # Eligible annotation sites keep >= margin pixels between the point
    # and the GT boundary; out-of-target sites also avoid the novel blob.
    need = spec.margin + 1
    in_ok = (gt == 1) & (distance_transform_edt(gt) >= need)
    out_ok = (gt == 0) & (distance_transform_edt(1 - gt) >= need)
    if novel is not None:
        out_ok &= novel == 0
    rng_pts = _stream(spec.seed, _STREAM_POINTS)

    def pick(eligible, label):
        idx = np.flatnonzero(eligible)
        if idx.size < spec.pairs:
            raise GenerationError(
                "only %d eligible %s pixels for %d pairs at margin %d"
                % (idx.size, label, spec.pairs, spec.margin))
        chosen = rng_pts.choice(idx, size=spec.pairs, replace=False)
        return [(int(i % w), int(i // w)) for i in np.sort(chosen)]

    ann = Annotations(
        image_width=w, image_height=h, reduction_factor=1,
        in_target=pick(in_ok, "in-target"),
        out_of_target=pick(out_ok, "out-of-target"),
    ).validate()

    return SynthInstance(features=features, image=image, gt=gt,
                         annotations=ann, novel=novel)


def _mask_energy_terms(h, w):
    n = h * w
    idx = np.arange(2 ** n, dtype=np.uint32)
    shifts = (n - 1 - np.arange(n)).astype(np.uint32)
    bits = ((idx[:, None] >> shifts[None, :]) & 1).astype(np.float64)
    masks = bits.reshape(-1, h, w)
    ux = np.zeros_like(masks)
    uy = np.zeros_like(masks)
    ux[:, :, :-1] = masks[:, :, 1:] - masks[:, :, :-1]
    uy[:, :-1, :] = masks[:, 1:, :] - masks[:, :-1, :]
    tv = np.hypot(ux, uy).reshape(len(idx), -1).sum(axis=1)
    return bits, masks, tv


def oracle_best_mask(z, lam):
    """Exhaustive minimizer of the discrete energy with g identically 1.

    Every binary mask on the grid is scored with its own closed-form
    region means; ties break toward smaller foreground area, then
    lexicographically smaller mask (row-major pixel order).  Grids
    larger than 4x4 are rejected.
    """
    zf = as_scalar_field(z)
    h, w = zf.shape
    if h > 4 or w > 4:
        raise ValidationError("oracle enumeration is limited to grids up to 4x4")
    if not lam > 0:
        raise ValidationError("lambda must be > 0")
    bits, masks, tv = _mask_energy_terms(h, w)
    flat = zf.ravel()
    n = flat.size
    n_in = bits.sum(axis=1)
    n_out = n - n_in
    z_in = bits @ flat
    z_out = flat.sum() - z_in
    mean = flat.mean()
    c1 = np.where(n_in > 0, z_in / np.maximum(n_in, 1.0), mean)
    c2 = np.where(n_out > 0, z_out / np.maximum(n_out, 1.0), mean)
    resid = (flat[None, :] - c1[:, None]) ** 2 - (flat[None, :] - c2[:, None]) ** 2
    energy = tv + float(lam) * (resid * bits).sum(axis=1)
    best = energy.min()
    cand = np.flatnonzero(energy == best)
    areas = n_in[cand]
    cand = cand[areas == areas.min()]
    return masks[cand.min()].astype(np.uint8)
