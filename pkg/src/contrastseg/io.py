"""Bit-exact serialization: NPY arrays, annotation JSON, PNG masks and heatmaps.

One format per role, all inspectable: dense arrays travel as NPY v1.0
little-endian float32, point annotations as a flat JSON object, masks as
8-bit grayscale PNG, heatmaps as 8-bit RGB PNG, metric and loss reports
as JSON.  Readers validate eagerly and report byte offsets for container
problems.
"""

import ast
import json
import struct
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import FormatError, ValidationError
from .fields import as_binary_mask, as_unit_field

__all__ = [
    "read_array",
    "write_array",
    "Annotations",
    "read_annotations",
    "write_annotations",
    "read_mask_png",
    "write_mask_png",
    "write_heatmap_png",
    "read_json",
    "write_json",
    "write_metrics_report",
]

_MAGIC = b"\x93NUMPY"


def write_array(arr, path):
    """Write a 2-D or 3-D array as NPY v1.0, little-endian float32, C-order.

    The header is emitted in canonical form (single spelling, 64-byte
    alignment) so identical arrays always produce byte-identical files.
    """
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim not in (2, 3):
        raise ValidationError("array must be 2-D or 3-D, got shape %s" % (a.shape,))
    if not np.all(np.isfinite(a)):
        raise ValidationError("array contains non-finite values")
    shape = "(" + ", ".join(str(n) for n in a.shape) + ")"
    header = "{'descr': '<f4', 'fortran_order': False, 'shape': %s, }" % shape
    pad = (-(len(_MAGIC) + 2 + 2 + len(header) + 1)) % 64
    header = header + " " * pad + "\n"
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(bytes((1, 0)))
        fh.write(struct.pack("<H", len(header)))
        fh.write(header.encode("ascii"))
        fh.write(a.astype("<f4").tobytes(order="C"))


def read_array(path):
    """Read an NPY v1.0 array file into float64.

    Returns a (H, W) scalar field for rank-2 files and a (C, H, W)
    feature map for rank-3 files.  Accepts '<f4' and '<f8' payloads;
    anything else is rejected with the offending byte offset.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 10:
        raise FormatError("file too short for an NPY header", offset=0)
    if raw[:6] != _MAGIC:
        raise FormatError("bad NPY magic", offset=0)
    if raw[6:8] != bytes((1, 0)):
        raise FormatError("unsupported NPY version %d.%d" % (raw[6], raw[7]), offset=6)
    (hlen,) = struct.unpack("<H", raw[8:10])
    if 10 + hlen > len(raw):
        raise FormatError("NPY header length exceeds file size", offset=8)
    try:
        header = ast.literal_eval(raw[10:10 + hlen].decode("ascii"))
    except (ValueError, SyntaxError, UnicodeDecodeError) as exc:
        raise FormatError("unparseable NPY header: %s" % exc, offset=10) from exc
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise FormatError("NPY header must have descr/fortran_order/shape", offset=10)
    descr = header["descr"]
    if descr not in ("<f4", "<f8"):
        raise FormatError("unsupported dtype %r (need '<f4' or '<f8')" % (descr,), offset=10)
    if header["fortran_order"] is not False:
        raise FormatError("fortran-order arrays are not supported", offset=10)
    shape = header["shape"]
    if (not isinstance(shape, tuple) or len(shape) not in (2, 3)
            or not all(isinstance(n, int) and n > 0 for n in shape)):
        raise FormatError("shape must be a rank-2 or rank-3 tuple, got %r" % (shape,), offset=10)
    itemsize = 4 if descr == "<f4" else 8
    count = int(np.prod(shape))
    expected = 10 + hlen + count * itemsize
    if len(raw) != expected:
        raise FormatError("payload size mismatch: expected %d bytes, file has %d"
                          % (expected, len(raw)), offset=10 + hlen)
    data = np.frombuffer(raw, dtype=descr, count=count, offset=10 + hlen)
    arr = data.astype(np.float64).reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("array in %s contains non-finite values" % (path,))
    return arr


@dataclass
class Annotations:
    """Point annotations in image space.

    ``in_target`` and ``out_of_target`` hold (x, y) integer pixel
    coordinates; ``reduction_factor`` is the ratio of image resolution
    to feature-map resolution.  ``field_points`` rescales both sets to
    feature-map space by floor division.
    """

    image_width: int
    image_height: int
    reduction_factor: int = 1
    in_target: list = field(default_factory=list)
    out_of_target: list = field(default_factory=list)

    def validate(self):
        if not (isinstance(self.image_width, int) and self.image_width > 0):
            raise ValidationError("image_width must be a positive integer")
        if not (isinstance(self.image_height, int) and self.image_height > 0):
            raise ValidationError("image_height must be a positive integer")
        if not (isinstance(self.reduction_factor, int) and self.reduction_factor >= 1):
            raise ValidationError("reduction_factor must be an integer >= 1")
        for name, pts in (("in_target", self.in_target), ("out_of_target", self.out_of_target)):
            seen = set()
            for i, pt in enumerate(pts):
                if (not isinstance(pt, tuple) or len(pt) != 2
                        or not all(isinstance(c, int) for c in pt)):
                    raise ValidationError("%s[%d] must be an integer (x, y) pair, got %r"
                                          % (name, i, (pt,)))
                x, y = pt
                if not (0 <= x < self.image_width and 0 <= y < self.image_height):
                    raise ValidationError("%s[%d] = (%d, %d) is outside [0, %d) x [0, %d)"
                                          % (name, i, x, y, self.image_width, self.image_height))
                if pt in seen:
                    raise ValidationError("%s[%d] = (%d, %d) duplicates an earlier point"
                                          % (name, i, x, y))
                seen.add(pt)
        r = self.reduction_factor
        rescaled_in = {(x // r, y // r) for x, y in self.in_target}
        for i, (x, y) in enumerate(self.out_of_target):
            if (x // r, y // r) in rescaled_in:
                raise ValidationError(
                    "out_of_target[%d] = (%d, %d) collides with an in_target point "
                    "after rescaling by %d" % (i, x, y, r))
        return self

    def field_points(self):
        """Return (P, Q): both point sets rescaled to feature-map space."""
        r = self.reduction_factor
        p = [(x // r, y // r) for x, y in self.in_target]
        q = [(x // r, y // r) for x, y in self.out_of_target]
        return p, q


_ANN_KEYS = {"image_width", "image_height", "reduction_factor", "in_target", "out_of_target"}


def read_annotations(path):
    """Read and validate an annotation JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError("invalid JSON in %s: %s" % (path, exc)) from exc
    if not isinstance(obj, dict) or set(obj) != _ANN_KEYS:
        raise ValidationError("annotation file must be a JSON object with keys exactly %s"
                              % sorted(_ANN_KEYS))

    def points(key):
        val = obj[key]
        if not isinstance(val, list):
            raise ValidationError("%s must be a list of [x, y] pairs" % key)
        out = []
        for i, pt in enumerate(val):
            if (not isinstance(pt, list) or len(pt) != 2
                    or not all(isinstance(c, int) and not isinstance(c, bool) for c in pt)):
                raise ValidationError("%s[%d] must be an integer [x, y] pair, got %r"
                                      % (key, i, pt))
            out.append((pt[0], pt[1]))
        return out

    for key in ("image_width", "image_height", "reduction_factor"):
        if not isinstance(obj[key], int) or isinstance(obj[key], bool):
            raise ValidationError("%s must be an integer" % key)
    ann = Annotations(
        image_width=obj["image_width"],
        image_height=obj["image_height"],
        reduction_factor=obj["reduction_factor"],
        in_target=points("in_target"),
        out_of_target=points("out_of_target"),
    )
    return ann.validate()


def write_annotations(ann, path):
    """Write an annotation set as canonical JSON."""
    ann.validate()
    obj = {
        "image_width": ann.image_width,
        "image_height": ann.image_height,
        "reduction_factor": ann.reduction_factor,
        "in_target": [[x, y] for x, y in ann.in_target],
        "out_of_target": [[x, y] for x, y in ann.out_of_target],
    }
    write_json(obj, path)


def read_mask_png(path):
    """Read an 8-bit grayscale PNG as a binary mask (any nonzero maps to 1)."""
    with Image.open(path) as img:
        if img.mode != "L":
            raise FormatError("mask PNG must be 8-bit grayscale, got mode %r" % img.mode)
        arr = np.asarray(img)
    return (arr != 0).astype(np.uint8)


def write_mask_png(mask, path):
    """Write a binary mask as 8-bit grayscale PNG with values {0, 255}."""
    m = as_binary_mask(mask)
    Image.fromarray((m * 255).astype(np.uint8), mode="L").save(path, format="PNG")


def _heatmap_rgb(u):
    # Piecewise-linear diverging map: blue (0,0,255) at 0, white at 0.5,
    # red (255,0,0) at 1.
    t = np.clip(u, 0.0, 1.0)
    low = t < 0.5
    s_low = t * 2.0
    s_high = (t - 0.5) * 2.0
    r = np.where(low, 255.0 * s_low, 255.0)
    g = np.where(low, 255.0 * s_low, 255.0 * (1.0 - s_high))
    b = np.where(low, 255.0, 255.0 * (1.0 - s_high))
    return np.stack([r, g, b], axis=-1)


def write_heatmap_png(u, path):
    """Render a [0, 1] field as an RGB heatmap PNG.

    Colormap is piecewise-linear: pure blue at 0, white at 0.5, pure red
    at 1.
    """
    arr = as_unit_field(u, "heatmap input")
    rgb = np.rint(_heatmap_rgb(arr)).astype(np.uint8)
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError("invalid JSON in %s: %s" % (path, exc)) from exc


def write_json(obj, path):
    """Write JSON in canonical form: sorted keys, two-space indent, newline."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_metrics_report(metrics, path):
    """Write the metrics report JSON: {"dice", "accuracy", "kappa", "auc"}."""
    keys = {"dice", "accuracy", "kappa", "auc"}
    if set(metrics) != keys:
        raise ValidationError("metrics report must have keys exactly %s" % sorted(keys))
    write_json({k: float(v) for k, v in metrics.items()}, path)
