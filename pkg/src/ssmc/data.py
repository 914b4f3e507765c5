"""Synthetic data generation, image-format loaders, and evaluation metrics.

Images enter tensors with rows as the height axis and columns as the depth
axis, one image per lateral slice, so a circular column shift of an image is
exactly a tube-shift of its slice.  Pixel values are scaled to [0, 1]
uniformly across loaders.
"""

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .spectral import ClusterLabels
from .t_algebra import FormatError, _as_tensor3, e_tube, tprod
from .theory import SubmoduleSample, is_generating_set

__all__ = [
    "SHIFT_JITTER",
    "SynthSpec",
    "LabeledTensor",
    "generate_synthetic",
    "generate_submodules",
    "load_idx_images",
    "load_idx_labels",
    "load_pgm_dir",
    "clustering_error",
    "shift_images",
]

# coefficient-tube jitter scale for shift-model points, relative to the
# unit-shift coefficient
SHIFT_JITTER = 0.05

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a union-of-submodules tensor.

    One cluster per entry of ``d_per_cluster`` / ``samples_per_cluster``.
    ``shift_model`` builds each cluster from circular depth-shifts of a
    single prototype (with small coefficient jitter) instead of dense
    coefficient tubes; ``d_per_cluster`` is ignored in that mode since each
    cluster has one generator.
    """

    h: int
    d_per_cluster: Sequence[int]
    samples_per_cluster: Sequence[int]
    depth: int
    noise_sigma: float = 0.0
    affine: bool = False
    shift_model: bool = False
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "d_per_cluster", tuple(int(v) for v in self.d_per_cluster))
        object.__setattr__(
            self, "samples_per_cluster", tuple(int(v) for v in self.samples_per_cluster)
        )
        if len(self.d_per_cluster) != len(self.samples_per_cluster):
            raise ValueError(
                f"{len(self.d_per_cluster)} cluster dims vs "
                f"{len(self.samples_per_cluster)} sample counts"
            )
        if not self.d_per_cluster:
            raise ValueError("need at least one cluster")
        if self.h < 1 or self.depth < 1:
            raise ValueError(f"dimensions must be at least 1, got h={self.h} depth={self.depth}")
        if min(self.d_per_cluster) < 1 or min(self.samples_per_cluster) < 1:
            raise ValueError("cluster dims and sample counts must be at least 1")
        if not self.shift_model and max(self.d_per_cluster) > self.h:
            raise ValueError(
                f"cluster dim {max(self.d_per_cluster)} exceeds height {self.h}"
            )
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be nonnegative, got {self.noise_sigma}")


@dataclass
class LabeledTensor:
    tensor: np.ndarray
    truth: ClusterLabels


def _draw_generators(rng, h, d, depth):
    for _ in range(100):
        gens = rng.standard_normal((h, d, depth))
        if is_generating_set(gens):
            return gens
    raise RuntimeError("failed to draw a generating set after 100 attempts")


def generate_submodules(spec):
    """Generate clusters and return both the per-cluster samples and the tensor.

    Same stream as :func:`generate_synthetic`: the returned
    ``LabeledTensor`` is bitwise identical for equal specs.
    """
    rng = np.random.default_rng(spec.seed)
    samples = []
    blocks = []
    labels = []
    for c, (d_c, m_c) in enumerate(zip(spec.d_per_cluster, spec.samples_per_cluster)):
        if spec.shift_model:
            gens = rng.standard_normal((spec.h, 1, spec.depth))
            coeffs = np.empty((1, m_c, spec.depth))
            for j in range(m_c):
                s = int(rng.integers(spec.depth))
                jitter = SHIFT_JITTER * rng.standard_normal(spec.depth) / np.sqrt(spec.depth)
                coeffs[0, j, :] = e_tube(spec.depth, s) + jitter
        else:
            gens = _draw_generators(rng, spec.h, d_c, spec.depth)
            coeffs = rng.standard_normal((d_c, m_c, spec.depth))
        points = tprod(gens, coeffs)
        offset = None
        if spec.affine:
            offset = rng.standard_normal((spec.h, 1, spec.depth))
            points = points + offset
        samples.append(SubmoduleSample(generators=gens, points=points, affine_offset=offset))
        blocks.append(points)
        labels.extend([c] * m_c)
    tensor = np.concatenate(blocks, axis=1)
    if spec.noise_sigma > 0:
        tensor = tensor + spec.noise_sigma * rng.standard_normal(tensor.shape)
    truth = ClusterLabels(labels=np.array(labels, dtype=np.int64), k=len(spec.d_per_cluster))
    return samples, LabeledTensor(tensor=np.ascontiguousarray(tensor), truth=truth)


def generate_synthetic(spec):
    """Generate a labeled union-of-submodules tensor; see :class:`SynthSpec`."""
    return generate_submodules(spec)[1]


def _read_exact(raw, path):
    if len(raw) < 4:
        raise FormatError(f"{path}: truncated header at offset 0")
    return int.from_bytes(raw[0:4], "big")


def load_idx_images(path):
    """Load an IDX u8 image file as an ``(rows, count, cols)`` tensor in [0, 1]."""
    with open(path, "rb") as fh:
        raw = fh.read()
    magic = _read_exact(raw, path)
    if magic != IDX_IMAGE_MAGIC:
        raise FormatError(f"{path}: bad image magic 0x{magic:08x} at offset 0")
    if len(raw) < 16:
        raise FormatError(f"{path}: truncated dimension header at offset 4")
    n = int.from_bytes(raw[4:8], "big")
    rows = int.from_bytes(raw[8:12], "big")
    cols = int.from_bytes(raw[12:16], "big")
    expected = 16 + n * rows * cols
    if len(raw) != expected:
        raise FormatError(
            f"{path}: payload at offset 16 has {len(raw) - 16} bytes, expected {n * rows * cols}"
        )
    data = np.frombuffer(raw, dtype=np.uint8, offset=16).reshape(n, rows, cols)
    return np.ascontiguousarray(data.astype(np.float64).transpose(1, 0, 2) / 255.0)


def load_idx_labels(path):
    """Load an IDX u8 label file as an int64 array."""
    with open(path, "rb") as fh:
        raw = fh.read()
    magic = _read_exact(raw, path)
    if magic != IDX_LABEL_MAGIC:
        raise FormatError(f"{path}: bad label magic 0x{magic:08x} at offset 0")
    if len(raw) < 8:
        raise FormatError(f"{path}: truncated dimension header at offset 4")
    n = int.from_bytes(raw[4:8], "big")
    if len(raw) != 8 + n:
        raise FormatError(f"{path}: payload at offset 8 has {len(raw) - 8} bytes, expected {n}")
    return np.frombuffer(raw, dtype=np.uint8, offset=8).astype(np.int64)


def _read_pgm(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    pos = 0

    def token():
        nonlocal pos
        while pos < len(raw):
            ch = raw[pos : pos + 1]
            if ch == b"#":
                while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            elif ch.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: truncated PGM header at offset {start}")
        return raw[start:pos]

    if token() != b"P5":
        raise FormatError(f"{path}: not a binary PGM (P5) file")
    try:
        width = int(token())
        height = int(token())
        maxval = int(token())
    except ValueError as exc:
        raise FormatError(f"{path}: malformed PGM header") from exc
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise FormatError(f"{path}: invalid PGM dimensions {width}x{height} maxval {maxval}")
    pos += 1  # single whitespace byte separates header and payload
    bps = 1 if maxval < 256 else 2
    expected = width * height * bps
    payload = raw[pos : pos + expected]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload at offset {pos} has {len(payload)} bytes, expected {expected}"
        )
    dtype = np.uint8 if bps == 1 else ">u2"
    img = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return img.astype(np.float64) / maxval


def load_pgm_dir(path, decimate=1, crop=None):
    """Load all equal-sized P5 files in a directory as one tensor.

    Files are taken in sorted name order, one lateral slice each (rows are
    the height axis, columns the depth axis).  ``decimate`` keeps every
    ``decimate``-th row and column; ``crop=(a, b)`` then keeps columns
    ``a..b`` inclusive.  Returns ``(tensor, names)``.
    """
    if decimate < 1:
        raise ValueError(f"decimate must be at least 1, got {decimate}")
    names = sorted(f for f in os.listdir(path) if f.lower().endswith(".pgm"))
    if not names:
        raise FormatError(f"{path}: no PGM files found")
    imgs = []
    for name in names:
        img = _read_pgm(os.path.join(path, name))
        if imgs and img.shape != imgs[0].shape:
            raise FormatError(
                f"{path}/{name}: size {img.shape} differs from {imgs[0].shape}"
            )
        imgs.append(img)
    stack = np.stack(imgs, axis=1)  # (rows, count, cols)
    if decimate > 1:
        stack = stack[::decimate, :, ::decimate]
    if crop is not None:
        a, b = int(crop[0]), int(crop[1])
        if not 0 <= a <= b < stack.shape[2]:
            raise ValueError(
                f"crop {a}:{b} outside column range 0..{stack.shape[2] - 1}"
            )
        stack = stack[:, :, a : b + 1]
    return np.ascontiguousarray(stack), names


def _label_array(labels):
    if isinstance(labels, ClusterLabels):
        return labels.labels
    arr = np.asarray(labels, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError(f"labels must be one-dimensional, got shape {arr.shape}")
    return arr


def clustering_error(pred, truth):
    """Fraction misclustered under the best label matching, in [0, 1].

    One minus the largest achievable matched fraction over injective
    mappings of predicted to true labels (optimal assignment).
    """
    p = _label_array(pred)
    t = _label_array(truth)
    if p.shape != t.shape:
        raise ValueError(f"label length mismatch: {p.shape[0]} vs {t.shape[0]}")
    if p.size == 0:
        raise ValueError("empty labelings")
    k = int(max(p.max(), t.max())) + 1
    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (p, t), 1)
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    matched = confusion[rows, cols].sum()
    return float(1.0 - matched / p.size)


def shift_images(t, max_shift, seed):
    """Circularly shift each lateral slice along depth by a random amount.

    Shifts are uniform integers in ``[-max_shift, max_shift]``, drawn from
    ``default_rng(seed)``; a shift of ``s`` equals tube-multiplication by
    ``e_tube(d, s mod d)``.
    """
    t = _as_tensor3(t)
    d = t.shape[2]
    if not 0 <= max_shift < d:
        raise ValueError(f"max_shift must be in 0..{d - 1}, got {max_shift}")
    rng = np.random.default_rng(seed)
    out = np.empty_like(t)
    shifts = rng.integers(-max_shift, max_shift + 1, size=t.shape[1])
    for j in range(t.shape[1]):
        out[:, j, :] = np.roll(t[:, j, :], int(shifts[j]), axis=1)
    return out
