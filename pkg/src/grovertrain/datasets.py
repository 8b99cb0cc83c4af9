"""Benchmark datasets: 3x3 line-detection tasks and a 3-class downsampled
digits task, plus IDX file ingestion and deterministic splits.

A sample is (x, y) with x and y little-indexed bit tuples; image bit 3*i+j is
row i, column j of the 3x3 grid. Each dataset carries a correctness predicate
id that defines when a model output counts as a correct prediction:

* ``exact-match``       - prediction correct iff output bits equal y bits.
* ``tiny-mnist-decode`` - outputs (o0, o1) decode to a digit (o0=1 -> 1,
  else o1=1 -> 2, else 7) and the prediction is correct iff its digit equals
  y's digit. Both (1,0) and (1,1) mean digit 1, so equality is on digits,
  not bits.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

TINY_MNIST_CLASSES = (1, 2, 7)
# canonical output pattern (o0, o1) per digit; decode accepts (1,1) for 1 too
_DIGIT_TO_BITS = {1: (1, 0), 2: (0, 1), 7: (0, 0)}


@dataclass(frozen=True)
class Sample:
    x: tuple[int, ...]
    y: tuple[int, ...]


@dataclass
class Dataset:
    samples: list[Sample]
    d_x: int
    d_y: int
    class_count: int
    predicate: str = "exact-match"

    def __post_init__(self):
        if not self.samples:
            raise ValueError("dataset needs at least one sample")
        if self.predicate not in ("exact-match", "tiny-mnist-decode"):
            raise ValueError(f"unknown predicate {self.predicate!r}")
        seen: dict[tuple[int, ...], tuple[int, ...]] = {}
        for s in self.samples:
            if len(s.x) != self.d_x or len(s.y) != self.d_y:
                raise ValueError("sample width mismatch")
            if seen.setdefault(s.x, s.y) != s.y:
                raise ValueError(f"conflicting labels for x={s.x}")

    def __len__(self) -> int:
        return len(self.samples)


def decode_digit(bits) -> int:
    """Two output bits -> digit: o0 set means 1, else o1 set means 2, else 7."""
    o0, o1 = bits
    return 1 if o0 else (2 if o1 else 7)


def is_correct(predicate: str, y, yhat) -> bool:
    """Scalar correctness check for one prediction."""
    if predicate == "exact-match":
        return tuple(y) == tuple(yhat)
    return decode_digit(y) == decode_digit(yhat)


def packed_correct_mask(predicate: str, y, outs: list[np.ndarray]) -> np.ndarray:
    """Bit-parallel correctness over all weights at once.

    `outs` are packed uint64 output planes from boolcirc.eval_all_weights for
    one sample; the result has lane L set iff weight L predicts y correctly.
    """
    if predicate == "exact-match":
        mask = None
        for b, yb in enumerate(y):
            term = outs[b] if yb else ~outs[b]
            mask = term if mask is None else mask & term
        return mask
    digit = decode_digit(y)
    if digit == 1:
        return outs[0].copy()
    if digit == 2:
        return ~outs[0] & outs[1]
    return ~outs[0] & ~outs[1]


def _grid_bits(index: int) -> tuple[int, ...]:
    return tuple((index >> b) & 1 for b in range(9))


def _has_row_line(bits) -> bool:
    return any(all(bits[3 * i + j] for j in range(3)) for i in range(3))


def _has_col_line(bits) -> bool:
    return any(all(bits[3 * j + i] for j in range(3)) for i in range(3))


def gen_edge_detection() -> Dataset:
    """All 512 3x3 binary images, 4-way labels over line presence.

    y = (not has_horizontal, not has_vertical): both lines -> (0,0),
    horizontal only -> (0,1), vertical only -> (1,0), neither -> (1,1).
    Output bit 0 tracks horizontal structure because the paired model's first
    output scans rows.
    """
    samples = []
    for idx in range(512):
        bits = _grid_bits(idx)
        y = (1 - int(_has_row_line(bits)), 1 - int(_has_col_line(bits)))
        samples.append(Sample(bits, y))
    return Dataset(samples, 9, 2, 4)


def gen_simplified_ed() -> Dataset:
    """All 512 3x3 binary images, y = 1 iff some row is all ones."""
    samples = []
    for idx in range(512):
        bits = _grid_bits(idx)
        samples.append(Sample(bits, (int(_has_row_line(bits)),)))
    return Dataset(samples, 9, 1, 2)


def split(d: Dataset, n_train: int, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic disjoint train/test split of n_train vs rest.

    Sample order follows a PCG64 permutation of indices seeded with `seed`
    (numpy default_rng), so identical (dataset, n_train, seed) always gives
    identical splits.
    """
    if not 0 < n_train < len(d):
        raise ValueError(f"n_train must be in (0, {len(d)})")
    perm = np.random.default_rng(seed).permutation(len(d))
    pick = lambda idxs: Dataset([d.samples[i] for i in idxs], d.d_x, d.d_y,
                                d.class_count, d.predicate)
    return pick(perm[:n_train]), pick(perm[n_train:])


# ---------------------------------------------------------------------------
# IDX ingestion (the classic big-endian image/label container)

def parse_idx(data: bytes):
    """Parse IDX bytes: image files -> uint8 array (n, rows, cols), label
    files -> uint8 array (n,)."""
    if len(data) < 4:
        raise ValueError("truncated IDX header")
    magic = struct.unpack(">I", data[:4])[0]
    if magic == IDX_IMAGES_MAGIC:
        if len(data) < 16:
            raise ValueError("truncated IDX image dimensions")
        n, rows, cols = struct.unpack(">III", data[4:16])
        need = 16 + n * rows * cols
        if len(data) != need:
            raise ValueError(f"IDX image payload is {len(data) - 16} bytes, "
                             f"expected {n * rows * cols}")
        arr = np.frombuffer(data, dtype=np.uint8, offset=16)
        return arr.reshape(n, rows, cols).copy()
    if magic == IDX_LABELS_MAGIC:
        if len(data) < 8:
            raise ValueError("truncated IDX label dimension")
        n = struct.unpack(">I", data[4:8])[0]
        if len(data) != 8 + n:
            raise ValueError(f"IDX label payload is {len(data) - 8} bytes, "
                             f"expected {n}")
        return np.frombuffer(data, dtype=np.uint8, offset=8).copy()
    raise ValueError(f"bad IDX magic 0x{magic:08x}")


def write_idx(arr: np.ndarray) -> bytes:
    """Inverse of parse_idx for uint8 arrays of rank 3 (images) or 1 (labels)."""
    arr = np.ascontiguousarray(arr, dtype=np.uint8)
    if arr.ndim == 3:
        head = struct.pack(">IIII", IDX_IMAGES_MAGIC, *arr.shape)
    elif arr.ndim == 1:
        head = struct.pack(">II", IDX_LABELS_MAGIC, arr.shape[0])
    else:
        raise ValueError("expected rank-3 images or rank-1 labels")
    return head + arr.tobytes()


def downsample_3x3(image: np.ndarray) -> tuple[int, ...]:
    """28x28 grayscale -> 9 bits: 3x3 block means (block edges at
    floor(28*i/3): 9/9/10 pixel bands), thresholded at mean >= 127.5."""
    if image.shape != (28, 28):
        raise ValueError(f"expected 28x28 image, got {image.shape}")
    edges = [0, 9, 18, 28]
    bits = []
    img = image.astype(np.float64)
    for i in range(3):
        for j in range(3):
            block = img[edges[i]:edges[i + 1], edges[j]:edges[j + 1]]
            bits.append(int(block.mean() >= 127.5))
    return tuple(bits)


def make_tiny_mnist(images: np.ndarray, labels: np.ndarray,
                    split_name: str) -> Dataset:
    """Downsampled 3-class digits task over classes 1, 2, 7.

    Each 28x28 image becomes a 9-bit vector; duplicate vectors within this
    split are merged, labeled by majority vote with ties going to the smallest
    class (1 < 2 < 7). `split_name` tags which half this is ('train'/'test').
    Sample order is first-appearance order of each distinct vector.
    """
    if split_name not in ("train", "test"):
        raise ValueError("split_name must be 'train' or 'test'")
    if len(images) != len(labels):
        raise ValueError("images/labels length mismatch")
    votes: dict[tuple[int, ...], dict[int, int]] = {}
    order: list[tuple[int, ...]] = []
    for img, lab in zip(images, labels):
        lab = int(lab)
        if lab not in TINY_MNIST_CLASSES:
            continue
        bits = downsample_3x3(img)
        if bits not in votes:
            votes[bits] = {}
            order.append(bits)
        votes[bits][lab] = votes[bits].get(lab, 0) + 1
    if not votes:
        raise ValueError("no samples in classes 1/2/7")
    samples = []
    for bits in order:
        tally = votes[bits]
        best = max(TINY_MNIST_CLASSES,
                   key=lambda c: (tally.get(c, 0), -c))  # ties -> smallest
        samples.append(Sample(bits, _DIGIT_TO_BITS[best]))
    return Dataset(samples, 9, 2, 3, predicate="tiny-mnist-decode")


def dataset_to_csv(d: Dataset) -> str:
    """One `x_bits,y_bits` line per sample, bits in wire order."""
    lines = ["x_bits,y_bits"]
    for s in d.samples:
        lines.append("".join(map(str, s.x)) + "," + "".join(map(str, s.y)))
    return "\n".join(lines) + "\n"
