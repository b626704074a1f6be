"""Readers and writers for 8-bit PGM (P2/P5) and IDX (MNIST) files.

Decoded images are float64 arrays of shape (H, W, 1) scaled to [0, 1];
encoding quantises with round(v * 255) and refuses values outside [0, 1].
"""
from __future__ import annotations

import re
import struct
from dataclasses import dataclass

import numpy as np

IDX_UBYTE_IMAGES = 0x00000803
IDX_UBYTE_LABELS = 0x00000801


class FormatError(ValueError):
    pass


def _quantise(img) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError(f"pixel values must lie in [0, 1], got [{arr.min()}, {arr.max()}]")
    return np.rint(arr * 255).astype(np.uint8)


# -- PGM --------------------------------------------------------------------

_TOKEN = re.compile(rb"(?:\s|#[^\n\r]*[\n\r])*([^\s#]+)")


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    pos = 0
    tokens = []
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if not m:
            raise FormatError("truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens, pos


def read_pgm(data: bytes) -> np.ndarray:
    if data[:2] not in (b"P2", b"P5"):
        raise FormatError(f"bad PGM magic {data[:2]!r}, expected b'P2' or b'P5'")
    magic = data[:2]
    tokens, pos = _header_tokens(data[2:], 3)
    pos += 2
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError(f"non-integer PGM header field in {tokens!r}") from None
    if width < 1 or height < 1:
        raise FormatError(f"invalid PGM size {width}x{height}")
    if not 0 < maxval <= 255:
        raise FormatError(f"maxval {maxval} unsupported (must be 1..255)")
    count = width * height
    if magic == b"P5":
        if pos >= len(data) or not data[pos:pos + 1].isspace():
            raise FormatError("missing whitespace after PGM maxval")
        payload = data[pos + 1:]
        if len(payload) < count:
            raise FormatError(f"truncated PGM payload: need {count} bytes, got {len(payload)}")
        if len(payload) > count:
            raise FormatError(f"{len(payload) - count} trailing bytes after PGM payload")
        values = np.frombuffer(payload, dtype=np.uint8).astype(np.int64)
    else:
        fields = data[pos:].split()
        if len(fields) < count:
            raise FormatError(f"truncated PGM payload: need {count} values, got {len(fields)}")
        if len(fields) > count:
            raise FormatError(f"{len(fields) - count} trailing values after PGM payload")
        try:
            values = np.array([int(f) for f in fields], dtype=np.int64)
        except ValueError:
            raise FormatError("non-integer value in P2 payload") from None
    if values.size and values.max() > maxval:
        raise FormatError(f"pixel value {values.max()} exceeds maxval {maxval}")
    return (values.reshape(height, width, 1) / maxval).astype(np.float64)


def write_pgm(img, binary: bool = True) -> bytes:
    arr = np.asarray(img)
    if arr.ndim == 3:
        if arr.shape[2] != 1:
            raise ValueError(f"PGM holds one channel, got {arr.shape[2]}")
        arr = arr[:, :, 0]
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {arr.shape}")
    q = _quantise(arr)
    h, w = q.shape
    if binary:
        return b"P5\n%d %d\n255\n" % (w, h) + q.tobytes()
    lines = [" ".join(str(v) for v in row) for row in q]
    return (f"P2\n{w} {h}\n255\n" + "\n".join(lines) + "\n").encode("ascii")


# -- IDX --------------------------------------------------------------------

def _read_idx(data: bytes, magic: int, ndim: int, what: str) -> tuple[tuple[int, ...], bytes]:
    if len(data) < 4:
        raise FormatError(f"IDX {what} file too short for a header")
    (actual,) = struct.unpack(">I", data[:4])
    if actual != magic:
        raise FormatError(f"wrong IDX magic for {what}: expected 0x{magic:08X}, got 0x{actual:08X}")
    hdr = 4 + 4 * ndim
    if len(data) < hdr:
        raise FormatError(f"truncated IDX {what} header")
    dims = struct.unpack(">" + "I" * ndim, data[4:hdr])
    expected = int(np.prod(dims, dtype=np.int64))
    payload = data[hdr:]
    if len(payload) != expected:
        raise FormatError(
            f"IDX {what} payload size mismatch: header {dims} implies {expected} bytes, got {len(payload)}")
    return dims, payload


def read_idx_images(data: bytes) -> np.ndarray:
    """Decode a ubyte image tensor to an (N, H, W, 1) float array in [0, 1]."""
    (n, rows, cols), payload = _read_idx(data, IDX_UBYTE_IMAGES, 3, "images")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(n, rows, cols, 1)
    return arr / 255.0


def read_idx_labels(data: bytes) -> np.ndarray:
    (n,), payload = _read_idx(data, IDX_UBYTE_LABELS, 1, "labels")
    return np.frombuffer(payload, dtype=np.uint8).astype(np.int64)


def write_idx_images(images) -> bytes:
    arr = np.asarray(images)
    if arr.ndim == 4:
        if arr.shape[3] != 1:
            raise ValueError(f"IDX images must be single-channel, got {arr.shape[3]} channels")
        arr = arr[..., 0]
    if arr.ndim != 3:
        raise ValueError(f"expected (N, H, W) images, got shape {arr.shape}")
    q = _quantise(arr)
    return struct.pack(">IIII", IDX_UBYTE_IMAGES, *q.shape) + q.tobytes()


def write_idx_labels(labels) -> bytes:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValueError("labels must be 1-D")
    if arr.size and (arr.min() < 0 or arr.max() > 255):
        raise ValueError("labels must fit in an unsigned byte")
    return struct.pack(">II", IDX_UBYTE_LABELS, arr.size) + arr.astype(np.uint8).tobytes()


@dataclass
class LabeledDataset:
    images: np.ndarray  # (N, H, W, 1)
    labels: np.ndarray  # (N,)

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.images) != len(self.labels):
            raise ValueError(f"{len(self.images)} images but {len(self.labels)} labels")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() > 9):
            raise ValueError("labels must be class ids in [0, 9]")

    def __len__(self) -> int:
        return len(self.labels)


def read_idx_dataset(images: bytes, labels: bytes) -> LabeledDataset:
    return LabeledDataset(read_idx_images(images), read_idx_labels(labels))
