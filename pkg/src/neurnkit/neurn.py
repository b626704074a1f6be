"""NeuRN: local patch standard deviation, max-normalised per channel.

For every pixel the k x k window centred on it (stride 1, padded borders so
there is one window per pixel) gives a population mean and standard
deviation.  The output is sigma / max(sigma), computed per channel.  Because
sigma(a*x + b) = a*sigma(x) for a > 0, the output does not change under
affine intensity changes of the input.

Images are float arrays shaped (H, W) or (H, W, C); batches are (N, H, W, C).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PADDINGS = {"replicate": "edge", "reflect": "reflect"}
SCOPES = ("channel", "global")


@dataclass(frozen=True)
class NeurnConfig:
    k: int = 3
    padding: str = "replicate"
    scope: str = "channel"

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, (int, np.integer)) \
                or self.k < 3 or self.k % 2 == 0:
            raise ValueError(f"k must be odd >= 3, got {self.k!r}")
        if self.padding not in PADDINGS:
            raise ValueError(f"padding must be one of {sorted(PADDINGS)}, got {self.padding!r}")
        if self.scope not in SCOPES:
            raise ValueError(f"scope must be one of {SCOPES}, got {self.scope!r}")

    def check_dims(self, height: int, width: int) -> None:
        if self.k > 2 * min(height, width) - 1:
            raise ValueError(
                f"k={self.k} too large for a {height}x{width} image "
                f"(max {2 * min(height, width) - 1})")


@dataclass(frozen=True)
class StatField:
    mean: np.ndarray
    std: np.ndarray


def as_image(img) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or min(arr.shape) < 1:
        raise ValueError(f"image must be (H, W) or (H, W, C), got shape {np.shape(img)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    return arr


def _window_stats(batch: np.ndarray, cfg: NeurnConfig) -> tuple[np.ndarray, np.ndarray]:
    """Mean and population std over k x k windows of an (N, H, W, C) array."""
    k = cfg.k
    r = k // 2
    n, h, w, c = batch.shape
    padded = np.pad(batch, ((0, 0), (r, r), (r, r), (0, 0)), mode=PADDINGS[cfg.padding])
    # deviations are taken from the centre pixel first so that a constant
    # window yields exactly zero and large offsets do not cancel
    offsets = [(dy, dx) for dy in range(k) for dx in range(k)]
    acc = np.zeros_like(batch)
    for dy, dx in offsets:
        acc += padded[:, dy:dy + h, dx:dx + w, :] - batch
    mu = acc / (k * k)
    acc[...] = 0.0
    for dy, dx in offsets:
        d = (padded[:, dy:dy + h, dx:dx + w, :] - batch) - mu
        acc += d * d
    return batch + mu, np.sqrt(acc / (k * k))


def patch_stats(img, cfg: NeurnConfig = NeurnConfig()) -> StatField:
    arr = as_image(img)
    cfg.check_dims(arr.shape[0], arr.shape[1])
    mean, std = _window_stats(arr[None], cfg)
    return StatField(mean=mean[0], std=std[0])


def _normalise(std: np.ndarray, scope: str) -> np.ndarray:
    # std: (N, H, W, C)
    if scope == "channel":
        top = std.max(axis=(1, 2), keepdims=True)
    else:
        top = std.max(axis=(1, 2, 3), keepdims=True)
    safe = np.where(top > 0, top, 1.0)
    return np.where(top > 0, std / safe, 0.0)


def transform(img, cfg: NeurnConfig = NeurnConfig()) -> np.ndarray:
    """Domain-agnostic representation; same shape as the input."""
    shape = np.shape(img)
    arr = as_image(img)
    cfg.check_dims(arr.shape[0], arr.shape[1])
    _, std = _window_stats(arr[None], cfg)
    return _normalise(std, cfg.scope)[0].reshape(shape)


def transform_batch(imgs, cfg: NeurnConfig = NeurnConfig(), chunk: int = 2048):
    """Apply :func:`transform` to every image, preserving order.

    A homogeneous ``(N, H, W[, C])`` array is processed in vectorised chunks
    and returned as an array; any other collection is mapped image by image
    and returned as a list.
    """
    if isinstance(imgs, np.ndarray) and imgs.ndim in (3, 4):
        batch = np.asarray(imgs, dtype=np.float64)
        squeeze = batch.ndim == 3
        if squeeze:
            batch = batch[..., None]
        if len(batch) and not np.all(np.isfinite(batch)):
            bad = int(np.flatnonzero(~np.isfinite(batch).reshape(len(batch), -1).all(axis=1))[0])
            raise ValueError(f"image {bad}: image contains non-finite values")
        if len(batch):
            cfg.check_dims(batch.shape[1], batch.shape[2])
        out = np.empty_like(batch)
        for start in range(0, len(batch), chunk):
            part = batch[start:start + chunk]
            _, std = _window_stats(part, cfg)
            out[start:start + chunk] = _normalise(std, cfg.scope)
        return out[..., 0] if squeeze else out
    results = []
    for i, img in enumerate(imgs):
        try:
            results.append(transform(img, cfg))
        except ValueError as exc:
            raise ValueError(f"image {i}: {exc}") from exc
    return results
