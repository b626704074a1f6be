"""Desk-scale domain-shift experiment.

A fixed 10-class bitmap font is rendered into 16x16 images with random
translation and pixel noise, a softmax-regression classifier is trained on
the clean (source) images, and accuracy is measured on a held-out source set
and on the same set after an intensity shift (target).  The NeuRN arm does
the same on transformed inputs.
"""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Mapping, Optional

import numpy as np

from .imageio import LabeledDataset
from .neurn import NeurnConfig, transform_batch

SIZE = 16
N_CLASSES = 10
NOISE_AMPLITUDE = 0.05
MAX_TRANSLATION = 2

_FONT = {
    0: [".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."],
    1: ["..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."],
    2: [".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"],
    3: ["#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."],
    4: ["...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."],
    5: ["#####", "#....", "####.", "....#", "....#", "#...#", ".###."],
    6: ["..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."],
    7: ["#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."],
    8: [".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."],
    9: [".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."],
}


def glyphs() -> np.ndarray:
    """(10, 16, 16) binary templates: the 5x7 font scaled 2x and centred."""
    out = np.zeros((N_CLASSES, SIZE, SIZE))
    for digit, rows in _FONT.items():
        bitmap = np.array([[ch == "#" for ch in row] for row in rows], dtype=float)
        big = np.kron(bitmap, np.ones((2, 2)))  # 14 x 10
        out[digit, 1:15, 3:13] = big
    return out


def _translate(img: np.ndarray, dy: int, dx: int) -> np.ndarray:
    out = np.zeros_like(img)
    h, w = img.shape
    ys, yd = (slice(0, h - dy), slice(dy, h)) if dy >= 0 else (slice(-dy, h), slice(0, h + dy))
    xs, xd = (slice(0, w - dx), slice(dx, w)) if dx >= 0 else (slice(-dx, w), slice(0, w + dx))
    out[yd, xd] = img[ys, xs]
    return out


@dataclass
class SyntheticDigits(LabeledDataset):
    seed: int = 0


def gen_digits(seed: int, n: int) -> SyntheticDigits:
    if n < 10:
        raise ValueError(f"n must be >= 10, got {n}")
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n) % N_CLASSES)
    shifts = rng.integers(-MAX_TRANSLATION, MAX_TRANSLATION + 1, size=(n, 2))
    noise = rng.random((n, SIZE, SIZE))
    base = glyphs()
    images = np.empty((n, SIZE, SIZE))
    for i in range(n):
        images[i] = _translate(base[labels[i]], int(shifts[i, 0]), int(shifts[i, 1]))
    images = (1.0 - NOISE_AMPLITUDE) * images + NOISE_AMPLITUDE * noise
    return SyntheticDigits(images=images[..., None], labels=labels, seed=seed)


# -- domain shifts ------------------------------------------------------------

SHIFT_KINDS = ("affine", "invert", "noise", "composite", "clamped")


@dataclass(frozen=True)
class DomainShift:
    """Intensity shift applied to [0, 1] images.

    ``composite`` is affine followed by uniform noise in [-sigma_n, sigma_n].
    All kinds except ``clamped`` must keep [0, 1] inside [0, 1] without
    clipping; ``clamped`` clips and is not affine-invariant.
    """

    kind: str = "affine"
    a: float = 1.0
    b: float = 0.0
    sigma_n: float = 0.0

    def __post_init__(self):
        if self.kind not in SHIFT_KINDS:
            raise ValueError(f"unknown shift kind {self.kind!r}; expected one of {SHIFT_KINDS}")
        if not self.a > 0:
            raise ValueError(f"contrast a must be > 0, got {self.a}")
        if self.sigma_n < 0:
            raise ValueError(f"sigma_n must be >= 0, got {self.sigma_n}")
        if self.kind in ("affine", "composite"):
            spread = self.sigma_n if self.kind == "composite" else 0.0
            lo, hi = self.b - spread, self.a + self.b + spread
            if lo < 0 or hi > 1:
                raise ValueError(
                    f"{self.kind} shift a={self.a}, b={self.b}, sigma_n={spread} maps [0, 1] "
                    f"to [{lo:g}, {hi:g}], outside [0, 1]; use kind='clamped' to clip")

    @classmethod
    def identity(cls) -> "DomainShift":
        return cls("affine", 1.0, 0.0)


def _shift_images(x: np.ndarray, shift: DomainShift, rng: np.random.Generator) -> np.ndarray:
    if shift.kind == "invert":
        return 1.0 - x
    if shift.kind == "noise":
        y = x + rng.uniform(-shift.sigma_n, shift.sigma_n, size=x.shape)
    else:
        y = shift.a * x + shift.b
        if shift.kind in ("composite", "clamped") and shift.sigma_n > 0:
            y = y + rng.uniform(-shift.sigma_n, shift.sigma_n, size=x.shape)
    if shift.kind == "clamped":
        return np.clip(y, 0.0, 1.0)
    return y


def apply_shift(data: LabeledDataset, shift: DomainShift, seed: int = 0) -> LabeledDataset:
    y = _shift_images(data.images, shift, np.random.default_rng(seed))
    if y.size and (y.min() < 0 or y.max() > 1):
        raise ValueError(
            f"{shift.kind} shift produced values in [{y.min():g}, {y.max():g}], outside [0, 1]")
    return LabeledDataset(images=y, labels=data.labels.copy())


# -- classifier ---------------------------------------------------------------

def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _features(data) -> np.ndarray:
    x = data.images if isinstance(data, LabeledDataset) else np.asarray(data)
    return x.reshape(len(x), -1)


def loss_and_grad(W: np.ndarray, b: np.ndarray, X: np.ndarray, y: np.ndarray):
    """Mean softmax cross-entropy and its gradient w.r.t. (W, b)."""
    n = len(X)
    logits = X @ W.T + b
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = -logp[np.arange(n), y].mean()
    delta = np.exp(logp)
    delta[np.arange(n), y] -= 1.0
    delta /= n
    return loss, delta.T @ X, delta.sum(axis=0)


@dataclass
class TinyClassifier:
    W: np.ndarray
    b: np.ndarray
    loss_history: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @classmethod
    def random(cls, seed: int, n_features: int = SIZE * SIZE, scale: float = 1.0) -> "TinyClassifier":
        rng = np.random.default_rng(seed)
        return cls(W=rng.normal(0.0, scale, (N_CLASSES, n_features)),
                   b=rng.normal(0.0, scale, N_CLASSES))

    def logits(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.W.shape[1]:
            raise ValueError(f"model expects {self.W.shape[1]} features, got {X.shape[1]}")
        return X @ self.W.T + self.b

    def predict(self, data) -> np.ndarray:
        # argmax returns the first maximum, i.e. the lowest class id on ties
        return np.argmax(self.logits(_features(data)), axis=1)


def train(data: LabeledDataset, epochs: int = 200, lr: float = 0.1, seed: int = 0,
          init_scale: float = 0.01) -> TinyClassifier:
    """Full-batch gradient descent on mean softmax cross-entropy."""
    X = _features(data)
    y = np.asarray(data.labels)
    if len(X) == 0:
        raise ValueError("cannot train on an empty dataset")
    model = TinyClassifier.random(seed, X.shape[1], init_scale)
    if len(np.unique(y)) < 2:
        model.notes.append(f"degenerate training data: single class {int(y[0])}")
    for _ in range(epochs):
        loss, gW, gb = loss_and_grad(model.W, model.b, X, y)
        model.loss_history.append(float(loss))
        model.W -= lr * gW
        model.b -= lr * gb
    model.loss_history.append(float(loss_and_grad(model.W, model.b, X, y)[0]))
    return model


def evaluate(model: TinyClassifier, data: LabeledDataset):
    """Return (accuracy, confusion, predictions); confusion[true, predicted]."""
    pred = model.predict(data)
    y = np.asarray(data.labels)
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(confusion, (y, pred), 1)
    acc = float((pred == y).mean()) if len(y) else 0.0
    return acc, confusion, pred


# -- experiment ---------------------------------------------------------------

class ConfigError(ValueError):
    def __init__(self, path: str, msg: str):
        self.path = path
        super().__init__(f"{path}: {msg}")


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    n_train: int = 2000
    n_test: int = 2000
    k: int = 3
    padding: str = "replicate"
    shift: DomainShift = DomainShift("affine", 0.3, 0.35)
    epochs: int = 200
    lr: float = 0.1

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ExperimentConfig":
        if not isinstance(doc, Mapping):
            raise ConfigError("$", "config must be an object")
        known = {"seed", "n_train", "n_test", "k", "padding", "shift", "epochs", "lr"}
        for key in doc:
            if key not in known:
                raise ConfigError(key, "unknown field")
        kw: dict[str, Any] = {}
        ints = {"seed": 0, "n_train": 10, "n_test": 1, "k": 3, "epochs": 0}
        for key, lo in ints.items():
            if key in doc:
                v = doc[key]
                if isinstance(v, bool) or not isinstance(v, int):
                    raise ConfigError(key, f"expected an integer, got {v!r}")
                if v < lo:
                    raise ConfigError(key, f"must be >= {lo}, got {v}")
                kw[key] = v
        if "lr" in doc:
            if isinstance(doc["lr"], bool) or not isinstance(doc["lr"], (int, float)) or doc["lr"] <= 0:
                raise ConfigError("lr", f"expected a positive number, got {doc['lr']!r}")
            kw["lr"] = float(doc["lr"])
        if "padding" in doc:
            kw["padding"] = doc["padding"]
        try:
            NeurnConfig(k=kw.get("k", 3), padding=kw.get("padding", "replicate"))
        except ValueError as exc:
            raise ConfigError("k" if "k must" in str(exc) else "padding", str(exc)) from None
        if "shift" in doc:
            kw["shift"] = _shift_from_dict(doc["shift"])
        return cls(**kw)

    def to_dict(self) -> dict:
        return asdict(self)


def _shift_from_dict(doc) -> DomainShift:
    if not isinstance(doc, Mapping):
        raise ConfigError("shift", "must be an object")
    kw: dict[str, Any] = {}
    for key in doc:
        if key not in ("kind", "a", "b", "sigma_n"):
            raise ConfigError(f"shift.{key}", "unknown field")
    if "kind" in doc:
        if doc["kind"] not in SHIFT_KINDS:
            raise ConfigError("shift.kind", f"expected one of {SHIFT_KINDS}, got {doc['kind']!r}")
        kw["kind"] = doc["kind"]
    for key in ("a", "b", "sigma_n"):
        if key in doc:
            v = doc[key]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"shift.{key}", f"expected a number, got {v!r}")
            kw[key] = float(v)
    try:
        return DomainShift(**kw)
    except ValueError as exc:
        raise ConfigError("shift", str(exc)) from None


@dataclass
class ArmResult:
    source_acc: float
    target_acc: float
    source_confusion: np.ndarray
    target_confusion: np.ndarray
    source_pred: np.ndarray
    target_pred: np.ndarray
    final_loss: float
    notes: list

    def to_dict(self) -> dict:
        return {
            "source_acc": self.source_acc,
            "target_acc": self.target_acc,
            "source_confusion": self.source_confusion.tolist(),
            "target_confusion": self.target_confusion.tolist(),
            "final_loss": round(self.final_loss, 12),
            "notes": list(self.notes),
        }


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    arms: dict
    wall_time: float = 0.0

    def to_json(self) -> str:
        # wall time is left out so that reports are byte-reproducible
        doc = {"config": self.config.to_dict(),
               "arms": {name: arm.to_dict() for name, arm in self.arms.items()}}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def summary_csv(self) -> str:
        lines = ["arm,source_acc,target_acc"]
        for name, arm in self.arms.items():
            lines.append(f"{name},{arm.source_acc:.6f},{arm.target_acc:.6f}")
        return "\n".join(lines) + "\n"


def _arm(train_x: LabeledDataset, source: LabeledDataset, target: LabeledDataset,
         cfg: ExperimentConfig, seed: int) -> ArmResult:
    model = train(train_x, epochs=cfg.epochs, lr=cfg.lr, seed=seed)
    s_acc, s_conf, s_pred = evaluate(model, source)
    t_acc, t_conf, t_pred = evaluate(model, target)
    return ArmResult(s_acc, t_acc, s_conf, t_conf, s_pred, t_pred,
                     model.loss_history[-1], model.notes)


def run_experiment(cfg: Optional[ExperimentConfig] = None) -> ExperimentReport:
    cfg = cfg or ExperimentConfig()
    t0 = time.perf_counter()
    train_seed, test_seed, shift_seed, init_seed = (
        int(s) for s in np.random.SeedSequence(cfg.seed).generate_state(4))
    train_set = gen_digits(train_seed, cfg.n_train)
    source = gen_digits(test_seed, cfg.n_test)
    target = apply_shift(source, cfg.shift, seed=shift_seed)

    ncfg = NeurnConfig(k=cfg.k, padding=cfg.padding)

    def neurn(d: LabeledDataset) -> LabeledDataset:
        return LabeledDataset(images=transform_batch(d.images, ncfg), labels=d.labels)

    arms = {
        "baseline": _arm(train_set, source, target, cfg, init_seed),
        "neurn": _arm(neurn(train_set), neurn(source), neurn(target), cfg, init_seed),
    }
    return ExperimentReport(config=cfg, arms=arms, wall_time=time.perf_counter() - t0)
