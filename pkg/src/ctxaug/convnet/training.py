"""Training loop, evaluation, replicated experiments, and weight/config I/O."""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..errors import EmptyDataset
from ..imaging import gcn
from ..seeding import generator, mix64
from . import layers
from .network import NetworkSpec, backward, forward, init_params

WEIGHTS_HEADER = "ctxaug-weights v1"


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    momentum: float = 0.9
    batch_size: int = 10
    epochs: int = 10
    seed: int = 0
    replicate_count: int = 10

    def __post_init__(self):
        if self.learning_rate < 0 or self.batch_size < 1 or self.epochs < 0:
            raise ValueError("learning_rate, batch_size, epochs must be non-negative/positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")
        if self.replicate_count < 1:
            raise ValueError("replicate_count must be >= 1")


@dataclass
class EpochLog:
    epoch: int
    loss: float
    train_acc: float
    test_acc: float | None


def preprocess(images: Sequence[np.ndarray]) -> np.ndarray:
    """Global-contrast-normalize each image and stack to (B, C, H, W)."""
    if len(images) == 0:
        raise EmptyDataset("no images to preprocess")
    return np.stack([gcn(img).transpose(2, 0, 1) for img in images])


def train(spec: NetworkSpec, x: np.ndarray, labels: np.ndarray, config: TrainConfig,
          test: tuple[np.ndarray, np.ndarray] | None = None,
          params: list[dict] | None = None,
          epoch_data: Callable[[int], tuple[np.ndarray, np.ndarray]] | None = None):
    """SGD with momentum over seeded-shuffle epochs.

    `epoch_data(epoch)` may supply fresh (x, labels) per epoch (the
    epoch-unique pairing flows); otherwise the fixed arrays are reused.
    Deterministic given (spec, data, config.seed).
    Returns (params, [EpochLog, ...]).
    """
    if x.shape[0] == 0:
        raise EmptyDataset("training set is empty")
    if params is None:
        params = init_params(spec, config.seed)
    velocities = [{"w": np.zeros_like(p["w"]), "b": np.zeros_like(p["b"])} for p in params]
    log: list[EpochLog] = []
    for epoch in range(config.epochs):
        if epoch_data is not None:
            x, labels = epoch_data(epoch)
        n = x.shape[0]
        order = generator(config.seed, "shuffle", epoch).permutation(n)
        total_loss = 0.0
        correct = 0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            xb, yb = x[batch], labels[batch]
            logits, caches = forward(spec, params, xb)
            loss, dlogits = layers.softmax_xent(logits, yb)
            grads, _ = backward(spec, caches, dlogits)
            flat_p = [p[k] for p in params for k in ("w", "b")]
            flat_g = [g[k] for g in grads for k in ("w", "b")]
            flat_v = [v[k] for v in velocities for k in ("w", "b")]
            layers.sgd_momentum_step(flat_p, flat_g, flat_v,
                                     config.learning_rate, config.momentum)
            total_loss += loss * len(batch)
            correct += int((logits.argmax(axis=1) == yb).sum())
        test_acc = evaluate(spec, params, *test) if test is not None else None
        log.append(EpochLog(epoch, total_loss / n, correct / n, test_acc))
    return params, log


def evaluate(spec: NetworkSpec, params: list[dict], x: np.ndarray,
             labels: np.ndarray, batch_size: int = 50) -> float:
    """Fraction of argmax predictions (lowest index wins ties) matching labels."""
    if x.shape[0] == 0:
        raise EmptyDataset("evaluation set is empty")
    correct = 0
    for start in range(0, x.shape[0], batch_size):
        logits, _ = forward(spec, params, x[start:start + batch_size])
        correct += int((logits.argmax(axis=1) == labels[start:start + batch_size]).sum())
    return correct / x.shape[0]


def run_experiment(config: TrainConfig, build_run: Callable[[int], float]) -> tuple[float, float]:
    """Repeat a training run over derived seeds; report mean and population
    std of the returned accuracies."""
    accs = [build_run(mix64(config.seed, "replicate", rep))
            for rep in range(config.replicate_count)]
    arr = np.asarray(accs, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


# -- weight checkpoints -------------------------------------------------------

def save_weights(path: str | Path, params: list[dict]) -> None:
    """Header line, one shape line per tensor, blank line, then raw
    little-endian float64 payloads in order."""
    shapes = []
    payload = io.BytesIO()
    for p in params:
        for key in ("w", "b"):
            arr = np.ascontiguousarray(p[key], dtype="<f8")
            shapes.append(f"{key}:" + ",".join(str(d) for d in arr.shape))
            payload.write(arr.tobytes())
    header = WEIGHTS_HEADER + "\n" + " ".join(shapes) + "\n\n"
    Path(path).write_bytes(header.encode() + payload.getvalue())


def load_weights(path: str | Path) -> list[dict]:
    raw = Path(path).read_bytes()
    head, _, rest = raw.partition(b"\n\n")
    lines = head.decode().splitlines()
    if not lines or lines[0] != WEIGHTS_HEADER:
        raise ValueError(f"{path}: missing '{WEIGHTS_HEADER}' header")
    params: list[dict] = []
    offset = 0
    for token in lines[1].split():
        key, _, shape_s = token.partition(":")
        shape = tuple(int(d) for d in shape_s.split(","))
        count = int(np.prod(shape))
        arr = np.frombuffer(rest, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
        offset += count * 8
        if key == "w":
            params.append({"w": arr})
        else:
            if not params or "b" in params[-1]:
                raise ValueError(f"{path}: bias without matching weight")
            params[-1]["b"] = arr
    if offset != len(rest):
        raise ValueError(f"{path}: {len(rest) - offset} trailing bytes")
    return params


# -- run configuration and logs ------------------------------------------------

def parse_config(path: str | Path) -> dict[str, str]:
    """key = value lines; blank lines and #-comments ignored."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        out[key.strip()] = value.strip()
    return out


def train_config_from(options: dict[str, str], **overrides) -> TrainConfig:
    kwargs: dict = {}
    for key, cast in (("learning_rate", float), ("momentum", float), ("batch_size", int),
                      ("epochs", int), ("seed", int), ("replicate_count", int)):
        if key in options:
            kwargs[key] = cast(options[key])
    kwargs.update(overrides)
    return TrainConfig(**kwargs)


def write_log_csv(path: str | Path, log: Sequence[EpochLog]) -> None:
    lines = ["epoch,loss,train_acc,test_acc"]
    for row in log:
        test = "" if row.test_acc is None else f"{row.test_acc:.6f}"
        lines.append(f"{row.epoch},{row.loss:.6f},{row.train_acc:.6f},{test}")
    Path(path).write_text("\n".join(lines) + "\n")
