"""Desk-scale experiment runners.

The full-size STL-10 numbers need 500 hand-segmented masks that were never
published, so the harness instead runs (i) a trainer sanity check on blob
data and (ii) a directional check that same-category background
recombination does not hurt, and typically helps, on a 5-class toy set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compose import BackgroundSetup, composite, extract_layers
from .convnet import (
    Conv,
    GlobalAvgPool,
    MaxPool,
    NetworkSpec,
    Relu,
    TrainConfig,
    build_micro_network,
    evaluate,
    preprocess,
    train,
)
from .dataset import schedule_epoch
from .inpaint import InpaintParams
from .seeding import mix64
from .synthetic import CONTEXT_CLASSES, make_blob_dataset, make_context_examples

CONTEXT_TRAIN_PER_CLASS = 10
CONTEXT_TEST_PER_CLASS = 40
CONTEXT_EPOCHS = 100
CONTEXT_LEARNING_RATE = 0.01


def context_network(classes: int = CONTEXT_CLASSES) -> NetworkSpec:
    return NetworkSpec((
        Conv(8, 5), Relu(), MaxPool(2, 2),
        Conv(16, 3), Relu(), MaxPool(2, 2),
        Conv(classes, 1), GlobalAvgPool(),
    ), in_channels=3)


def blob_run(seed: int, epochs: int = 30) -> float:
    """Train the micro net on 200 two-class blobs; returns train accuracy."""
    images, labels = make_blob_dataset(200, seed=seed)
    x = preprocess(images)
    spec = build_micro_network()
    cfg = TrainConfig(epochs=epochs, seed=seed)
    params, _ = train(spec, x, labels, cfg)
    return evaluate(spec, params, x, labels)


def context_run(seed: int, augmented: bool, epochs: int = CONTEXT_EPOCHS) -> float:
    """One arm of the directional experiment; returns test accuracy.

    Baseline trains on the original masked examples; the augmented arm
    replaces each epoch's images with fresh same-category foreground and
    infilled-background pairings (each appearing exactly once per epoch).
    """
    train_ex = make_context_examples(CONTEXT_TRAIN_PER_CLASS, mix64(seed, "train"))
    test_ex = make_context_examples(CONTEXT_TEST_PER_CLASS, mix64(seed, "test"))
    x_test = preprocess([e.image for e in test_ex])
    y_test = np.asarray([e.label for e in test_ex])
    y_train = np.asarray([e.label for e in train_ex])
    spec = context_network()
    cfg = TrainConfig(learning_rate=CONTEXT_LEARNING_RATE, epochs=epochs, seed=seed)
    if not augmented:
        x_train = preprocess([e.image for e in train_ex])
        params, _ = train(spec, x_train, y_train, cfg)
        return evaluate(spec, params, x_test, y_test)

    fgs, bgs = {}, {}
    for ex in train_ex:
        params_ip = InpaintParams(patch_size=5, pyramid_levels=2,
                                  rng_seed=mix64(seed, "infill", ex.source_id))
        fg, bg = extract_layers(ex, params_ip)
        fgs[ex.source_id] = fg
        bgs[ex.source_id] = bg
    refs = [(ex.source_id, ex.label) for ex in train_ex]

    def epoch_data(epoch: int):
        schedule = schedule_epoch(BackgroundSetup.SAME_CATEGORY_BG_WITH_FG,
                                  refs, refs, mix64(seed, "pairing"), epoch)
        images = [composite(fgs[fid], bgs[bid].image) for fid, bid in schedule.pairs]
        labels = np.asarray([fgs[fid].label for fid, _ in schedule.pairs])
        return preprocess(images), labels

    x0, y0 = epoch_data(0)
    params, _ = train(spec, x0, y0, cfg, epoch_data=epoch_data)
    return evaluate(spec, params, x_test, y_test)


@dataclass(frozen=True)
class ExperimentResult:
    name: str
    mean: float
    std: float
    accuracies: tuple[float, ...]


def run_replicated(name: str, config: TrainConfig) -> ExperimentResult:
    """Run a named experiment `replicate_count` times over derived seeds."""
    runners = {
        "blobs": lambda s: blob_run(s, epochs=config.epochs),
        "context-baseline": lambda s: context_run(s, augmented=False, epochs=config.epochs),
        "context-same-category": lambda s: context_run(s, augmented=True, epochs=config.epochs),
    }
    if name not in runners:
        raise ValueError(f"unknown experiment {name!r}; choose from {sorted(runners)}")
    accs = tuple(runners[name](mix64(config.seed, "replicate", rep))
                 for rep in range(config.replicate_count))
    arr = np.asarray(accs)
    return ExperimentResult(name, float(arr.mean()), float(arr.std()), accs)
