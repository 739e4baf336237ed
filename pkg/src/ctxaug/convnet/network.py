"""Network assembly: layer descriptors, shape tracing, He init, and the
forward/backward pass over a whole spec."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import ShapeMismatch
from ..seeding import generator
from . import layers


@dataclass(frozen=True)
class Conv:
    out_channels: int
    kernel: int


@dataclass(frozen=True)
class MaxPool:
    window: int
    stride: int


@dataclass(frozen=True)
class Relu:
    pass


@dataclass(frozen=True)
class GlobalAvgPool:
    pass


LayerSpec = Union[Conv, MaxPool, Relu, GlobalAvgPool]


@dataclass(frozen=True)
class NetworkSpec:
    layers: tuple[LayerSpec, ...]
    in_channels: int = 3

    def trace_shapes(self, height: int, width: int) -> list[tuple[int, ...]]:
        """Shape after each layer, starting from (in_channels, H, W); the
        final entry is the logits shape (classes,)."""
        c, h, w = self.in_channels, height, width
        shapes: list[tuple[int, ...]] = [(c, h, w)]
        for layer in self.layers:
            if isinstance(layer, Conv):
                if layer.kernel > h or layer.kernel > w:
                    raise ShapeMismatch(f"kernel {layer.kernel} does not fit {h}x{w}")
                c, h, w = layer.out_channels, h - layer.kernel + 1, w - layer.kernel + 1
            elif isinstance(layer, MaxPool):
                if layer.window > h or layer.window > w:
                    raise ShapeMismatch(f"window {layer.window} does not fit {h}x{w}")
                h = (h - layer.window) // layer.stride + 1
                w = (w - layer.window) // layer.stride + 1
            elif isinstance(layer, GlobalAvgPool):
                shapes.append((c,))
                continue
            shapes.append((c, h, w))
        return shapes

    def num_classes(self) -> int:
        convs = [l for l in self.layers if isinstance(l, Conv)]
        return convs[-1].out_channels


def build_paper_network(in_channels: int = 3, classes: int = 10) -> NetworkSpec:
    """The 4-conv network used for all experiments: 96 7x7 filters, 3x3/3
    pool, 256 5x5, 2x2/2 pool, 512 3x3, 2x2/2 pool, then a 1x1 conv to the
    class count feeding global average pooling."""
    return NetworkSpec((
        Conv(96, 7), Relu(), MaxPool(3, 3),
        Conv(256, 5), Relu(), MaxPool(2, 2),
        Conv(512, 3), Relu(), MaxPool(2, 2),
        Conv(classes, 1), GlobalAvgPool(),
    ), in_channels)


def build_micro_network(in_channels: int = 3, classes: int = 2) -> NetworkSpec:
    """Small two-conv net for sanity runs on 16x16 inputs."""
    return NetworkSpec((
        Conv(8, 3), Relu(), MaxPool(2, 2),
        Conv(classes, 1), GlobalAvgPool(),
    ), in_channels)


def init_params(spec: NetworkSpec, seed: int) -> list[dict[str, np.ndarray]]:
    """He-normal weights (std sqrt(2/fan_in)), zero biases, one dict per conv."""
    rng = generator(seed, "init")
    params = []
    c = spec.in_channels
    for layer in spec.layers:
        if isinstance(layer, Conv):
            fan_in = c * layer.kernel * layer.kernel
            std = np.sqrt(2.0 / fan_in)
            w = rng.normal(0.0, std, size=(layer.out_channels, c, layer.kernel, layer.kernel))
            params.append({"w": w, "b": np.zeros(layer.out_channels)})
            c = layer.out_channels
    return params


def forward(spec: NetworkSpec, params: list[dict[str, np.ndarray]], x: np.ndarray):
    """Run the network; returns (logits, caches) for the backward pass."""
    caches = []
    conv_idx = 0
    out = x
    for layer in spec.layers:
        if isinstance(layer, Conv):
            p = params[conv_idx]
            out, cache = layers.conv_forward(out, p["w"], p["b"])
            caches.append(("conv", cache))
            conv_idx += 1
        elif isinstance(layer, MaxPool):
            out, cache = layers.pool_forward(out, layer.window, layer.stride)
            caches.append(("pool", cache))
        elif isinstance(layer, Relu):
            out, cache = layers.relu_forward(out)
            caches.append(("relu", cache))
        else:
            out, cache = layers.gap_forward(out)
            caches.append(("gap", cache))
    return out, caches


def backward(spec: NetworkSpec, caches, dlogits: np.ndarray):
    """Propagate the loss gradient back; returns per-conv {'w','b'} grads."""
    grads: list[dict[str, np.ndarray]] = []
    d = dlogits
    for kind, cache in reversed(caches):
        if kind == "conv":
            d, dw, db = layers.conv_backward(d, cache)
            grads.append({"w": dw, "b": db})
        elif kind == "pool":
            d = layers.pool_backward(d, cache)
        elif kind == "relu":
            d = layers.relu_backward(d, cache)
        else:
            d = layers.gap_backward(d, cache)
    grads.reverse()
    return grads, d
