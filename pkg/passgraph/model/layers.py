"""Two-layer perceptrons with explicit reverse-mode gradients."""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from passgraph.utils.errors import ConfigError


def _relu(z):
    return np.maximum(z, 0.0)


# activation -> (forward, derivative expressed through (pre, post))
ACTIVATIONS = {
    "tanh": (np.tanh, lambda z, a: 1.0 - a * a),
    "relu": (_relu, lambda z, a: (z > 0.0).astype(np.float64)),
}

MaskSource = Callable[[tuple[int, ...]], np.ndarray | None]


def no_dropout(shape):
    return None


def dropout_masks(rng: np.random.Generator, rate: float) -> MaskSource:
    """Inverted dropout: kept units are scaled by 1 / (1 - rate)."""
    if rate <= 0.0:
        return no_dropout
    keep = 1.0 - rate

    def draw(shape):
        return (rng.random(shape) < keep) / keep

    return draw


def replay_masks(masks) -> MaskSource:
    it = iter(masks)

    def draw(shape):
        return next(it)

    return draw


@dataclass(frozen=True)
class MlpSpec:
    name: str
    dims: tuple[int, ...]
    final_activation: bool = True

    @property
    def depth(self) -> int:
        return len(self.dims) - 1

    def param_names(self) -> list[str]:
        names = []
        for k in range(self.depth):
            names += [f"{self.name}.W{k}", f"{self.name}.b{k}"]
        return names

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes = {}
        for k in range(self.depth):
            shapes[f"{self.name}.W{k}"] = (self.dims[k], self.dims[k + 1])
            shapes[f"{self.name}.b{k}"] = (self.dims[k + 1],)
        return shapes

    def init(self, rng: np.random.Generator) -> dict[str, np.ndarray]:
        params = {}
        for k in range(self.depth):
            bound = 1.0 / np.sqrt(self.dims[k])
            params[f"{self.name}.W{k}"] = rng.uniform(
                -bound, bound, size=(self.dims[k], self.dims[k + 1])
            )
            params[f"{self.name}.b{k}"] = np.zeros(self.dims[k + 1])
        return params

    def activated(self, k: int) -> bool:
        return k < self.depth - 1 or self.final_activation


@dataclass
class MlpTrace:
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)  # post-activation, pre-dropout
    masks: list = field(default_factory=list)


def mlp_forward(
    spec: MlpSpec,
    params: dict,
    x: np.ndarray,
    activation: str,
    masks: MaskSource = no_dropout,
) -> tuple[np.ndarray, MlpTrace]:
    if activation not in ACTIVATIONS:
        raise ConfigError("activation", f"unknown activation {activation!r}")
    act, _ = ACTIVATIONS[activation]
    trace = MlpTrace()
    a = x
    for k in range(spec.depth):
        trace.inputs.append(a)
        z = a @ params[f"{spec.name}.W{k}"] + params[f"{spec.name}.b{k}"]
        if spec.activated(k):
            a = act(z)
            trace.outputs.append((z, a))
            mask = masks(a.shape)
            trace.masks.append(mask)
            if mask is not None:
                a = a * mask
        else:
            a = z
            trace.outputs.append((z, None))
            trace.masks.append(None)
    return a, trace


def mlp_backward(
    spec: MlpSpec,
    params: dict,
    trace: MlpTrace,
    grad_out: np.ndarray,
    activation: str,
    grads: dict,
) -> np.ndarray:
    """Accumulates parameter gradients into ``grads``; returns d loss / d input."""
    _, deriv = ACTIVATIONS[activation]
    g = grad_out
    for k in reversed(range(spec.depth)):
        mask = trace.masks[k]
        if mask is not None:
            g = g * mask
        z, a = trace.outputs[k]
        if spec.activated(k):
            g = g * deriv(z, a)
        w_name, b_name = f"{spec.name}.W{k}", f"{spec.name}.b{k}"
        grads[w_name] += trace.inputs[k].T @ g
        grads[b_name] += g.sum(axis=0)
        g = g @ params[w_name].T
    return g
