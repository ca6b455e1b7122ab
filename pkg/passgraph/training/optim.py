"""AdamW with decoupled weight decay and a reduce-on-plateau schedule."""

from dataclasses import dataclass, field, replace

import numpy as np

from passgraph.utils.errors import NonFiniteGradient, ShapeMismatch

BETA1 = 0.9
BETA2 = 0.999
ADAM_EPS = 1e-8

PLATEAU_MIN_DELTA = 1e-4
MIN_LR = 1e-7


@dataclass(frozen=True)
class AdamWState:
    step: int
    m: dict
    v: dict

    @classmethod
    def create(cls, params: dict) -> "AdamWState":
        return cls(
            step=0,
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
        )


def adamw_step(
    params: dict,
    grads: dict,
    state: AdamWState,
    lr: float,
    weight_decay: float,
    beta1: float = BETA1,
    beta2: float = BETA2,
    eps: float = ADAM_EPS,
) -> tuple[dict, AdamWState]:
    """
    One AdamW update. Returns new parameter and state dicts; inputs are not
    mutated.

        p <- p * (1 - lr * wd)
        p <- p - lr * m_hat / (sqrt(v_hat) + eps)
    """
    step = state.step + 1
    new_params, new_m, new_v = {}, {}, {}
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeMismatch(f"gradient {name}: {g.shape} vs parameter {p.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite gradient for {name}")
        m = beta1 * state.m[name] + (1.0 - beta1) * g
        v = beta2 * state.v[name] + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**step)
        v_hat = v / (1.0 - beta2**step)
        decayed = p * (1.0 - lr * weight_decay)
        new_params[name] = decayed - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[name], new_v[name] = m, v
    return new_params, AdamWState(step=step, m=new_m, v=new_v)


@dataclass(frozen=True)
class PlateauState:
    lr: float
    best: float = float("inf")
    bad_epochs: int = 0
    reductions: int = 0
    history: tuple[float, ...] = field(default=())


def plateau_scheduler(
    val_loss: float,
    state: PlateauState,
    patience: int = 5,
    factor: float = 0.5,
    min_delta: float = PLATEAU_MIN_DELTA,
    min_lr: float = MIN_LR,
) -> tuple[float, PlateauState]:
    """
    Feed one epoch's validation loss. The learning rate is multiplied by
    ``factor`` once ``patience`` consecutive epochs fail to beat the best
    loss by ``min_delta``; the counter then restarts.
    """
    history = (*state.history, float(val_loss))
    if val_loss < state.best - min_delta:
        return state.lr, replace(state, best=float(val_loss), bad_epochs=0, history=history)

    bad = state.bad_epochs + 1
    if bad >= patience:
        lr = max(state.lr * factor, min_lr)
        return lr, replace(
            state,
            lr=lr,
            bad_epochs=0,
            reductions=state.reductions + int(lr < state.lr),
            history=history,
        )
    return state.lr, replace(state, bad_epochs=bad, history=history)
