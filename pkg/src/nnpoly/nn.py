"""Single-hidden-layer, single-output network with a linear output unit.

The forward map is z = v_0 + sum_j v_j g(u_j) with synaptic potentials
u_j = w_0j + sum_i w_ij x_i.  Training minimizes E = 0.5 * sum_k (z_k - y_k)^2
by full-batch resilient backpropagation with weight backtracking (iRPROP+).
Weight layout: w has shape (p+1, h1) with row 0 holding the hidden biases,
v has length h1+1 with v[0] the output bias.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import activations

MAX_HIDDEN = 128

WEIGHT_FILE_FORMAT = 1


@dataclass(frozen=True)
class NetworkWeights:
    """Immutable weight bundle; arrays are copied and locked on construction."""

    w: np.ndarray
    v: np.ndarray
    activation: str

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        v = np.array(self.v, dtype=float)
        if w.ndim != 2 or w.shape[0] < 2:
            raise ValueError(f"w must have shape (p+1, h1) with p >= 1, got {w.shape}")
        if v.shape != (w.shape[1] + 1,):
            raise ValueError(f"v has shape {v.shape}, expected ({w.shape[1] + 1},)")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
            raise ValueError("weights must be finite")
        if self.activation not in activations.ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        w.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "v", v)

    @property
    def p(self) -> int:
        return self.w.shape[0] - 1

    @property
    def h1(self) -> int:
        return self.w.shape[1]


def potentials(wts: NetworkWeights, X: np.ndarray) -> np.ndarray:
    """Synaptic potentials u_j(x_k) as an (n, h1) matrix."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != wts.p:
        raise ValueError(f"X has shape {X.shape}, expected (n, {wts.p})")
    return wts.w[0][None, :] + X @ wts.w[1:]


def forward(wts: NetworkWeights, x) -> float:
    """Network output at a single input point."""
    x = np.asarray(x, dtype=float)
    if x.shape != (wts.p,):
        raise ValueError(f"input has shape {x.shape}, expected ({wts.p},)")
    u = wts.w[0] + x @ wts.w[1:]
    return float(wts.v[0] + wts.v[1:] @ activations.value(wts.activation, u))


def predict(wts: NetworkWeights, X: np.ndarray) -> np.ndarray:
    """Network output for each row of an (n, p) array."""
    u = potentials(wts, X)
    return wts.v[0] + activations.value(wts.activation, u) @ wts.v[1:]


def loss_and_gradients(
    wts: NetworkWeights, X: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Half-sum-of-squares loss and its analytic gradients (d/dw, d/dv)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    return _loss_grads(wts.w, wts.v, X, y, wts.activation)


def _value_and_derivative(kind, U):
    # fused so the training loop pays for exp once per epoch
    if kind == "softplus":
        e = np.exp(-np.abs(U))
        den = 1.0 + e
        return np.maximum(U, 0.0) + np.log1p(e), np.where(U >= 0, 1.0 / den, e / den)
    if kind == "tanh":
        t = np.tanh(U)
        return t, 1.0 - t * t
    if kind == "sigmoid":
        e = np.exp(-np.abs(U))
        den = 1.0 + e
        s = np.where(U >= 0, 1.0 / den, e / den)
        return s, s * (1.0 - s)
    return U, np.ones_like(U)


def _loss_grads(w, v, X, y, kind):
    X1 = np.hstack([np.ones((X.shape[0], 1)), X])
    gw = np.empty_like(w)
    gv = np.empty_like(v)
    loss = _epoch_loss_grads(w, v, X1, y, kind, gw, gv)
    return loss, gw, gv


def _epoch_loss_grads(w, v, X1, y, kind, gw_out, gv_out):
    # X1 carries the ones column, so w (bias row included) is used whole
    U = X1 @ w
    G, Gp = _value_and_derivative(kind, U)
    r = G @ v[1:]
    r += v[0]
    r -= y
    loss = 0.5 * float(r @ r)
    gv_out[0] = r.sum()
    np.matmul(r, G, out=gv_out[1:])
    M = Gp  # consumed in place; Gp is not needed past this point
    M *= r[:, None]
    M *= v[1:][None, :]
    np.matmul(X1.T, M, out=gw_out)
    return loss


@dataclass(frozen=True)
class TrainConfig:
    """Resilient-backpropagation settings (classic published step constants).

    ``init`` draws starting weights either uniformly on [-s, s] or normally
    with standard deviation s, where s is ``init_scale`` (None keeps the
    distribution's default: 1/sqrt(p+1) for uniform, 1.0 for normal).
    """

    max_epochs: int = 10000
    grad_tol: float = 0.01
    step_init: float = 0.1
    eta_plus: float = 1.2
    eta_minus: float = 0.5
    step_min: float = 1e-6
    step_max: float = 50.0
    init: str = "normal"
    init_scale: float | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.eta_minus < 1.0 < self.eta_plus:
            raise ValueError("require 0 < eta_minus < 1 < eta_plus")
        if not 0.0 < self.step_min <= self.step_init <= self.step_max:
            raise ValueError("require 0 < step_min <= step_init <= step_max")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if self.init not in ("uniform", "normal"):
            raise ValueError(f"init must be 'uniform' or 'normal', got {self.init!r}")


@dataclass(frozen=True)
class TrainTrace:
    """Loss per epoch plus stop diagnostics (loss is not forced monotone)."""

    losses: tuple[float, ...]
    converged: bool
    epochs: int
    final_grad_max: float


def train_rprop(
    X: np.ndarray,
    y: np.ndarray,
    h1: int,
    activation: str,
    cfg: TrainConfig = TrainConfig(),
) -> tuple[NetworkWeights, TrainTrace]:
    """Train by iRPROP+: sign-based adaptive steps, backtracking on error increase.

    Deterministic for a given seed.  Stops when max|dE/dw| < grad_tol or at
    max_epochs.  Raises RuntimeError if the loss turns non-finite.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"X must be (n, p) with n >= 1, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise ValueError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
    if not 1 <= h1 <= MAX_HIDDEN:
        raise ValueError(f"h1 must be in [1, {MAX_HIDDEN}], got {h1}")
    if activation not in activations.ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    p = X.shape[1]

    rng = np.random.default_rng(cfg.seed)
    if cfg.init == "uniform":
        scale = cfg.init_scale if cfg.init_scale is not None else 1.0 / math.sqrt(p + 1)
        w = rng.uniform(-scale, scale, size=(p + 1, h1))
        v = rng.uniform(-scale, scale, size=h1 + 1)
    else:
        scale = cfg.init_scale if cfg.init_scale is not None else 1.0
        w = rng.normal(0.0, scale, size=(p + 1, h1))
        v = rng.normal(0.0, scale, size=h1 + 1)
    nw = w.size

    theta = np.concatenate([w.ravel(), v])
    g = np.empty_like(theta)
    w_view = theta[:nw].reshape(p + 1, h1)
    v_view = theta[nw:]
    gw_view = g[:nw].reshape(p + 1, h1)
    gv_view = g[nw:]
    step = np.full(theta.size, cfg.step_init)
    g_prev = np.zeros(theta.size)
    dtheta_prev = np.zeros(theta.size)
    loss_prev = math.inf

    X1 = np.hstack([np.ones((X.shape[0], 1)), X])  # x_0 = 1 constant input
    losses: list[float] = []
    converged = False
    grad_max = math.inf
    for epoch in range(cfg.max_epochs):
        loss = _epoch_loss_grads(w_view, v_view, X1, y, activation, gw_view, gv_view)
        if not (math.isfinite(loss) and np.all(np.isfinite(g))):
            raise RuntimeError(f"training diverged: non-finite loss or gradient at epoch {epoch}")
        losses.append(loss)
        grad_max = float(np.max(np.abs(g)))
        if grad_max < cfg.grad_tol:
            converged = True
            break

        prod = g * g_prev
        grew = prod > 0
        flipped = prod < 0
        step[grew] = np.minimum(step[grew] * cfg.eta_plus, cfg.step_max)
        step[flipped] = np.maximum(step[flipped] * cfg.eta_minus, cfg.step_min)
        dtheta = -np.sign(g) * step
        if loss > loss_prev:
            dtheta[flipped] = -dtheta_prev[flipped]  # undo the offending step
        else:
            dtheta[flipped] = 0.0
        g[flipped] = 0.0
        theta += dtheta

        np.copyto(g_prev, g)
        dtheta_prev, loss_prev = dtheta, loss

    wts = NetworkWeights(w=w_view, v=v_view, activation=activation)
    trace = TrainTrace(
        losses=tuple(losses),
        converged=converged,
        epochs=len(losses),
        final_grad_max=grad_max,
    )
    return wts, trace


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def weights_to_json(wts: NetworkWeights) -> str:
    lines = [
        "{",
        f'  "format": {WEIGHT_FILE_FORMAT},',
        f'  "p": {wts.p},',
        f'  "h1": {wts.h1},',
        f'  "activation": "{wts.activation}",',
        '  "w": [',
    ]
    for r in range(wts.p + 1):
        row = ", ".join(_fmt(x) for x in wts.w[r])
        comma = "," if r < wts.p else ""
        lines.append(f"    [{row}]{comma}")
    lines.append("  ],")
    vrow = ", ".join(_fmt(x) for x in wts.v)
    lines.append(f'  "v": [{vrow}]')
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_weights(wts: NetworkWeights, path) -> None:
    with open(path, "w") as fh:
        fh.write(weights_to_json(wts))


def load_weights(path) -> NetworkWeights:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    for name in ("format", "p", "h1", "activation", "w", "v"):
        if name not in doc:
            raise ValueError(f"{path}: missing field '{name}'")
    if doc["format"] != WEIGHT_FILE_FORMAT:
        raise ValueError(f"{path}: unsupported format {doc['format']!r}")
    p, h1 = int(doc["p"]), int(doc["h1"])
    w = np.asarray(doc["w"], dtype=float)
    v = np.asarray(doc["v"], dtype=float)
    if w.shape != (p + 1, h1):
        raise ValueError(f"{path}: field 'w' has shape {w.shape}, expected ({p + 1}, {h1})")
    if v.shape != (h1 + 1,):
        raise ValueError(f"{path}: field 'v' has shape {v.shape}, expected ({h1 + 1},)")
    try:
        return NetworkWeights(w=w, v=v, activation=doc["activation"])
    except ValueError as e:
        raise ValueError(f"{path}: {e}") from e
