"""Multilayer perceptron regressor trained with Adam on squared loss."""

from __future__ import annotations

import numpy as np

from .._validation import ValidationError
from ._base import FitError, MinMaxRegressor

_ACTIVATIONS = {
    "tanh": (np.tanh, lambda a: 1.0 - a**2),
    "relu": (lambda z: np.maximum(z, 0.0), lambda a: (a > 0).astype(float)),
}


def init_params(sizes: list[int], rng: np.random.Generator) -> list[np.ndarray]:
    """Glorot-uniform weights and zero biases, as ``[W1, b1, W2, b2, ...]``."""
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        params.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        params.append(np.zeros(fan_out))
    return params


def forward(params, X, activation="tanh"):
    act, _ = _ACTIVATIONS[activation]
    hidden = [X]
    h = X
    n_layers = len(params) // 2
    for k in range(n_layers):
        z = h @ params[2 * k] + params[2 * k + 1]
        h = z if k == n_layers - 1 else act(z)
        hidden.append(h)
    return h[:, 0], hidden


def loss_and_grad(params, X, y, activation="tanh"):
    """Mean squared error and its gradient with respect to every parameter array."""
    _, dact = _ACTIVATIONS[activation]
    out, hidden = forward(params, X, activation)
    err = out - y
    loss = float(np.mean(err**2))
    grads = [None] * len(params)
    delta = (2.0 / len(y)) * err[:, None]
    n_layers = len(params) // 2
    for k in reversed(range(n_layers)):
        grads[2 * k] = hidden[k].T @ delta
        grads[2 * k + 1] = delta.sum(axis=0)
        if k:
            delta = (delta @ params[2 * k].T) * dact(hidden[k])
    return loss, grads


class MLPForecaster(MinMaxRegressor):
    """Fully connected network with a linear output unit.

    Inputs and target are min-max scaled on the training set.  The parameters
    with the lowest training loss seen are kept, so the final loss never
    exceeds the loss at initialization.

    Parameters
    ----------
    hidden_layer_sizes : tuple of int, default=(64,)
    activation : {"tanh", "relu"}, default="tanh"
    epochs : int, default=1500
    learning_rate : float, default=0.01
    batch_size : int or None, default=None
        ``None`` trains full-batch.
    seed : int, default=0
    """

    def __init__(self, hidden_layer_sizes=(64,), activation="tanh", epochs=1500,
                 learning_rate=0.01, batch_size=None, seed=0):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.activation = activation
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.seed = seed

    def fit(self, X, y):
        if self.activation not in _ACTIVATIONS:
            raise ValidationError(f"unknown activation {self.activation!r}")
        Z, y = self._validate_fit(X, y)
        self.y_min_ = float(y.min())
        y_range = float(y.max()) - self.y_min_
        self.constant_ = y_range == 0
        self.y_range_ = y_range if y_range > 0 else 1.0
        rng = np.random.default_rng(self.seed)
        sizes = [Z.shape[1], *self.hidden_layer_sizes, 1]
        params = init_params(sizes, rng)
        if self.constant_:
            self.params_ = [np.zeros_like(p) for p in params]
            self.loss_curve_ = [0.0]
            return self
        t = (y - self.y_min_) / self.y_range_
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        batch = len(Z) if self.batch_size is None else int(self.batch_size)
        best_loss, _ = loss_and_grad(params, Z, t, self.activation)
        best = [p.copy() for p in params]
        self.loss_curve_ = [best_loss]
        step = 0
        for _ in range(self.epochs):
            idx = np.arange(len(Z)) if batch >= len(Z) else rng.permutation(len(Z))
            for start in range(0, len(Z), batch):
                rows = idx[start:start + batch]
                loss, grads = loss_and_grad(params, Z[rows], t[rows], self.activation)
                if not np.isfinite(loss):
                    raise FitError("diverged; lower learning rate")
                step += 1
                for k, g in enumerate(grads):
                    m[k] = beta1 * m[k] + (1 - beta1) * g
                    v[k] = beta2 * v[k] + (1 - beta2) * g * g
                    m_hat = m[k] / (1 - beta1**step)
                    v_hat = v[k] / (1 - beta2**step)
                    params[k] = params[k] - self.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
            epoch_loss, _ = loss_and_grad(params, Z, t, self.activation)
            if not np.isfinite(epoch_loss):
                raise FitError("diverged; lower learning rate")
            self.loss_curve_.append(epoch_loss)
            if epoch_loss < best_loss:
                best_loss = epoch_loss
                best = [p.copy() for p in params]
        self.params_ = best
        self.train_loss_ = best_loss * self.y_range_**2
        return self

    def predict(self, X):
        Z = self._validate_predict(X)
        if self.constant_:
            return np.full(len(Z), self.y_min_)
        out, _ = forward(self.params_, Z, self.activation)
        return self.y_min_ + out * self.y_range_
