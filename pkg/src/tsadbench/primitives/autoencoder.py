"""Dense autoencoder trained with mini-batch SGD on the reconstruction MSE.

Everything is plain numpy: tanh on hidden layers, linear output layer.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tsadbench.exceptions import NonFiniteLoss, ShapeMismatch


@dataclass(frozen=True)
class DenseAutoencoder:
    weights: tuple        # weights[k] has shape (fan_in, fan_out)
    biases: tuple
    loss_history: tuple = ()

    @property
    def layer_sizes(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]


def mirrored_sizes(width, hidden=60, latent=20):
    return [width, hidden, latent, hidden, width]


def init_autoencoder(layer_sizes, rng) -> DenseAutoencoder:
    """Glorot-uniform weights, zero biases."""
    if layer_sizes[0] != layer_sizes[-1] or list(layer_sizes) != list(layer_sizes)[::-1]:
        raise ValueError(f"encoder/decoder sizes must mirror: {layer_sizes}")
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return DenseAutoencoder(tuple(weights), tuple(biases))


def forward(weights, biases, X):
    """Output and the list of layer activations (input first)."""
    activations = [X]
    h = X
    last = len(weights) - 1
    for k, (W, b) in enumerate(zip(weights, biases)):
        h = h @ W + b
        if k < last:
            h = np.tanh(h)
        activations.append(h)
    return h, activations


def mse_loss(weights, biases, X):
    output, _ = forward(weights, biases, X)
    return float(np.mean((output - X) ** 2))


def loss_and_gradients(weights, biases, X):
    """MSE over all elements and its gradients w.r.t. every weight and bias."""
    output, activations = forward(weights, biases, X)
    diff = output - X
    loss = float(np.mean(diff ** 2))

    grad_w = [None] * len(weights)
    grad_b = [None] * len(weights)
    delta = 2.0 * diff / diff.size
    for k in range(len(weights) - 1, -1, -1):
        grad_w[k] = activations[k].T @ delta
        grad_b[k] = delta.sum(axis=0)
        if k > 0:
            # activations[k] is tanh output of layer k-1
            delta = (delta @ weights[k].T) * (1.0 - activations[k] ** 2)
    return loss, grad_w, grad_b


def _flatten_windows(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 3:
        X = X.reshape(X.shape[0], -1)
    if X.ndim != 2:
        raise ShapeMismatch(f"expected windows as a 2-D matrix, got shape {X.shape}")
    return X


def ae_fit(X, hidden: int = 60, latent: int = 20, epochs: int = 30, batch_size: int = 64,
           learning_rate: float = 1e-3, rng=None, layer_sizes=None) -> DenseAutoencoder:
    """Train on the rows of ``X``; returns the model with its per-epoch loss.

    ``loss_history`` holds the full-data loss before training followed by the
    loss after every epoch.
    """
    X = _flatten_windows(X)
    rng = np.random.default_rng(rng)
    sizes = layer_sizes or mirrored_sizes(X.shape[1], hidden, latent)
    if sizes[0] != X.shape[1]:
        raise ShapeMismatch(f"input layer has {sizes[0]} units for windows of {X.shape[1]}")
    model = init_autoencoder(sizes, rng)
    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]

    n = X.shape[0]
    batch_size = max(1, min(int(batch_size), n))
    history = [mse_loss(weights, biases, X)]
    for _ in range(int(epochs)):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = X[order[start:start + batch_size]]
            _, grad_w, grad_b = loss_and_gradients(weights, biases, batch)
            for k in range(len(weights)):
                weights[k] -= learning_rate * grad_w[k]
                biases[k] -= learning_rate * grad_b[k]
        loss = mse_loss(weights, biases, X)
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"training diverged after {len(history)} epochs")
        history.append(loss)
    return DenseAutoencoder(tuple(weights), tuple(biases), tuple(history))


def ae_reconstruct(model: DenseAutoencoder, X) -> np.ndarray:
    """Forward pass; output has the shape of ``X``."""
    X_arr = np.asarray(X, dtype=float)
    flat = _flatten_windows(X_arr)
    if flat.shape[1] != model.layer_sizes[0]:
        raise ShapeMismatch(f"model expects width {model.layer_sizes[0]}, got {flat.shape[1]}")
    output, _ = forward(model.weights, model.biases, flat)
    return output.reshape(X_arr.shape)
