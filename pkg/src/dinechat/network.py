"""Hand-rolled fully connected network with ReLU hidden layers.

The output layer is interpreted by the agent as a flattened
(channels x actions) Q-value block. Backpropagation is written out
explicitly so it can be validated against central finite differences.
"""

import numpy as np


class MLP:
    """Multilayer perceptron with deterministic seeded initialization.

    Weights: ``W ~ Normal(0, sqrt(2 / fan_in))`` drawn layer by layer from a
    single ``numpy`` generator, biases zero. Forward passes are pure.
    """

    def __init__(self, layer_sizes, seed=0, rng=None):
        if len(layer_sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.layer_sizes = tuple(int(s) for s in layer_sizes)
        rng = rng if rng is not None else np.random.default_rng(seed)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.layer_sizes, self.layer_sizes[1:]):
            scale = np.sqrt(2.0 / fan_in)
            self.weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out, dtype=np.float64))

    @property
    def n_layers(self):
        return len(self.weights)

    def forward(self, x):
        """Return (output, cache). `x` is (batch, in) or (in,)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        activations = [x]
        h = x
        for i in range(self.n_layers - 1):
            h = np.maximum(h @ self.weights[i] + self.biases[i], 0.0)
            activations.append(h)
        out = h @ self.weights[-1] + self.biases[-1]
        return out, activations

    def predict(self, x):
        out, _ = self.forward(x)
        return out

    def backward(self, cache, grad_out):
        """Gradients of a scalar loss w.r.t. all parameters.

        `cache` is the activation list from `forward`; `grad_out` is
        dLoss/dOutput with the same shape as the forward output.
        """
        grads_w = [None] * self.n_layers
        grads_b = [None] * self.n_layers
        delta = np.asarray(grad_out, dtype=np.float64)
        for i in range(self.n_layers - 1, -1, -1):
            a_prev = cache[i]
            grads_w[i] = a_prev.T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (cache[i] > 0.0)
        return list(zip(grads_w, grads_b))

    def apply_gradients(self, grads, learning_rate, clip_norm=None):
        """One SGD step; gradients are jointly clipped to `clip_norm`."""
        if clip_norm is not None:
            total = 0.0
            for gw, gb in grads:
                total += float(np.sum(gw * gw)) + float(np.sum(gb * gb))
            norm = np.sqrt(total)
            if norm > clip_norm:
                scale = clip_norm / norm
                grads = [(gw * scale, gb * scale) for gw, gb in grads]
        for i, (gw, gb) in enumerate(grads):
            self.weights[i] = self.weights[i] - learning_rate * gw
            self.biases[i] = self.biases[i] - learning_rate * gb

    def get_weights(self):
        return [(w.copy(), b.copy()) for w, b in zip(self.weights, self.biases)]

    def set_weights(self, params):
        self.weights = [w.copy() for w, _ in params]
        self.biases = [b.copy() for _, b in params]

    def copy(self):
        clone = MLP.__new__(MLP)
        clone.layer_sizes = self.layer_sizes
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        return clone


def loss_and_grads(network, x, target):
    """Squared-error loss ``0.5 * sum((f(x) - target)^2)`` and its gradients."""
    out, cache = network.forward(x)
    diff = out - np.atleast_2d(target)
    loss = 0.5 * float(np.sum(diff * diff))
    return loss, network.backward(cache, diff)


def gradient_check(network, x, target=None, h=1e-5, grads=None):
    """Max relative error between analytic and central-difference gradients.

    Every parameter of every layer is perturbed by ``+/- h``. Pass `grads`
    to check an externally supplied gradient set instead of the network's own
    backward pass (used as a negative control).
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if target is None:
        target = np.zeros((x.shape[0], network.layer_sizes[-1]))
    target = np.atleast_2d(target)

    if grads is None:
        _, grads = loss_and_grads(network, x, target)

    def loss_at():
        out, _ = network.forward(x)
        diff = out - target
        return 0.5 * float(np.sum(diff * diff))

    max_rel = 0.0
    params = list(network.weights) + list(network.biases)
    analytic = [gw for gw, _ in grads] + [gb for _, gb in grads]
    for arr, grad in zip(params, analytic):
        flat = arr.reshape(-1)
        gflat = np.asarray(grad).reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + h
            plus = loss_at()
            flat[idx] = orig - h
            minus = loss_at()
            flat[idx] = orig
            numeric = (plus - minus) / (2.0 * h)
            denom = max(abs(gflat[idx]), abs(numeric), 1e-6)
            max_rel = max(max_rel, abs(gflat[idx] - numeric) / denom)
    return max_rel
