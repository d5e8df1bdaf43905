# MIT License
#
# Copyright (c) 2026 Aidnet Developers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.
"""
Linear layers, network assembly, forward and backward passes and losses.

A network is a chain ``linear -> block -> linear -> block -> ... -> linear``
where each block is the activation sequence of :func:`activations.hidden_block`.
The final linear layer produces logits and is never followed by an
activation.
"""
import copy
import dataclasses
import logging
import math

import numpy as np

from . import activations
from . import exceptions
from . import numkit

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class LinearLayer:
    """
    An affine map ``x -> x W^T + b`` together with the initial values of its
    parameters and the gradients of the most recent backward pass.
    """

    W: np.ndarray
    b: np.ndarray
    W0: np.ndarray = None
    b0: np.ndarray = None
    grad_W: np.ndarray = None
    grad_b: np.ndarray = None

    def __post_init__(self):
        self.W = np.array(self.W, dtype=numkit.DTYPE)
        self.b = np.array(self.b, dtype=numkit.DTYPE)
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[0],):
            raise exceptions.ShapeError(
                f"Incompatible weight {self.W.shape} and bias {self.b.shape}"
            )
        self.W0 = np.array(self.W if self.W0 is None else self.W0, dtype=numkit.DTYPE)
        self.b0 = np.array(self.b if self.b0 is None else self.b0, dtype=numkit.DTYPE)
        if self.W0.shape != self.W.shape or self.b0.shape != self.b.shape:
            raise exceptions.ShapeError("Initial parameters do not match the layer")
        self.W0.flags.writeable = False
        self.b0.flags.writeable = False
        self.grad_W = np.zeros_like(self.W)
        self.grad_b = np.zeros_like(self.b)

    @property
    def fan_in(self):
        return self.W.shape[1]

    @property
    def fan_out(self):
        return self.W.shape[0]

    def forward(self, x):
        if x.shape[-1] != self.fan_in:
            raise exceptions.ShapeError(
                f"Layer expects {self.fan_in} inputs, got {x.shape[-1]}"
            )
        return x @ self.W.T + self.b

    def parameters(self):
        return [self.W, self.b]

    def initial_parameters(self):
        return [self.W0, self.b0]

    def gradients(self):
        return [self.grad_W, self.grad_b]


def he_init(fan_in, fan_out, rng):
    """
    Returns a linear layer with weights drawn from ``N(0, 2 / fan_in)`` and
    zero biases.
    """
    if fan_in < 1 or fan_out < 1:
        raise ValueError(f"Layer dimensions must be positive, got {fan_in}x{fan_out}")
    W = rng.normal((fan_out, fan_in), scale=math.sqrt(2.0 / fan_in))
    return LinearLayer(W, np.zeros(fan_out))


@dataclasses.dataclass
class ForwardTrace:
    """
    Everything a forward pass retains: the input of every linear layer, the
    hidden preactivations and postactivations, and the activation caches.
    """

    mode: str
    inputs: list
    preactivations: list
    postactivations: list
    caches: list
    logits: np.ndarray
    network_id: int
    generation: int

    @property
    def features(self):
        """
        The penultimate feature matrix, the input of the logits layer.
        """
        return self.inputs[-1]


class Network:
    """
    A multilayer perceptron.

    :param list layers: The linear layers, first to last.
    :param ActivationSpec activation: The activation used at every hidden
        position.
    """

    def __init__(self, layers, activation):
        if len(layers) < 2:
            raise ValueError("A network needs at least one hidden layer")
        self.layers = list(layers)
        self.activation = activation
        self.blocks = [
            activations.hidden_block(activation) for _ in range(len(layers) - 1)
        ]
        factor = activation.width_factor
        for layer, following in zip(self.layers, self.layers[1:]):
            if following.fan_in != layer.fan_out * factor:
                raise exceptions.ShapeError(
                    f"Layer of width {layer.fan_out} with {activation.kind} "
                    f"cannot feed a layer with {following.fan_in} inputs"
                )
        self.generation = 0

    def __repr__(self):
        return f"Network(dims={self.dims}, activation={self.activation})"

    @property
    def dims(self):
        """
        The preactivation width of every linear layer, preceded by the input
        width.
        """
        return [self.layers[0].fan_in] + [layer.fan_out for layer in self.layers]

    @property
    def num_hidden(self):
        return len(self.layers) - 1

    def touch(self):
        """
        Marks the parameters as modified, invalidating earlier traces.
        """
        self.generation += 1

    def parameters(self):
        return [p for layer in self.layers for p in layer.parameters()]

    def initial_parameters(self):
        return [p for layer in self.layers for p in layer.initial_parameters()]

    def gradients(self):
        return [g for layer in self.layers for g in layer.gradients()]

    def parameter_count(self):
        return sum(p.size for p in self.parameters())

    def weight_norm(self):
        return math.sqrt(sum(numkit.frobenius_norm_sq(p) for p in self.parameters()))

    def is_finite(self):
        return all(np.all(np.isfinite(p)) for p in self.parameters())

    def clone(self):
        return copy.deepcopy(self)

    def reset_to_initial(self):
        for layer in self.layers:
            layer.W[:] = layer.W0
            layer.b[:] = layer.b0
        self.touch()


def hidden_width(width, spec):
    """
    Returns the preactivation width of a hidden layer with nominal width
    ``width`` for the given activation, before width matching.
    """
    return max(1, width // spec.width_factor)


def _count_parameters(input_width, widths, num_classes, factor):
    count = 0
    fan_in = input_width
    for width in widths:
        count += (fan_in + 1) * width
        fan_in = width * factor
    return count + (fan_in + 1) * num_classes


def matched_widths(input_width, widths, num_classes, spec):
    """
    Returns hidden preactivation widths for ``spec`` whose parameter count is
    as close as possible to a width-preserving network with ``widths``. All
    hidden widths are scaled by one common factor.
    """
    if spec.width_factor == 1:
        return list(widths)
    target = _count_parameters(input_width, widths, num_classes, 1)
    best = None
    for numerator in range(1, 2 * max(widths) + 1):
        scale = numerator / max(widths)
        candidate = [max(1, round(w * scale)) for w in widths]
        factor = spec.width_factor
        count = _count_parameters(input_width, candidate, num_classes, factor)
        if best is None or abs(count - target) < best[0]:
            best = (abs(count - target), candidate)
        if count > target:
            break
    return best[1]


def build_network(input_width, widths, num_classes, spec, rng, match_parameters=True):
    """
    Builds a He-initialised network with the given hidden widths. For
    activations that double their width the hidden widths are either matched
    to the parameter count of the width-preserving network
    (``match_parameters``) or halved.
    """
    if len(widths) < 1 or any(w < 1 for w in widths):
        raise ValueError(f"Hidden widths must be positive, got {widths}")
    if match_parameters:
        widths = matched_widths(input_width, widths, num_classes, spec)
    else:
        widths = [hidden_width(w, spec) for w in widths]
    layers = []
    fan_in = input_width
    for width in widths:
        layers.append(he_init(fan_in, width, rng))
        fan_in = width * spec.width_factor
    layers.append(he_init(fan_in, num_classes, rng))
    net = Network(layers, spec)
    logger.debug(f"Built {net} with {net.parameter_count()} parameters")
    return net


def forward(net, X, mode, rng=None):
    """
    Runs the network on the batch ``X`` and returns the logits and the
    :class:`ForwardTrace`.
    """
    X = np.asarray(X, dtype=numkit.DTYPE)
    if X.ndim != 2 or X.shape[1] != net.layers[0].fan_in:
        raise exceptions.ShapeError(
            f"Expected a batch with {net.layers[0].fan_in} columns, got {X.shape}"
        )
    inputs = []
    preactivations = []
    postactivations = []
    caches = []
    h = X
    for layer, block in zip(net.layers, net.blocks):
        inputs.append(h)
        h = layer.forward(h)
        preactivations.append(h)
        block_caches = []
        for stage in block:
            h, cache = stage.forward(h, mode, rng)
            block_caches.append(cache)
        caches.append(block_caches)
        postactivations.append(h)
    inputs.append(h)
    logits = net.layers[-1].forward(h)
    trace = ForwardTrace(
        mode=mode,
        inputs=inputs,
        preactivations=preactivations,
        postactivations=postactivations,
        caches=caches,
        logits=logits,
        network_id=id(net),
        generation=net.generation,
    )
    return logits, trace


def backward(net, trace, grad_logits):
    """
    Backpropagates ``grad_logits`` through the computation recorded in
    ``trace``, storing and returning the parameter gradients in the order of
    :meth:`Network.parameters`.
    """
    if trace.network_id != id(net) or trace.generation != net.generation:
        raise exceptions.StaleTraceError(
            "Trace was recorded on a different network or before the "
            "parameters were last modified"
        )
    if grad_logits.shape != trace.logits.shape:
        raise exceptions.ShapeError(
            f"Gradient shape {grad_logits.shape} does not match logits "
            f"{trace.logits.shape}"
        )
    g = grad_logits
    for index in reversed(range(len(net.layers))):
        layer = net.layers[index]
        x = trace.inputs[index]
        layer.grad_W = g.T @ x
        layer.grad_b = g.sum(axis=0)
        g = g @ layer.W
        if index > 0:
            block = net.blocks[index - 1]
            for stage, cache in zip(reversed(block), reversed(trace.caches[index - 1])):
                g = stage.backward(g, cache)
    return net.gradients()


def predict(net, X):
    """
    Returns the predicted class of every row of ``X`` in evaluation mode.
    """
    logits, _ = forward(net, X, activations.EVAL)
    return np.argmax(logits, axis=1)


def softmax_cross_entropy(logits, labels):
    """
    Returns the mean cross-entropy of the softmax of ``logits`` against the
    integer ``labels`` and its gradient with respect to the logits.
    """
    labels = np.asarray(labels)
    n, k = logits.shape
    if labels.shape != (n,):
        raise exceptions.ShapeError(f"Expected {n} labels, got shape {labels.shape}")
    if labels.size > 0 and (labels.min() < 0 or labels.max() >= k):
        raise exceptions.InvalidLabelError(
            f"Labels must lie in [0, {k}), got range [{labels.min()}, {labels.max()}]"
        )
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    log_probs = shifted - log_norm[:, None]
    rows = np.arange(n)
    loss = -log_probs[rows, labels].mean()
    grad = np.exp(log_probs)
    grad[rows, labels] -= 1.0
    return float(loss), grad / n


def mse(pred, target):
    """
    Returns the batch mean of the squared Euclidean error ``||pred - target||^2``
    and its gradient with respect to ``pred``.
    """
    if pred.shape != target.shape:
        raise exceptions.ShapeError(
            f"Prediction shape {pred.shape} does not match target {target.shape}"
        )
    diff = pred - target
    n = pred.shape[0]
    loss = float(np.sum(diff * diff) / n)
    return loss, 2.0 * diff / n
