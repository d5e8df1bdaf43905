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
Optimizers, weight regularizers and the task-boundary interventions
Shrink & Perturb and ReDo.
"""
import dataclasses
import logging
import math

import numpy as np

from . import activations
from . import metrics
from . import nn

logger = logging.getLogger(__name__)

SGD = "sgd"
ADAM = "adam"

NO_REGULARIZER = "none"
L2 = "l2"
L2_INIT = "l2_init"

DEFAULT_LEARNING_RATES = {SGD: 3e-2, ADAM: 1e-3}


@dataclasses.dataclass(frozen=True)
class RegularizerSpec:
    kind: str = NO_REGULARIZER
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in (NO_REGULARIZER, L2, L2_INIT):
            raise ValueError(f"Unknown regularizer '{self.kind}'")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"Regularization strength must be >= 0, got {self.lam}")

    def gradient(self, param, initial):
        """
        Returns the gradient of the penalty for one parameter, or None if
        there is nothing to add.
        """
        if self.kind == L2:
            return self.lam * param
        if self.kind == L2_INIT:
            return self.lam * (param - initial)
        return None


@dataclasses.dataclass
class OptimizerState:
    """
    SGD or Adam with bias-corrected moments. Moment buffers are allocated
    lazily on the first step to match the parameters they follow.
    """

    kind: str = ADAM
    lr: float = None
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: list = None
    v: list = None
    t: int = 0

    def __post_init__(self):
        if self.kind not in (SGD, ADAM):
            raise ValueError(f"Unknown optimizer '{self.kind}'")
        if self.lr is None:
            self.lr = DEFAULT_LEARNING_RATES[self.kind]
        if not (math.isfinite(self.lr) and self.lr > 0):
            raise ValueError(f"Learning rate must be positive, got {self.lr}")

    def reset_state(self):
        """
        Clears the moment estimates and the step counter.
        """
        self.m = None
        self.v = None
        self.t = 0

    def reset_moments(self, index, mask):
        """
        Zeros the moment entries of parameter ``index`` selected by ``mask``.
        """
        if self.m is not None:
            self.m[index][mask] = 0.0
            self.v[index][mask] = 0.0


def step(opt, params, grads, reg=None, initial=None):
    """
    Applies one optimizer update in place to ``params`` using ``grads`` plus
    the regularizer gradient, and returns ``params``.
    """
    if len(params) != len(grads):
        raise ValueError(f"Got {len(params)} parameters but {len(grads)} gradients")
    if reg is None:
        reg = RegularizerSpec()
    if initial is None:
        initial = [None] * len(params)
    effective = []
    for param, grad, param0 in zip(params, grads, initial):
        if param.shape != grad.shape:
            raise ValueError(f"Gradient {grad.shape} does not match {param.shape}")
        extra = reg.gradient(param, param0)
        effective.append(grad if extra is None else grad + extra)
    opt.t += 1
    if opt.kind == SGD:
        for param, grad in zip(params, effective):
            param -= opt.lr * grad
        return params
    if opt.m is None:
        opt.m = [np.zeros_like(p) for p in params]
        opt.v = [np.zeros_like(p) for p in params]
    correction1 = 1.0 - opt.beta1**opt.t
    correction2 = 1.0 - opt.beta2**opt.t
    for param, grad, m, v in zip(params, effective, opt.m, opt.v):
        m *= opt.beta1
        m += (1.0 - opt.beta1) * grad
        v *= opt.beta2
        v += (1.0 - opt.beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        param -= opt.lr * m_hat / (np.sqrt(v_hat) + opt.eps)
    return params


def apply_step(opt, net, reg=None):
    """
    Updates the network parameters from the gradients of its last backward
    pass.
    """
    step(opt, net.parameters(), net.gradients(), reg, net.initial_parameters())
    net.touch()


@dataclasses.dataclass(frozen=True)
class StepDecay:
    """
    Learning rate schedule dividing the base rate by ``factor`` at each of
    the listed epochs.
    """

    milestones: tuple = ()
    factor: float = 10.0

    def learning_rate(self, base_lr, epoch):
        passed = sum(1 for milestone in self.milestones if epoch >= milestone)
        return base_lr / self.factor**passed


def shrink_perturb(net, lam):
    """
    Blends every parameter toward its initial value,
    ``theta <- (1 - lam) theta + lam theta_0``.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"Shrink & Perturb coefficient must lie in [0, 1], got {lam}")
    for param, param0 in zip(net.parameters(), net.initial_parameters()):
        param *= 1.0 - lam
        param += lam * param0
    net.touch()
    return net


def redo_reset(net, X, tau, rng, opt=None):
    """
    Recycles dormant hidden units. Every unit whose normalized activation
    score on the batch ``X`` is at most ``tau`` gets fresh He-initialised
    incoming weights, a zero bias and zero outgoing weights. If ``opt`` is
    given the corresponding moment estimates are cleared as well.

    Returns the network and the number of units reset in each hidden layer.
    """
    if tau < 0:
        raise ValueError(f"Dormancy threshold must be >= 0, got {tau}")
    _, trace = nn.forward(net, X, activations.EVAL)
    factor = net.activation.width_factor
    counts = []
    for index, post in enumerate(trace.postactivations):
        dormant = metrics.neuron_scores(post) <= tau
        layer = net.layers[index]
        following = net.layers[index + 1]
        width = layer.fan_out
        # A unit is recycled only when all of its outputs are dormant.
        units = np.all(dormant.reshape(factor, width), axis=0)
        columns = np.tile(units, factor)
        count = int(units.sum())
        counts.append(count)
        if count == 0:
            continue
        fresh = rng.normal((count, layer.fan_in), scale=math.sqrt(2.0 / layer.fan_in))
        layer.W[units] = fresh
        layer.b[units] = 0.0
        following.W[:, columns] = 0.0
        if opt is not None:
            w_index = 2 * index
            opt.reset_moments(w_index, units)
            opt.reset_moments(w_index + 1, units)
            opt.reset_moments(w_index + 2, (slice(None), columns))
    net.touch()
    logger.debug(f"ReDo reset {counts} units (tau={tau})")
    return net, counts
