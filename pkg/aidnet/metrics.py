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
Plasticity diagnostics: accuracy, the dormant neuron ratio, the effective
rank of the penultimate features and the average unit sign entropy.
"""
import dataclasses
import logging
import math

import numpy as np

from . import activations
from . import nn
from . import numkit

logger = logging.getLogger(__name__)

TRAIN_SPLIT = "train"
TEST_SPLIT = "test"
SPLITS = (TRAIN_SPLIT, TEST_SPLIT)

DEFAULT_TAU = 0.0
DEFAULT_DELTA = 0.01

EXTENDED_FIELDS = ("sign_shannon_entropy", "weight_norm", "loss")


@dataclasses.dataclass(frozen=True)
class MetricsRecord:
    """
    The measurements taken on one split at the end of one task (or epoch).
    The extended fields are None unless extended metrics were requested or
    could not be computed.
    """

    task: int
    epoch: int
    split: str
    accuracy: float
    dormant_ratio: float
    srank: int
    sign_entropy: float
    sign_shannon_entropy: float = None
    weight_norm: float = None
    loss: float = None
    diverged: bool = False

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"Unknown split '{self.split}'")
        if self.task < 0 or self.epoch < 0:
            raise ValueError("Task and epoch indexes must be non-negative")
        for name in ("accuracy", "dormant_ratio"):
            value = getattr(self, name)
            if not (math.isfinite(value) and 0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if not (math.isfinite(self.sign_entropy) and -1.0 <= self.sign_entropy <= 1.0):
            raise ValueError(f"sign_entropy out of range: {self.sign_entropy}")
        if self.srank < 0:
            raise ValueError(f"srank must be non-negative, got {self.srank}")
        for name in EXTENDED_FIELDS:
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")

    @classmethod
    def diverged_task(cls, task, epoch, split):
        """
        The record of a task whose training produced non-finite values. The
        measured columns hold placeholder values and ``diverged`` is set.
        """
        return cls(task, epoch, split, 0.0, 1.0, 0, 0.0, diverged=True)


def neuron_scores(post):
    """
    Returns the normalised activation score of every unit: its mean absolute
    activation over the batch divided by the mean of that quantity over the
    layer. A layer whose units are all silent scores zero everywhere.
    """
    post = np.asarray(post, dtype=numkit.DTYPE)
    if post.ndim != 2 or post.shape[0] == 0:
        raise ValueError(f"Expected a non-empty batch of activations, got {post.shape}")
    mean_abs = np.mean(np.abs(post), axis=0)
    denominator = np.mean(mean_abs)
    if denominator == 0:
        return np.zeros_like(mean_abs)
    return mean_abs / denominator


def dormant_ratio(postactivations, tau=DEFAULT_TAU):
    """
    Returns the fraction of hidden units, over all given layers, whose
    score is at most ``tau``.
    """
    if len(postactivations) == 0:
        raise ValueError("Need at least one hidden layer")
    if tau < 0:
        raise ValueError(f"Dormancy threshold must be >= 0, got {tau}")
    dormant = 0
    total = 0
    for post in postactivations:
        scores = neuron_scores(post)
        dormant += int(np.sum(scores <= tau))
        total += scores.size
    return dormant / total


def _stack_units(preactivations):
    if isinstance(preactivations, np.ndarray):
        preactivations = [preactivations]
    units = np.concatenate([np.asarray(h) for h in preactivations], axis=1)
    if units.shape[0] == 0:
        raise ValueError("Sign entropy needs a non-empty batch")
    return units


def avg_sign_entropy(preactivations):
    """
    Returns the mean over all units of the batch-mean sign of their
    preactivation, with ``sign(0) = 0``.
    """
    units = _stack_units(preactivations)
    return float(np.mean(np.mean(np.sign(units), axis=0)))


def sign_shannon_entropy(preactivations):
    """
    Returns the mean over all units of the binary entropy, in bits, of the
    event that the unit's preactivation is positive.
    """
    units = _stack_units(preactivations)
    p = np.mean(units > 0, axis=0)
    entropy = np.zeros_like(p)
    inside = (p > 0) & (p < 1)
    q = p[inside]
    entropy[inside] = -(q * np.log2(q) + (1 - q) * np.log2(1 - q))
    return float(np.mean(entropy))


def effective_rank(features, delta=DEFAULT_DELTA):
    """
    Returns the smallest number of leading singular values of ``features``
    whose sum reaches ``1 - delta`` of the total. A matrix without any
    singular value mass has effective rank 0.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    sv = numkit.singular_values(features)
    total = np.sum(sv)
    if total == 0:
        logger.warning("Feature matrix is all zero; effective rank is 0")
        return 0
    crossed = np.cumsum(sv) >= (1.0 - delta) * total
    return int(np.sum(~crossed)) + 1


def accuracy(logits, labels):
    labels = np.asarray(labels)
    if labels.size == 0:
        return 0.0
    return float(np.mean(np.argmax(logits, axis=1) == labels))


def measure(
    net,
    X,
    labels,
    task,
    epoch,
    split=TRAIN_SPLIT,
    probe=None,
    tau=DEFAULT_TAU,
    delta=DEFAULT_DELTA,
    extended=False,
):
    """
    Evaluates ``net`` in evaluation mode and returns a :class:`MetricsRecord`.
    Accuracy and loss use every row of ``X``; the dormant ratio, effective
    rank and sign entropies use the probe inputs ``probe`` (``X`` if None).

    :raises NonFiniteError: if the network produces non-finite outputs.
    """
    logits, trace = nn.forward(net, X, activations.EVAL)
    numkit.check_finite(logits, "logits")
    if probe is not None:
        _, trace = nn.forward(net, probe, activations.EVAL)
    extra = {}
    if extended:
        extra = {
            "sign_shannon_entropy": sign_shannon_entropy(trace.preactivations),
            "weight_norm": net.weight_norm(),
            "loss": nn.softmax_cross_entropy(logits, labels)[0],
        }
    return MetricsRecord(
        task=task,
        epoch=epoch,
        split=split,
        accuracy=accuracy(logits, labels),
        dormant_ratio=dormant_ratio(trace.postactivations, tau),
        srank=effective_rank(trace.features, delta),
        sign_entropy=avg_sign_entropy(trace.preactivations),
        **extra,
    )
