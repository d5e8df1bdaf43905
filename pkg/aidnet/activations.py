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
Activation and stochastic masking layers.

Every elementwise kind is realised as ``y = x * mask`` where ``mask`` holds
the multiplier actually applied to each element: a sampled 0/1 keep
indicator for the dropout family in training mode, a sampled slope for
RReLU, and a deterministic slope in evaluation mode. The mask is kept in a
:class:`MaskCache` so that the backward pass differentiates exactly the
sampled linear map. CReLU and Fourier features double the width and keep
their input instead.

Elements equal to zero belong to the non-negative interval throughout.
"""
import dataclasses
import logging
import math

import numpy as np

from . import exceptions

logger = logging.getLogger(__name__)

TRAIN = "train"
EVAL = "eval"
MODES = (TRAIN, EVAL)

IDENTITY = "identity"
RELU = "relu"
NEG_RELU = "negrelu"
MOD_LEAKY_RELU = "modleakyrelu"
AID = "aid"
AID_GENERAL = "aid_general"
AID_PQ = "aid_pq"
DROPOUT = "dropout"
DROPRELU = "droprelu"
RRELU = "rrelu"
CRELU = "crelu"
FOURIER = "fourier"

KINDS = (
    IDENTITY,
    RELU,
    NEG_RELU,
    MOD_LEAKY_RELU,
    AID,
    AID_GENERAL,
    AID_PQ,
    DROPOUT,
    DROPRELU,
    RRELU,
    CRELU,
    FOURIER,
)
WIDTH_DOUBLING = (CRELU, FOURIER)
STOCHASTIC = (AID, AID_GENERAL, AID_PQ, DROPOUT, DROPRELU, RRELU)


def _check_probability(name, value, upper_open=False):
    if value is None or not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be a probability in [0, 1], got {value}")
    if upper_open and value == 1.0:
        raise ValueError(f"{name} must be strictly less than 1")


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"Mode must be one of {MODES}, got '{mode}'")


@dataclasses.dataclass(frozen=True)
class IntervalScheme:
    """
    A partition of the real line into half-open intervals
    ``(-inf, b_1), [b_1, b_2), ..., [b_{k-1}, inf)`` with one drop
    probability per interval.
    """

    boundaries: tuple
    probs: tuple

    def __post_init__(self):
        boundaries = tuple(float(b) for b in self.boundaries)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "boundaries", boundaries)
        object.__setattr__(self, "probs", probs)
        if len(probs) != len(boundaries) + 1:
            raise ValueError(
                f"{len(boundaries)} boundaries define {len(boundaries) + 1} "
                f"intervals but {len(probs)} probabilities were given"
            )
        if not all(math.isfinite(b) for b in boundaries):
            raise ValueError("Interval boundaries must be finite")
        if any(b2 <= b1 for b1, b2 in zip(boundaries, boundaries[1:])):
            raise ValueError("Interval boundaries must be strictly increasing")
        for p in probs:
            _check_probability("Interval drop probability", p)

    @property
    def num_intervals(self):
        return len(self.probs)

    def interval_index(self, x):
        """
        Returns the index of the interval containing each element of ``x``.
        """
        return np.searchsorted(np.array(self.boundaries), x, side="right")

    def drop_probabilities(self, x):
        return np.array(self.probs)[self.interval_index(x)]


@dataclasses.dataclass(frozen=True)
class ActivationSpec:
    """
    Description of the activation used at every hidden position of a
    network. Only the parameters relevant to ``kind`` are meaningful:

    - ``p``: AID coefficient, Dropout/DropReLU rate, or the positive-side
      drop rate of ``aid_pq``
    - ``q``: negative-side drop rate of ``aid_pq``
    - ``alpha``: slope parameter of the modified leaky ReLU
    - ``lower``/``upper``: RReLU slope bounds
    - ``scheme``: the :class:`IntervalScheme` of general AID
    """

    kind: str
    p: float = None
    q: float = None
    alpha: float = None
    lower: float = None
    upper: float = None
    scheme: IntervalScheme = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"Unknown activation kind '{self.kind}'")
        if self.kind in (AID, DROPRELU, AID_PQ):
            _check_probability(f"{self.kind} p", self.p)
        if self.kind == DROPOUT:
            _check_probability("Dropout rate", self.p, upper_open=True)
        if self.kind == AID_PQ:
            _check_probability("aid_pq q", self.q)
        if self.kind == MOD_LEAKY_RELU and (
            self.alpha is None or not math.isfinite(self.alpha)
        ):
            raise ValueError("Modified leaky ReLU requires a finite alpha")
        if self.kind == RRELU:
            if (
                self.lower is None
                or self.upper is None
                or not 0.0 <= self.lower <= self.upper <= 1.0
            ):
                raise ValueError(
                    "RReLU requires 0 <= lower <= upper <= 1, got "
                    f"lower={self.lower} upper={self.upper}"
                )
        if self.kind == AID_GENERAL and not isinstance(self.scheme, IntervalScheme):
            raise ValueError("General AID requires an IntervalScheme")

    @property
    def width_factor(self):
        return 2 if self.kind in WIDTH_DOUBLING else 1

    @property
    def is_stochastic(self):
        return self.kind in STOCHASTIC

    def asdict(self):
        d = {"kind": self.kind}
        for name in ["p", "q", "alpha", "lower", "upper"]:
            value = getattr(self, name)
            if value is not None:
                d[name] = value
        if self.scheme is not None:
            d["scheme"] = {
                "boundaries": list(self.scheme.boundaries),
                "probs": list(self.scheme.probs),
            }
        return d

    @classmethod
    def fromdict(cls, d):
        d = dict(d)
        scheme = d.pop("scheme", None)
        if scheme is not None:
            scheme = IntervalScheme(scheme["boundaries"], scheme["probs"])
        return cls(scheme=scheme, **d)

    def __str__(self):
        params = ", ".join(f"{k}={v}" for k, v in self.asdict().items() if k != "kind")
        return f"{self.kind}({params})"


@dataclasses.dataclass
class MaskCache:
    """
    State saved by a forward pass for the matching backward pass.
    """

    kind: str
    mode: str
    mask: np.ndarray = None
    x: np.ndarray = None


def relu(x):
    return np.maximum(x, 0.0)


def neg_relu(x):
    return -relu(-x)


def slope(x, alpha):
    """
    Returns the per-element slope of the modified leaky ReLU: ``alpha`` on
    the non-negative side and ``1 - alpha`` on the negative side.
    """
    return np.where(x >= 0, alpha, 1.0 - alpha)


def mod_leaky_relu(x, alpha):
    """
    The modified leaky ReLU ``x / 2 + (alpha - 1/2) |x|``, evaluated as
    ``x`` times its per-side slope.
    """
    return x * slope(x, alpha)


def inverted_scale(p):
    """
    The train-time rescaling of inverted dropout with rate ``p``.
    """
    return 1.0 / (1.0 - p)


def aid_general_forward(x, scheme, mode, rng=None):
    """
    Interval-wise dropout: each element is kept with the keep probability
    ``1 - p_j`` of the interval it falls in during training, and scaled by
    ``1 - p_j`` during evaluation.
    """
    _check_mode(mode)
    keep = 1.0 - scheme.drop_probabilities(x)
    if mode == TRAIN:
        mask = rng.bernoulli(keep, x.shape)
    else:
        mask = keep
    return x * mask, MaskCache(AID_GENERAL, mode, mask=mask)


def aid_pq_scheme(p, q):
    """
    Returns the two-interval scheme split at zero that drops non-negative
    values with probability ``p`` and negative values with probability ``q``.
    """
    return IntervalScheme((0.0,), (q, p))


def aid_forward(x, p, mode, rng=None):
    """
    Simplified AID. In training a Bernoulli(p) mask selects ReLU where it is
    one and negative ReLU where it is zero; in evaluation the modified leaky
    ReLU with ``alpha = p`` is applied.
    """
    _check_mode(mode)
    _check_probability("AID p", p)
    if mode == TRAIN:
        m = rng.bernoulli(p, x.shape)
        y = m * relu(x) + (1.0 - m) * neg_relu(x)
        mask = np.where(x >= 0, m, 1.0 - m)
    else:
        mask = slope(x, p)
        y = x * mask
    return y, MaskCache(AID, mode, mask=mask)


def dropout_forward(x, p, mode, rng=None):
    """
    Inverted dropout: kept elements are divided by ``1 - p`` during training
    and the layer is the identity during evaluation.
    """
    _check_mode(mode)
    _check_probability("Dropout rate", p, upper_open=True)
    if mode == TRAIN:
        mask = rng.bernoulli(1.0 - p, x.shape) * inverted_scale(p)
    else:
        mask = np.ones_like(x)
    return x * mask, MaskCache(DROPOUT, mode, mask=mask)


def droprelu_forward(x, p, mode, rng=None):
    """
    DropReLU: ReLU with probability ``p`` and the identity otherwise during
    training; negative values are scaled by ``1 - p`` during evaluation.
    """
    _check_mode(mode)
    _check_probability("DropReLU p", p)
    if mode == TRAIN:
        m = rng.bernoulli(p, x.shape)
        mask = np.where(x >= 0, 1.0, 1.0 - m)
    else:
        mask = np.where(x >= 0, 1.0, 1.0 - p)
    return x * mask, MaskCache(DROPRELU, mode, mask=mask)


def rrelu_forward(x, lower, upper, mode, rng=None):
    """
    Randomised leaky ReLU: negative values are multiplied by a slope drawn
    uniformly from ``[lower, upper]`` in training and by the mean slope in
    evaluation.
    """
    _check_mode(mode)
    if mode == TRAIN:
        negative_slope = rng.uniform(x.shape, lower, upper)
    else:
        negative_slope = (lower + upper) / 2
    mask = np.where(x >= 0, 1.0, negative_slope)
    return x * mask, MaskCache(RRELU, mode, mask=mask)


def crelu_forward(x, mode=EVAL):
    y = np.concatenate([relu(x), relu(-x)], axis=-1)
    return y, MaskCache(CRELU, mode, x=x)


def fourier_forward(x, mode=EVAL):
    y = np.concatenate([np.sin(x), np.cos(x)], axis=-1)
    return y, MaskCache(FOURIER, mode, x=x)


def _deterministic_forward(x, kind, mask, mode):
    return x * mask, MaskCache(kind, mode, mask=mask)


def activation_forward(x, spec, mode, rng=None):
    """
    Applies the activation described by ``spec`` to ``x``. The ``rng`` is
    only consumed by stochastic kinds in training mode, which require it.
    """
    _check_mode(mode)
    if mode == TRAIN and spec.is_stochastic and rng is None:
        raise ValueError(f"Training mode {spec.kind} needs a random stream")
    kind = spec.kind
    if kind == IDENTITY:
        return _deterministic_forward(x, kind, np.ones_like(x), mode)
    if kind == RELU:
        return _deterministic_forward(x, kind, slope(x, 1.0), mode)
    if kind == NEG_RELU:
        return _deterministic_forward(x, kind, slope(x, 0.0), mode)
    if kind == MOD_LEAKY_RELU:
        return _deterministic_forward(x, kind, slope(x, spec.alpha), mode)
    if kind == AID:
        return aid_forward(x, spec.p, mode, rng)
    if kind == AID_GENERAL:
        return aid_general_forward(x, spec.scheme, mode, rng)
    if kind == AID_PQ:
        y, cache = aid_general_forward(x, aid_pq_scheme(spec.p, spec.q), mode, rng)
        cache.kind = AID_PQ
        return y, cache
    if kind == DROPOUT:
        return dropout_forward(x, spec.p, mode, rng)
    if kind == DROPRELU:
        return droprelu_forward(x, spec.p, mode, rng)
    if kind == RRELU:
        return rrelu_forward(x, spec.lower, spec.upper, mode, rng)
    if kind == CRELU:
        return crelu_forward(x, mode)
    assert kind == FOURIER
    return fourier_forward(x, mode)


def activation_backward(grad_y, cache):
    """
    Returns the gradient with respect to the input of the forward pass that
    produced ``cache``, holding any sampled mask fixed.
    """
    if cache.kind in WIDTH_DOUBLING:
        x = cache.x
        if grad_y.shape != x.shape[:-1] + (2 * x.shape[-1],):
            raise exceptions.ShapeError(
                f"Gradient shape {grad_y.shape} does not match cached input "
                f"{x.shape} for {cache.kind}"
            )
        n = x.shape[-1]
        g_first = grad_y[..., :n]
        g_second = grad_y[..., n:]
        if cache.kind == CRELU:
            return g_first * (x > 0) - g_second * (x < 0)
        return g_first * np.cos(x) - g_second * np.sin(x)
    if grad_y.shape != cache.mask.shape:
        raise exceptions.ShapeError(
            f"Gradient shape {grad_y.shape} does not match mask {cache.mask.shape}"
        )
    return grad_y * cache.mask


class ActivationLayer:
    """
    A single activation stage of a network. Layers are stateless apart from
    their spec; the per-call state lives in the returned cache.
    """

    def __init__(self, spec):
        self.spec = spec

    def __repr__(self):
        return f"ActivationLayer({self.spec})"

    def output_width(self, width):
        return width * self.spec.width_factor

    def forward(self, x, mode, rng=None):
        return activation_forward(x, self.spec, mode, rng)

    def backward(self, grad_y, cache):
        return activation_backward(grad_y, cache)


def hidden_block(spec):
    """
    Returns the sequence of activation layers placed after every hidden
    linear layer. The Dropout method is ReLU followed by a Dropout layer;
    every other kind is a single layer.
    """
    if spec.kind == DROPOUT:
        return [ActivationLayer(ActivationSpec(RELU)), ActivationLayer(spec)]
    return [ActivationLayer(spec)]
