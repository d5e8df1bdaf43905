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
Numerical certification of the regularisation properties of AID on bias
free two layer networks.

Expectations over the Bernoulli masks are computed exactly by enumerating
all ``2**n`` mask patterns of an ``n`` unit hidden layer, so the checks here
are limited to small widths.
"""
import dataclasses
import logging
import math

import numpy as np

from . import activations
from . import exceptions
from . import numkit

logger = logging.getLogger(__name__)

MAX_WIDTH = 16
MIN_PREACTIVATION = 1e-6
TOLERANCE = 1e-9
PROPERTY2_TOLERANCE = 1e-12
PROBABILITY_TOLERANCE = 1e-15

THEOREM_RATES = (0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9)
IDENTITY_RATES = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
COROLLARY_RATES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
HE_INIT_RATES = (0.1, 0.5, 0.9)
RELATION_RATES = (0.0, 0.1, 0.25, 0.5, 0.75, 0.9)

HE_INIT_SAMPLES = 10**6
HE_INIT_MOMENT_TOLERANCE = 0.02
HE_INIT_DERIVATIVE_TOLERANCE = 0.01

THEOREM1 = "theorem1"
IDENTITY = "identity"
COROLLARY1 = "corollary1"
PROPERTY2 = "property2"
RELATIONS = "relations"
HEINIT = "heinit"
SUITES = (THEOREM1, IDENTITY, COROLLARY1, PROPERTY2, RELATIONS, HEINIT)


@dataclasses.dataclass(frozen=True)
class TwoLayerInstance:
    """
    A bias free network ``x -> W2 act(W1 x)`` with square weights, one
    input ``x``, its target ``y`` and the AID coefficient ``p``.
    """

    W1: np.ndarray
    W2: np.ndarray
    x: np.ndarray
    y: np.ndarray
    p: float

    def __post_init__(self):
        for name in ("W1", "W2", "x", "y"):
            object.__setattr__(
                self, name, np.array(getattr(self, name), dtype=numkit.DTYPE)
            )
        n = self.x.shape[0]
        if self.x.shape != (n,) or self.y.shape != (n,):
            raise exceptions.ShapeError("x and y must be vectors of equal length")
        if self.W1.shape != (n, n) or self.W2.shape != (n, n):
            raise exceptions.ShapeError(f"Weights must be {n}x{n}")
        if not 1 <= n <= MAX_WIDTH:
            raise ValueError(f"Width must lie in [1, {MAX_WIDTH}], got {n}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def v(self):
        """
        The hidden preactivation ``W1 x``.
        """
        return self.W1 @ self.x

    @property
    def D(self):
        """
        The 0/1 indicator of the positive preactivations.
        """
        return (self.v > 0).astype(numkit.DTYPE)

    def loss(self, hidden):
        """
        Returns ``||W2 h - y||^2`` for every row ``h`` of ``hidden``.
        """
        residual = np.atleast_2d(hidden) @ self.W2.T - self.y
        return np.sum(residual * residual, axis=1)

    def scaled(self, c):
        return TwoLayerInstance(self.W1, c * self.W2, self.x, c * self.y, self.p)


def random_instance(n, p, rng):
    """
    Returns an instance with standard normal weights, input and target.
    Inputs producing a hidden preactivation within ``1e-6`` of zero are
    redrawn.
    """
    W1 = rng.normal((n, n))
    W2 = rng.normal((n, n))
    y = rng.normal(n)
    while True:
        x = rng.normal(n)
        if np.all(np.abs(W1 @ x) >= MIN_PREACTIVATION):
            return TwoLayerInstance(W1, W2, x, y, p)


def mask_patterns(n):
    """
    Returns the ``2**n`` by ``n`` boolean matrix of all mask patterns.
    """
    if not 1 <= n <= MAX_WIDTH:
        raise ValueError(f"Cannot enumerate {n} units; the limit is {MAX_WIDTH}")
    return ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(bool)


def _expected_loss(inst, first, second, first_prob):
    # Unit i independently takes first[i] with probability first_prob[i]
    # and second[i] otherwise.
    patterns = mask_patterns(inst.n)
    first_prob = np.broadcast_to(first_prob, (inst.n,))
    hidden = np.where(patterns, first, second)
    weights = np.prod(np.where(patterns, first_prob, 1.0 - first_prob), axis=1)
    return math.fsum(weights * inst.loss(hidden))


def exact_expected_aid_loss(inst):
    """
    The expected loss under training mode AID, where every unit applies
    ReLU with probability ``p`` and negative ReLU otherwise.
    """
    v = inst.v
    return _expected_loss(inst, activations.relu(v), activations.neg_relu(v), inst.p)


def exact_expected_interval_loss(inst, scheme):
    """
    The expected loss under the interval-wise dropout ``scheme``, where every
    unit is kept with the keep probability of its interval and zeroed
    otherwise.
    """
    v = inst.v
    keep = 1.0 - scheme.drop_probabilities(v)
    return _expected_loss(inst, v, np.zeros_like(v), keep)


def exact_expected_dropout_relu_loss(inst):
    """
    The expected loss of ReLU followed by inverted dropout with rate ``p``.
    """
    if inst.p >= 1.0:
        raise ValueError("Dropout rate must be below 1")
    kept = activations.relu(inst.v) * activations.inverted_scale(inst.p)
    return _expected_loss(inst, kept, np.zeros_like(kept), 1.0 - inst.p)


def monte_carlo_aid_loss(inst, samples, rng):
    """
    Estimates the expected AID loss from ``samples`` independent masks drawn
    by the training mode activation. Returns the mean and its standard error.
    """
    if samples < 2:
        raise ValueError("Need at least two samples")
    V = np.broadcast_to(inst.v, (samples, inst.n))
    hidden, _ = activations.aid_forward(V, inst.p, activations.TRAIN, rng)
    losses = inst.loss(hidden)
    return float(np.mean(losses)), float(np.std(losses, ddof=1) / math.sqrt(samples))


def rhs_components(inst):
    """
    Returns the modified leaky ReLU loss ``L_p``, the linearity penalty
    ``R_p`` and the coefficient ``4p(1-p) / (n (2p-1)^2)`` of the lower bound
    on the expected AID loss.

    :raises SingularCoefficientError: if ``p == 0.5``. The exact identity of
        :func:`verify_exact_identity` holds there instead.
    """
    p = inst.p
    if p == 0.5:
        raise exceptions.SingularCoefficientError(
            "The bound coefficient is singular at p = 0.5; "
            "use verify_exact_identity for this rate"
        )
    v = inst.v
    leaky = activations.mod_leaky_relu(v, p)
    L_p = float(inst.loss(leaky)[0])
    gap = inst.W2 @ (0.5 * v) - inst.W2 @ leaky
    R_p = numkit.frobenius_norm_sq(gap)
    coefficient = 4.0 * p * (1.0 - p) / (inst.n * (2.0 * p - 1.0) ** 2)
    return L_p, R_p, coefficient


def theorem1_bound(inst):
    """
    Returns the lower bound ``L_p + coefficient * R_p`` on the expected AID
    loss.
    """
    L_p, R_p, coefficient = rhs_components(inst)
    return L_p + coefficient * R_p


def verify_exact_identity(inst):
    """
    Returns the relative residual of the identity

    ``E[loss] = ||W2 S_p v - y||^2 + p (1 - p) ||W2 (I - 2D) diag(v)||_F^2``

    from which the lower bound is derived. It holds for every ``p``.
    """
    p = inst.p
    v = inst.v
    lhs = exact_expected_aid_loss(inst)
    leaky = activations.mod_leaky_relu(v, p)
    spread = inst.W2 @ np.diag((1.0 - 2.0 * inst.D) * v)
    rhs = float(inst.loss(leaky)[0]) + p * (1.0 - p) * numkit.frobenius_norm_sq(spread)
    return abs(lhs - rhs) / max(1.0, abs(lhs))


def corollary1_bound(inst):
    """
    Returns the lower bound on the expected loss of ReLU followed by dropout,
    ``||W2 r(v) - y||^2 + p / (n (1 - p)) ||W2 r(v)||^2``.
    """
    p = inst.p
    hidden = activations.relu(inst.v)
    penalty = numkit.frobenius_norm_sq(inst.W2 @ hidden)
    return float(inst.loss(hidden)[0]) + p / (inst.n * (1.0 - p)) * penalty


@dataclasses.dataclass
class SuiteReport:
    """
    The outcome of one verification suite. ``statistic`` is the worst value
    observed: the minimum slack for inequalities, the maximum residual or
    deviation for identities.
    """

    name: str
    trials: int
    statistic_name: str
    statistic: float
    violations: int

    @property
    def passed(self):
        return self.violations == 0

    def format(self):
        return (
            f"suite={self.name} trials={self.trials} "
            f"{self.statistic_name}={self.statistic:.6g} "
            f"violations={self.violations} passed={str(self.passed).lower()}"
        )

    def check(self):
        if not self.passed:
            raise exceptions.VerificationError(self.format())
        return self


def _trial_rng(seed, trial):
    return numkit.Rng(seed + trial)


def _draw_instance(rng, widths, rates):
    n = int(rng.integers(widths[0], widths[1] + 1))
    p = rates[int(rng.integers(0, len(rates)))]
    return random_instance(n, p, rng)


def verify_theorem1(trials, seed, widths=(2, 6), rates=THEOREM_RATES):
    """
    Checks the lower bound on the expected AID loss on ``trials`` random
    instances. Rates within 0.05 of 0.5 are rejected.
    """
    if any(abs(p - 0.5) < 0.05 for p in rates):
        raise ValueError("Rates within 0.05 of 0.5 are excluded from the bound")
    min_slack = math.inf
    violations = 0
    for trial in range(trials):
        inst = _draw_instance(_trial_rng(seed, trial), widths, rates)
        lhs = exact_expected_aid_loss(inst)
        slack = lhs - theorem1_bound(inst)
        min_slack = min(min_slack, slack)
        if slack < -TOLERANCE * max(1.0, abs(lhs)):
            violations += 1
            logger.warning(f"Bound violated by {-slack:.3g} on trial {trial}")
    return SuiteReport(THEOREM1, trials, "min_slack", min_slack, violations)


def identity_suite(trials, seed, widths=(2, 6), rates=IDENTITY_RATES):
    max_residual = 0.0
    violations = 0
    for trial in range(trials):
        inst = _draw_instance(_trial_rng(seed, trial), widths, rates)
        residual = verify_exact_identity(inst)
        max_residual = max(max_residual, residual)
        if residual > TOLERANCE:
            violations += 1
    return SuiteReport(IDENTITY, trials, "max_residual", max_residual, violations)


def verify_corollary1(trials, seed, widths=(2, 5), rates=COROLLARY_RATES):
    """
    Checks the lower bound on the expected loss of ReLU followed by dropout.
    """
    min_slack = math.inf
    violations = 0
    for trial in range(trials):
        inst = _draw_instance(_trial_rng(seed, trial), widths, rates)
        lhs = exact_expected_dropout_relu_loss(inst)
        slack = lhs - corollary1_bound(inst)
        min_slack = min(min_slack, slack)
        if slack < -TOLERANCE * max(1.0, abs(lhs)):
            violations += 1
    return SuiteReport(COROLLARY1, trials, "min_slack", min_slack, violations)


def verify_he_init(rates=HE_INIT_RATES, samples=HE_INIT_SAMPLES, seed=0):
    """
    Checks that for standard normal preactivations training mode AID has
    second moment one half and a derivative equal to one with probability
    one half, as ReLU does.
    """
    if samples < 10**5:
        raise ValueError(f"Need at least 100000 samples, got {samples}")
    worst = 0.0
    violations = 0
    for index, p in enumerate(rates):
        rng = numkit.Rng(seed, (index,))
        y = rng.normal(samples)
        out, cache = activations.aid_forward(y, p, activations.TRAIN, rng)
        moment = np.mean(out * out)
        derivative = np.mean(cache.mask == 1.0)
        moment_error = abs(moment - 0.5) / 0.5
        derivative_error = abs(derivative - 0.5) / 0.5
        worst = max(worst, moment_error, derivative_error)
        logger.info(f"p={p}: E[AID(y)^2]={moment:.5f} P(AID'(y)=1)={derivative:.5f}")
        if moment_error > HE_INIT_MOMENT_TOLERANCE:
            violations += 1
        if derivative_error > HE_INIT_DERIVATIVE_TOLERANCE:
            violations += 1
    return SuiteReport(HEINIT, len(rates), "max_rel_error", worst, violations)


class FixedDraw:
    """
    A stand-in random stream whose Bernoulli draws all equal ``outcome``.
    It records the success probabilities it was asked for, so that running
    an activation once per outcome enumerates its output distribution.
    """

    def __init__(self, outcome):
        self.outcome = outcome
        self.probabilities = None

    def bernoulli(self, p, shape):
        self.probabilities = np.broadcast_to(np.asarray(p, dtype=numkit.DTYPE), shape)
        return np.full(shape, float(self.outcome))


def output_distributions(forward, x):
    """
    Enumerates the output distribution of every element of ``x`` under the
    single-draw stochastic layer ``forward(x, rng)``. Returns one dict per
    element mapping output value to probability; impossible outcomes are
    omitted.
    """
    parts = [{} for _ in range(x.size)]
    for outcome in (0, 1):
        rng = FixedDraw(outcome)
        y = forward(x, rng)
        if rng.probabilities is None:
            probs = np.full(x.shape, float(outcome))
        elif outcome == 1:
            probs = rng.probabilities
        else:
            probs = 1.0 - rng.probabilities
        for part, value, prob in zip(parts, y.ravel(), np.ravel(probs)):
            if prob > 0:
                part.setdefault(float(value), []).append(float(prob))
    return [{value: math.fsum(ps) for value, ps in part.items()} for part in parts]


def _distribution_mismatches(a, b, tolerance=PROBABILITY_TOLERANCE):
    mismatches = 0
    for da, db in zip(a, b):
        if da.keys() != db.keys() or any(
            abs(da[value] - db[value]) > tolerance for value in da
        ):
            mismatches += 1
    return mismatches


def _train(kind, **params):
    spec = activations.ActivationSpec(kind, **params)

    def forward(x, rng):
        return activations.activation_forward(x, spec, activations.TRAIN, rng)[0]

    return forward


def relation_pairs(p):
    """
    Returns ``(name, left, right)`` triples of stochastic layers that must
    produce identical output distributions in training mode at rate ``p``.
    """
    scale = activations.inverted_scale(p) if p < 1 else None
    relu = _train(activations.RELU)
    pairs = [
        ("relu", relu, _train(activations.AID_PQ, p=0.0, q=1.0)),
        (
            "droprelu",
            _train(activations.DROPRELU, p=p),
            _train(activations.AID_PQ, p=0.0, q=p),
        ),
    ]
    if scale is not None:
        aid_pp = _train(activations.AID_PQ, p=p, q=p)
        aid_p1 = _train(activations.AID_PQ, p=p, q=1.0)
        dropout = _train(activations.DROPOUT, p=p)
        pairs.append(("dropout", dropout, lambda x, rng: aid_pp(x, rng) * scale))
        pairs.append(
            (
                "dropout_relu",
                lambda x, rng: dropout(relu(x, rng), rng),
                lambda x, rng: aid_p1(x, rng) * scale,
            )
        )
    return pairs


def verify_relations(rates=RELATION_RATES, x=None, seed=0):
    """
    Checks that in training mode AID with two intervals split at zero
    reproduces ReLU, dropout, ReLU followed by dropout and DropReLU. Output
    values must agree exactly; probabilities may differ by the rounding of
    ``1 - p``.
    """
    if x is None:
        fixed = np.array([-3.0, -1.0, -0.25, 0.0, 0.25, 1.0, 3.0])
        x = np.concatenate([fixed, numkit.Rng(seed).normal(9)])
    checks = 0
    mismatches = 0
    for p in rates:
        for name, left, right in relation_pairs(p):
            found = _distribution_mismatches(
                output_distributions(left, x), output_distributions(right, x)
            )
            checks += x.size
            if found > 0:
                logger.warning(f"{name} relation fails at p={p} on {found} elements")
            mismatches += found
    return SuiteReport(RELATIONS, checks, "mismatches", mismatches, mismatches)


def verify_property2(trials, seed, widths=(2, 6), rates=IDENTITY_RATES):
    """
    Checks that AID, which drops positive values with rate ``1 - p`` and
    negative values with rate ``p``, is the same as applying ReLU with
    probability ``p`` and negative ReLU otherwise: per element, and for the
    expected loss of random instances.
    """
    worst = 0.0
    violations = 0
    for trial in range(trials):
        inst = _draw_instance(_trial_rng(seed, trial), widths, rates)
        p = inst.p
        v = inst.v.reshape(1, -1)
        scheme = activations.aid_pq_scheme(1.0 - p, p)
        simplified = output_distributions(
            lambda x, rng: activations.aid_forward(x, p, activations.TRAIN, rng)[0], v
        )
        interval = output_distributions(
            lambda x, rng: activations.aid_general_forward(
                x, scheme, activations.TRAIN, rng
            )[0],
            v,
        )
        element_mismatches = _distribution_mismatches(simplified, interval)
        expected = exact_expected_aid_loss(inst)
        difference = abs(expected - exact_expected_interval_loss(inst, scheme))
        relative = difference / max(1.0, abs(expected))
        worst = max(worst, relative)
        if element_mismatches > 0 or relative > PROPERTY2_TOLERANCE:
            violations += 1
    return SuiteReport(PROPERTY2, trials, "max_residual", worst, violations)


def run_suites(names, trials, seed):
    """
    Runs the named suites (``"all"`` expands to every suite) and returns
    their reports in order.
    """
    if "all" in names:
        names = SUITES
    reports = []
    for name in names:
        logger.info(f"Running suite {name}")
        if name == THEOREM1:
            reports.append(verify_theorem1(trials, seed))
        elif name == IDENTITY:
            reports.append(identity_suite(trials, seed))
        elif name == COROLLARY1:
            reports.append(verify_corollary1(trials, seed))
        elif name == PROPERTY2:
            reports.append(verify_property2(trials, seed))
        elif name == RELATIONS:
            reports.append(verify_relations(seed=seed))
        elif name == HEINIT:
            reports.append(verify_he_init(seed=seed))
        else:
            raise ValueError(f"Unknown suite '{name}'")
    return reports
