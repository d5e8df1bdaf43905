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
Experiment configuration, the continual training loop and CSV output.
"""
import csv
import dataclasses
import logging
import math
import os
import pathlib
import tempfile
import time

import humanize
import numpy as np

from . import activations
from . import exceptions
from . import metrics
from . import nn
from . import numkit
from . import optim
from . import tasks

logger = logging.getLogger(__name__)

NO_INTERVENTION = "none"
SHRINK_PERTURB = "shrink_perturb"
REDO = "redo"
FULL_RESET = "full_reset"
INTERVENTIONS = (NO_INTERVENTION, SHRINK_PERTURB, REDO, FULL_RESET)

DEFAULT_ACTIVATION_P = {
    activations.AID: 0.9,
    activations.AID_PQ: 0.1,
    activations.DROPOUT: 0.1,
    activations.DROPRELU: 0.1,
    activations.MOD_LEAKY_RELU: 0.9,
}
DEFAULT_ACTIVATION_Q = 0.9

CSV_FIELDS = (
    "task",
    "epoch",
    "split",
    "accuracy",
    "dormant_ratio",
    "srank",
    "sign_entropy",
)
INT_FIELDS = ("task", "epoch", "srank")
# Appended when any record of a run diverged.
DIVERGED_FIELD = "diverged"

# Config keys that differ from the field they set.
KEY_ALIASES = {"lambda": "lam"}
FIELD_KEYS = {field: key for key, field in KEY_ALIASES.items()}

TRUE_WORDS = ("true", "yes", "on", "1")
FALSE_WORDS = ("false", "no", "off", "0")
NONE_WORDS = ("", "none", "default")


def _parse_bool(text):
    word = text.strip().lower()
    if word in TRUE_WORDS:
        return True
    if word in FALSE_WORDS:
        return False
    raise ValueError(f"expected a boolean, got '{text}'")


def _parse_tuple(convert):
    def parse(text):
        return tuple(convert(part) for part in text.split(",") if part.strip())

    return parse


def _parse_optional(convert):
    def parse(text):
        if text.strip().lower() in NONE_WORDS:
            return None
        return convert(text)

    return parse


def _parse_reset(text):
    if text.strip().lower() == "auto":
        return None
    return _parse_bool(text)


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """
    Every setting of a continual training run. Instances are validated on
    construction; see ``docs/config.md`` for the file format and defaults.
    """

    dataset: str = "synth:10x160x784"
    stream: str = tasks.RANDOM_LABEL
    tasks: int = 10
    widths: tuple = (100, 100, 100)
    activation: str = activations.RELU
    activation_p: float = None
    activation_q: float = None
    rrelu_lower: float = 1.0 / 8
    rrelu_upper: float = 1.0 / 3
    aid_boundaries: tuple = ()
    aid_probs: tuple = ()
    optimizer: str = optim.ADAM
    lr: float = None
    regularizer: str = optim.NO_REGULARIZER
    lam: float = 0.0
    intervention: str = NO_INTERVENTION
    sp_lambda: float = 0.2
    redo_tau: float = 0.0
    epochs: int = 1
    batch: int = 64
    seed: int = 42
    probe_batch: int = 512
    reset_optimizer: bool = None
    exclude_previous_label: bool = False
    test_fraction: float = 0.0
    chunks: int = 10
    subsample: int = 0
    lr_decay_epochs: tuple = ()
    extended_metrics: bool = False
    checkpoint: bool = False
    warm_fraction: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(self.widths))
        object.__setattr__(self, "aid_boundaries", tuple(self.aid_boundaries))
        object.__setattr__(self, "aid_probs", tuple(self.aid_probs))
        object.__setattr__(self, "lr_decay_epochs", tuple(self.lr_decay_epochs))
        self.validate()

    def validate(self):
        def check(condition, message):
            if not condition:
                raise exceptions.ConfigError(message)

        check(self.stream in tasks.STREAM_KINDS, f"Unknown stream '{self.stream}'")
        check(self.tasks >= 1, f"tasks must be >= 1, got {self.tasks}")
        check(
            len(self.widths) >= 1 and all(w >= 1 for w in self.widths),
            f"widths must be positive, got {self.widths}",
        )
        check(
            self.optimizer in (optim.SGD, optim.ADAM),
            f"Unknown optimizer '{self.optimizer}'",
        )
        check(self.lr is None or self.lr > 0, f"lr must be positive, got {self.lr}")
        check(
            self.regularizer in (optim.NO_REGULARIZER, optim.L2, optim.L2_INIT),
            f"Unknown regularizer '{self.regularizer}'",
        )
        check(self.lam >= 0, f"lambda must be >= 0, got {self.lam}")
        check(
            self.intervention in INTERVENTIONS,
            f"Unknown intervention '{self.intervention}'",
        )
        check(0 <= self.sp_lambda <= 1, "sp_lambda must lie in [0, 1]")
        check(self.redo_tau >= 0, f"redo_tau must be >= 0, got {self.redo_tau}")
        check(self.epochs >= 0, f"epochs must be >= 0, got {self.epochs}")
        check(self.batch >= 1, f"batch must be >= 1, got {self.batch}")
        check(0 <= self.seed < 2**64, "seed must be an unsigned 64 bit integer")
        check(self.probe_batch >= 1, "probe_batch must be >= 1")
        check(0 <= self.test_fraction < 1, "test_fraction must lie in [0, 1)")
        check(self.chunks >= 1, f"chunks must be >= 1, got {self.chunks}")
        check(self.subsample >= 0, f"subsample must be >= 0, got {self.subsample}")
        check(
            all(e >= 0 for e in self.lr_decay_epochs),
            "lr_decay_epochs must be non-negative",
        )
        check(0 < self.warm_fraction < 1, "warm_fraction must lie in (0, 1)")
        check(
            self.activation in activations.KINDS,
            f"Unknown activation '{self.activation}'",
        )
        try:
            self.activation_spec()
        except ValueError as ve:
            raise exceptions.ConfigError(f"Invalid activation settings: {ve}") from ve

    @property
    def learning_rate(self):
        if self.lr is None:
            return optim.DEFAULT_LEARNING_RATES[self.optimizer]
        return self.lr

    @property
    def resets_optimizer(self):
        """
        Whether optimizer moments are cleared at task boundaries. The
        default clears them for chunked and warm-start streams only.
        """
        if self.reset_optimizer is None:
            return self.stream in (
                tasks.CHUNKED_FULL,
                tasks.CHUNKED_LIMITED,
                tasks.WARM_START,
            )
        return self.reset_optimizer

    def activation_spec(self):
        kind = self.activation
        p = self.activation_p
        if p is None:
            p = DEFAULT_ACTIVATION_P.get(kind)
        if kind == activations.MOD_LEAKY_RELU:
            return activations.ActivationSpec(kind, alpha=p)
        if kind == activations.RRELU:
            return activations.ActivationSpec(
                kind, lower=self.rrelu_lower, upper=self.rrelu_upper
            )
        if kind == activations.AID_PQ:
            q = self.activation_q
            if q is None:
                q = DEFAULT_ACTIVATION_Q
            return activations.ActivationSpec(kind, p=p, q=q)
        if kind == activations.AID_GENERAL:
            scheme = activations.IntervalScheme(self.aid_boundaries, self.aid_probs)
            return activations.ActivationSpec(kind, scheme=scheme)
        if kind in (activations.AID, activations.DROPOUT, activations.DROPRELU):
            return activations.ActivationSpec(kind, p=p)
        return activations.ActivationSpec(kind)

    def asdict(self):
        d = {}
        for name, value in dataclasses.asdict(self).items():
            if isinstance(value, tuple):
                value = list(value)
            d[FIELD_KEYS.get(name, name)] = value
        return d

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, values):
        """
        Builds a config from a mapping of config keys to values. String values
        are parsed; other values are used as they are.
        """
        fields = {f.name for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in values.items():
            name = KEY_ALIASES.get(key, key)
            if name not in fields:
                raise exceptions.ConfigError(f"Unknown config key '{key}'")
            if isinstance(value, str):
                try:
                    value = PARSERS[name](value.strip())
                except ValueError as ve:
                    raise exceptions.ConfigError(
                        f"Bad value for '{key}': {ve}"
                    ) from ve
            kwargs[name] = value
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path):
        """
        Reads a flat ``key = value`` config file. Blank lines and lines
        starting with ``#`` are ignored; unknown and repeated keys are
        errors.
        """
        values = {}
        with open(path) as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if line == "" or line.startswith("#"):
                    continue
                key, sep, value = line.partition("=")
                key = key.strip()
                if sep == "" or key == "":
                    raise exceptions.ConfigError(
                        f"{path}:{lineno}: expected 'key = value'"
                    )
                if key in values:
                    raise exceptions.ConfigError(
                        f"{path}:{lineno}: duplicate key '{key}'"
                    )
                values[key] = value
        return cls.from_dict(values)


PARSERS = {
    "dataset": str,
    "stream": str,
    "tasks": int,
    "widths": _parse_tuple(int),
    "activation": str,
    "activation_p": _parse_optional(float),
    "activation_q": _parse_optional(float),
    "rrelu_lower": float,
    "rrelu_upper": float,
    "aid_boundaries": _parse_tuple(float),
    "aid_probs": _parse_tuple(float),
    "optimizer": str,
    "lr": _parse_optional(float),
    "regularizer": str,
    "lam": float,
    "intervention": str,
    "sp_lambda": float,
    "redo_tau": float,
    "epochs": int,
    "batch": int,
    "seed": int,
    "probe_batch": int,
    "reset_optimizer": _parse_reset,
    "exclude_previous_label": _parse_bool,
    "test_fraction": float,
    "chunks": int,
    "subsample": int,
    "lr_decay_epochs": _parse_tuple(int),
    "extended_metrics": _parse_bool,
    "checkpoint": _parse_bool,
    "warm_fraction": float,
}


@dataclasses.dataclass
class Experiment:
    """
    The mutable state of a run: the network, optimizer, task stream and the
    two random streams. ``probe`` is the fixed batch the dormant ratio,
    effective rank and sign entropy are measured on after every task.
    """

    cfg: ExperimentConfig
    stream: tasks.TaskStream
    heldout: tasks.Dataset
    probe: tasks.Dataset
    net: nn.Network
    opt: optim.OptimizerState
    reg: optim.RegularizerSpec
    schedule: optim.StepDecay
    model_rng: numkit.Rng

    def data_rng(self, *key):
        return numkit.Rng(self.cfg.seed, (numkit.DATA_STREAM,) + key)


def setup_experiment(cfg):
    """
    Loads the data and builds the initial network and optimizer of a run.
    """
    seed = cfg.seed
    base = tasks.parse_dataset_spec(cfg.dataset, seed)
    base = tasks.subsample(
        base, cfg.subsample, numkit.Rng(seed, (numkit.DATA_STREAM, tasks.SUBSAMPLE_KEY))
    )
    train, heldout = tasks.train_test_split(
        base, cfg.test_fraction, numkit.Rng(seed, (numkit.DATA_STREAM, tasks.SPLIT_KEY))
    )
    try:
        stream = tasks.TaskStream(
            cfg.stream,
            train,
            seed,
            num_tasks=cfg.tasks,
            chunks=cfg.chunks,
            exclude_previous=cfg.exclude_previous_label,
            warm_fraction=cfg.warm_fraction,
        )
    except ValueError as ve:
        raise exceptions.ConfigError(str(ve)) from ve
    probe = select_probe(heldout if len(heldout) > 0 else train, cfg)
    model_rng = numkit.Rng(seed, (numkit.MODEL_STREAM,))
    spec = cfg.activation_spec()
    net = nn.build_network(
        base.num_features, cfg.widths, base.num_classes, spec, model_rng
    )
    return Experiment(
        cfg=cfg,
        stream=stream,
        heldout=heldout,
        probe=probe,
        net=net,
        opt=optim.OptimizerState(cfg.optimizer, cfg.learning_rate),
        reg=optim.RegularizerSpec(cfg.regularizer, cfg.lam),
        schedule=optim.StepDecay(cfg.lr_decay_epochs),
        model_rng=model_rng,
    )


def train_task(exp, task, t):
    """
    Trains the network on ``task`` for the configured number of epochs and
    returns the mean loss of the last epoch (None if no epoch ran).

    :raises NonFiniteError: if training diverges.
    """
    cfg = exp.cfg
    n = len(task)
    mean_loss = None
    for epoch in range(cfg.epochs):
        exp.opt.lr = exp.schedule.learning_rate(cfg.learning_rate, epoch)
        order = exp.data_rng(tasks.SHUFFLE_KEY, t, epoch).permutation(n)
        losses = []
        for start in range(0, n, cfg.batch):
            index = order[start : start + cfg.batch]
            logits, trace = nn.forward(
                exp.net, task.X[index], activations.TRAIN, exp.model_rng
            )
            loss, grad = nn.softmax_cross_entropy(logits, task.labels[index])
            if not math.isfinite(loss):
                raise exceptions.NonFiniteError(
                    f"Loss diverged in task {t}, epoch {epoch}"
                )
            nn.backward(exp.net, trace, grad)
            optim.apply_step(exp.opt, exp.net, exp.reg)
            losses.append(loss)
        mean_loss = float(np.mean(losses))
        logger.debug(f"Task {t} epoch {epoch}: loss={mean_loss:.6f}")
    exp.opt.lr = cfg.learning_rate
    if not exp.net.is_finite():
        raise exceptions.NonFiniteError(f"Parameters diverged in task {t}")
    return mean_loss


def select_probe(dataset, cfg):
    """
    Returns the probe batch of a run: ``cfg.probe_batch`` samples of
    ``dataset`` drawn once from the data stream, or all of it if it is
    smaller.
    """
    rng = numkit.Rng(cfg.seed, (numkit.DATA_STREAM, tasks.PROBE_KEY))
    return tasks.subsample(dataset, cfg.probe_batch, rng)


def intervene(exp, probe):
    """
    Applies the configured task-boundary intervention. ReDo scores units on
    the probe inputs ``probe``.
    """
    cfg = exp.cfg
    if cfg.intervention == SHRINK_PERTURB:
        optim.shrink_perturb(exp.net, cfg.sp_lambda)
        logger.info(f"Applied Shrink & Perturb with lambda={cfg.sp_lambda}")
    elif cfg.intervention == REDO:
        _, counts = optim.redo_reset(
            exp.net, probe, cfg.redo_tau, exp.model_rng, exp.opt
        )
        logger.info(f"ReDo reset {sum(counts)} units")
    elif cfg.intervention == FULL_RESET:
        exp.net.reset_to_initial()
        exp.opt.reset_state()
        logger.info("Reset all parameters to their initial values")


def run_task(exp, t):
    """
    Trains task ``t`` and returns its records. A diverged task is recorded
    with zero accuracy and its ``diverged`` flag set, and the run goes on.
    """
    cfg = exp.cfg
    task = tasks.next_task(exp.stream, t)
    probe = tasks.heldout_task(exp.stream, exp.probe, t).X
    splits = [(metrics.TRAIN_SPLIT, task)]
    if len(exp.heldout) > 0:
        splits.append(
            (metrics.TEST_SPLIT, tasks.heldout_task(exp.stream, exp.heldout, t))
        )
    records = []
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            train_task(exp, task, t)
            for split, dataset in splits:
                records.append(
                    metrics.measure(
                        exp.net,
                        dataset.X,
                        dataset.labels,
                        task=t,
                        epoch=cfg.epochs,
                        split=split,
                        probe=probe,
                        extended=cfg.extended_metrics,
                    )
                )
        except exceptions.NonFiniteError as nfe:
            logger.warning(f"Task {t} diverged: {nfe}")
            records = [
                metrics.MetricsRecord.diverged_task(t, cfg.epochs, split)
                for split, _ in splits
            ]
        if t < cfg.tasks - 1:
            intervene(exp, probe)
    return records


def run_experiment(cfg, exp=None):
    """
    Runs every task of the configured stream and returns the list of
    :class:`.MetricsRecord`. The result is fully determined by ``cfg``.
    """
    before = time.monotonic()
    if exp is None:
        exp = setup_experiment(cfg)
    logger.info(
        f"Running {cfg.tasks} {cfg.stream} tasks with {exp.net} "
        f"({exp.net.parameter_count()} parameters)"
    )
    records = []
    for t in range(cfg.tasks):
        if t > 0 and cfg.resets_optimizer:
            exp.opt.reset_state()
        task_records = run_task(exp, t)
        records.extend(task_records)
        logger.info(f"Task {t}: train accuracy {task_records[0].accuracy:.4f}")
    duration = humanize.precisedelta(time.monotonic() - before)
    logger.info(f"Finished {cfg.tasks} tasks in {duration}")
    return records


def _format_value(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def _fieldnames(extended, diverged):
    fieldnames = CSV_FIELDS
    if extended:
        fieldnames += metrics.EXTENDED_FIELDS
    if diverged:
        fieldnames += (DIVERGED_FIELD,)
    return fieldnames


def emit_csv(records, path, extended=None):
    """
    Writes the records to ``path`` as CSV with floats printed to 17
    significant digits. The extended metric columns are included if any
    record carries them, unless ``extended`` says otherwise. A final
    ``diverged`` column of 0 and 1 flags the placeholder rows of diverged
    tasks; it is only written if some task diverged.
    """
    if len(records) == 0:
        raise ValueError("No records to write")
    if extended is None:
        extended = any(
            getattr(record, name) is not None
            for record in records
            for name in metrics.EXTENDED_FIELDS
        )
    fieldnames = _fieldnames(extended, any(record.diverged for record in records))
    path = pathlib.Path(path).resolve()
    with tempfile.NamedTemporaryFile(
        "w", dir=path.parent, prefix=".aidnet_", suffix=".csv", delete=False
    ) as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow(
                {name: _format_value(getattr(record, name)) for name in fieldnames}
            )
    try:
        os.replace(f.name, path)
    except OSError:
        os.unlink(f.name)
        raise
    logger.info(f"Wrote {len(records)} records to {path}")


def read_csv(path):
    """
    Parses a file written by :func:`emit_csv` back into records.
    """
    records = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        missing = set(CSV_FIELDS) - set(reader.fieldnames or [])
        if missing:
            raise exceptions.FileFormatError(
                f"{path}: missing columns {sorted(missing)}"
            )
        for row in reader:
            values = {}
            for name, text in row.items():
                if name in INT_FIELDS:
                    values[name] = int(text)
                elif name == DIVERGED_FIELD:
                    values[name] = bool(int(text))
                elif name == "split":
                    values[name] = text
                elif text == "":
                    values[name] = None
                else:
                    values[name] = float(text)
            records.append(metrics.MetricsRecord(**values))
    return records
