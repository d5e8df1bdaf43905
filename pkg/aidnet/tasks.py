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
Datasets and the non-stationary task streams built from them.

A :class:`TaskStream` is immutable: task ``t`` is a pure function of the
base dataset, the stream kind, the master seed and ``t``, so any task can be
regenerated at any time.
"""
import dataclasses
import gzip
import logging
import math
import os
import struct

import numpy as np

from . import exceptions
from . import numkit

logger = logging.getLogger(__name__)

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049

PERMUTED = "permuted"
RANDOM_LABEL = "random_label"
CHUNKED_FULL = "chunked_full"
CHUNKED_LIMITED = "chunked_limited"
WARM_START = "warm_start"
STREAM_KINDS = (PERMUTED, RANDOM_LABEL, CHUNKED_FULL, CHUNKED_LIMITED, WARM_START)

# Sub-streams of the data stream. Each is combined with the data stream id
# and, where relevant, the task index.
PERMUTATION_KEY = 0
LABEL_KEY = 1
CHUNK_KEY = 2
WARM_KEY = 3
SHUFFLE_KEY = 4
SPLIT_KEY = 5
SUBSAMPLE_KEY = 6
PROBE_KEY = 7

DEFAULT_SEPARATION = 4.0


@dataclasses.dataclass(frozen=True)
class Dataset:
    """
    A labelled feature matrix with values in ``[0, 1]``.
    """

    X: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        X = np.array(self.X, dtype=numkit.DTYPE)
        labels = np.array(self.labels, dtype=np.int64)
        if X.ndim != 2:
            raise exceptions.ShapeError(f"Features must be a matrix, got {X.shape}")
        if labels.shape != (X.shape[0],):
            raise exceptions.ShapeError(
                f"{X.shape[0]} samples but labels have shape {labels.shape}"
            )
        if self.num_classes < 1:
            raise ValueError(f"Need at least one class, got {self.num_classes}")
        if labels.size > 0 and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise exceptions.InvalidLabelError(
                f"Labels must lie in [0, {self.num_classes})"
            )
        numkit.check_finite(X, "dataset features")
        if X.size > 0 and (X.min() < 0 or X.max() > 1):
            raise ValueError("Dataset features must lie in [0, 1]")
        X.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "num_classes", int(self.num_classes))

    def __len__(self):
        return self.X.shape[0]

    @property
    def num_features(self):
        return self.X.shape[1]

    def subset(self, indices):
        return Dataset(self.X[indices], self.labels[indices], self.num_classes)

    def equals(self, other):
        return (
            self.num_classes == other.num_classes
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.labels, other.labels)
        )


def _open(path, mode="rb"):
    path = os.fspath(path)
    if path.endswith(".gz"):
        return gzip.open(path, mode)
    return open(path, mode)


def _read_idx(path, magic, ndim, what):
    with _open(path) as f:
        data = f.read()
    header_size = 4 * (1 + ndim)
    if len(data) < header_size:
        raise exceptions.TruncatedFileError(
            f"{path}: header of the {what} file is truncated"
        )
    found, *dims = struct.unpack(f">{1 + ndim}i", data[:header_size])
    if found != magic:
        raise exceptions.MagicMismatchError(
            f"{path}: expected {what} magic {magic}, found {found}"
        )
    if any(dim < 0 for dim in dims):
        raise exceptions.FileFormatError(f"{path}: negative dimension in header")
    expected = math.prod(dims)
    payload = data[header_size:]
    if len(payload) < expected:
        raise exceptions.TruncatedFileError(
            f"{path}: expected {expected} bytes of {what} data, found {len(payload)}"
        )
    if len(payload) > expected:
        raise exceptions.FileFormatError(
            f"{path}: {len(payload) - expected} trailing bytes after {what} data"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(dims)


def load_idx(images_path, labels_path, num_classes=None):
    """
    Reads an IDX image file and the matching label file, as distributed for
    MNIST. Files ending in ``.gz`` are decompressed on the fly. Pixels are
    flattened per image and scaled to ``[0, 1]``.

    If ``num_classes`` is not given it is one more than the largest label.
    """
    images = _read_idx(images_path, IMAGE_MAGIC, 3, "image")
    labels = _read_idx(labels_path, LABEL_MAGIC, 1, "label")
    if images.shape[0] != labels.shape[0]:
        raise exceptions.CountMismatchError(
            f"{images_path} holds {images.shape[0]} images but {labels_path} "
            f"holds {labels.shape[0]} labels"
        )
    X = images.reshape(images.shape[0], -1).astype(numkit.DTYPE) / 255.0
    if num_classes is None:
        num_classes = int(labels.max()) + 1 if labels.size > 0 else 1
    logger.info(f"Loaded {X.shape[0]} images of {X.shape[1]} pixels")
    return Dataset(X, labels, num_classes)


def _image_shape(num_features):
    side = math.isqrt(num_features)
    if side * side == num_features:
        return side, side
    return 1, num_features


def write_idx(dataset, images_path, labels_path):
    """
    Writes ``dataset`` as an IDX image and label file pair. Features are
    quantised to bytes; square feature counts are stored as square images.
    """
    if dataset.num_classes > 256:
        raise ValueError("IDX label files hold at most 256 classes")
    n = len(dataset)
    rows, cols = _image_shape(dataset.num_features)
    pixels = np.rint(dataset.X * 255.0).astype(np.uint8)
    with _open(images_path, "wb") as f:
        f.write(struct.pack(">4i", IMAGE_MAGIC, n, rows, cols))
        f.write(pixels.tobytes())
    with _open(labels_path, "wb") as f:
        f.write(struct.pack(">2i", LABEL_MAGIC, n))
        f.write(dataset.labels.astype(np.uint8).tobytes())


def save_npz(dataset, path):
    with open(path, "wb") as f:
        np.savez_compressed(
            f, X=dataset.X, labels=dataset.labels, num_classes=dataset.num_classes
        )


def load_npz(path):
    try:
        with np.load(path) as data:
            return Dataset(data["X"], data["labels"], int(data["num_classes"]))
    except KeyError as ke:
        raise exceptions.FileFormatError(f"{path}: missing array {ke}") from ke
    except (OSError, ValueError) as e:
        if isinstance(e, exceptions.AidnetException):
            raise
        raise exceptions.FileFormatError(f"{path}: not a dataset archive") from e


def synth_dataset(n_per_class, num_classes, num_features, separation, rng):
    """
    Returns Gaussian class blobs. Each class mean is drawn uniformly from
    the unit cube and samples scatter around it with standard deviation
    ``1 / separation``; values are clipped to ``[0, 1]`` and the samples
    shuffled.
    """
    if min(n_per_class, num_classes, num_features) < 1:
        raise ValueError("Sample, class and feature counts must be positive")
    if not separation > 0:
        raise ValueError(f"Separation must be positive, got {separation}")
    means = rng.uniform((num_classes, num_features))
    labels = np.repeat(np.arange(num_classes), n_per_class)
    noise = rng.normal((labels.size, num_features), scale=1.0 / separation)
    X = np.clip(means[labels] + noise, 0.0, 1.0)
    order = rng.permutation(labels.size)
    return Dataset(X[order], labels[order], num_classes)


def parse_dataset_spec(text, seed):
    """
    Resolves a dataset specification string:

    - ``idx:<images>,<labels>`` reads an IDX pair
    - ``npz:<path>`` reads an archive written by ``aidnet data synth``
    - ``synth:<k>x<n>x<d>[x<separation>]`` generates ``k`` classes of ``n``
      samples with ``d`` features from the data stream of ``seed``
    """
    scheme, sep, body = text.partition(":")
    if sep == "":
        raise exceptions.ConfigError(f"Dataset spec '{text}' lacks a 'kind:' prefix")
    if scheme == "idx":
        paths = body.split(",")
        if len(paths) != 2:
            raise exceptions.ConfigError(f"Expected idx:<img>,<lbl>, got '{text}'")
        return load_idx(*paths)
    if scheme == "npz":
        return load_npz(body)
    if scheme == "synth":
        parts = body.split("x")
        try:
            if len(parts) not in (3, 4):
                raise ValueError(body)
            k, n, d = (int(part) for part in parts[:3])
            separation = float(parts[3]) if len(parts) == 4 else DEFAULT_SEPARATION
            rng = numkit.Rng(seed, (numkit.DATA_STREAM,))
            return synth_dataset(n, k, d, separation, rng)
        except ValueError as ve:
            raise exceptions.ConfigError(
                f"Expected synth:<k>x<n>x<d>[x<separation>], got '{text}'"
            ) from ve
    raise exceptions.ConfigError(f"Unknown dataset kind '{scheme}'")


def train_test_split(dataset, fraction, rng):
    """
    Returns a random ``(train, test)`` split holding out ``fraction`` of the
    samples.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError(f"Test fraction must lie in [0, 1), got {fraction}")
    order = rng.permutation(len(dataset))
    n_test = int(round(fraction * len(dataset)))
    train = dataset.subset(np.sort(order[n_test:]))
    return train, dataset.subset(np.sort(order[:n_test]))


def subsample(dataset, n, rng):
    if n <= 0 or n >= len(dataset):
        return dataset
    return dataset.subset(np.sort(rng.choice(len(dataset), n)))


@dataclasses.dataclass(frozen=True)
class TaskStream:
    """
    A replayable sequence of tasks derived from ``base``.

    :param str kind: One of :data:`STREAM_KINDS`.
    :param int num_tasks: Number of tasks, or None for an unbounded permuted
        or random-label stream. Chunked streams have one task per chunk and
        warm-start streams have exactly two.
    :param bool exclude_previous: Random-label streams only. Forces every
        label to differ from the label the sample had in the previous task.
    """

    kind: str
    base: Dataset
    seed: int
    num_tasks: int = None
    chunks: int = 10
    exclude_previous: bool = False
    warm_fraction: float = 0.1

    def __post_init__(self):
        if self.kind not in STREAM_KINDS:
            raise ValueError(f"Unknown stream kind '{self.kind}'")
        if self.kind in (CHUNKED_FULL, CHUNKED_LIMITED):
            if not 1 <= self.chunks <= len(self.base):
                raise ValueError(
                    f"Cannot split {len(self.base)} samples into {self.chunks} chunks"
                )
            if self.num_tasks is not None and self.num_tasks > self.chunks:
                raise ValueError(f"A chunked stream has at most {self.chunks} tasks")
        if self.kind == WARM_START:
            if not 0.0 < self.warm_fraction < 1.0:
                raise ValueError(
                    f"Warm-start fraction must lie in (0, 1), got {self.warm_fraction}"
                )
            if self.num_tasks is not None and self.num_tasks > 2:
                raise ValueError("A warm-start stream has at most 2 tasks")
        if self.exclude_previous and self.base.num_classes < 2:
            raise ValueError("Relabelling to a different class needs two classes")

    @property
    def length(self):
        """
        The number of tasks in the stream, or None if it is unbounded.
        """
        if self.num_tasks is not None:
            return self.num_tasks
        if self.kind in (CHUNKED_FULL, CHUNKED_LIMITED):
            return self.chunks
        if self.kind == WARM_START:
            return 2
        return None

    def _rng(self, key, *index):
        return numkit.Rng(self.seed, (numkit.DATA_STREAM, key) + index)

    def permutation(self, t):
        """
        The feature permutation of task ``t`` of a permuted stream.
        """
        return self._rng(PERMUTATION_KEY, t).permutation(self.base.num_features)

    def chunk_indices(self):
        """
        Returns the sample indices of every chunk. Chunks are disjoint and
        together cover the base dataset.
        """
        order = self._rng(CHUNK_KEY).permutation(len(self.base))
        return [np.sort(chunk) for chunk in np.array_split(order, self.chunks)]

    def labels(self, t):
        """
        The labels of task ``t`` of a random-label stream. Labels are
        recomputed from the task seeds on every call; with
        ``exclude_previous`` the per-task shifts of tasks ``0..t`` are
        accumulated onto the base labels.
        """
        k = self.base.num_classes
        n = len(self.base)
        if not self.exclude_previous:
            return self._rng(LABEL_KEY, t).integers(0, k, n)
        labels = self.base.labels
        for s in range(t + 1):
            labels = (labels + self._rng(LABEL_KEY, s).integers(1, k, n)) % k
        return labels

    def check_index(self, t):
        if t < 0 or (self.length is not None and t >= self.length):
            raise exceptions.TaskIndexError(
                f"Task {t} out of range for {self.kind} stream of length {self.length}"
            )


def next_task(stream, t):
    """
    Returns the training dataset of task ``t`` of ``stream``.
    """
    stream.check_index(t)
    base = stream.base
    if stream.kind == PERMUTED:
        return Dataset(base.X[:, stream.permutation(t)], base.labels, base.num_classes)
    if stream.kind == RANDOM_LABEL:
        return Dataset(base.X, stream.labels(t), base.num_classes)
    if stream.kind == WARM_START:
        if t == 1:
            return base
        order = stream._rng(WARM_KEY).permutation(len(base))
        n = max(1, int(round(stream.warm_fraction * len(base))))
        return base.subset(np.sort(order[:n]))
    chunks = stream.chunk_indices()
    if stream.kind == CHUNKED_LIMITED:
        return base.subset(chunks[t])
    return base.subset(np.concatenate(chunks[: t + 1]))


def heldout_task(stream, dataset, t):
    """
    Applies the input transform of task ``t`` to a held-out ``dataset``.
    Only permuted streams change the inputs; the other kinds evaluate on the
    held-out data unchanged.
    """
    stream.check_index(t)
    if stream.kind == PERMUTED:
        X = dataset.X[:, stream.permutation(t)]
        return Dataset(X, dataset.labels, dataset.num_classes)
    return dataset
