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
Dense matrix helpers, seeded random streams and the small linear algebra
kernel used throughout aidnet.

Matrices are plain two dimensional float64 numpy arrays. The functions here
add the dimension and finiteness checks that the rest of the package relies
on.
"""
import logging

import numpy as np

from . import exceptions

logger = logging.getLogger(__name__)

DTYPE = np.float64

# Independent streams derived from one master seed.
DATA_STREAM = 0
MODEL_STREAM = 1

BIT_GENERATOR = np.random.PCG64


class Rng:
    """
    A seeded random stream. Two instances built from the same seed and
    stream identifier produce identical draws for identical call sequences.

    :param int seed: Unsigned 64 bit master seed.
    :param stream: Integer or tuple of integers identifying an independent
        stream derived from ``seed``. Streams with different identifiers do
        not overlap.
    """

    def __init__(self, seed, stream=None):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"Seed must be an unsigned 64 bit integer, got {seed}")
        self.seed = seed
        self.stream = stream
        if stream is None:
            spawn_key = ()
        elif isinstance(stream, tuple):
            spawn_key = tuple(int(k) for k in stream)
        else:
            spawn_key = (int(stream),)
        sequence = np.random.SeedSequence(seed, spawn_key=spawn_key)
        self._generator = np.random.Generator(BIT_GENERATOR(sequence))

    def __repr__(self):
        return f"Rng(seed={self.seed}, stream={self.stream})"

    def uniform(self, shape=None, low=0.0, high=1.0):
        """
        Returns draws from the uniform distribution on ``[low, high)``.
        """
        if low == 0.0 and high == 1.0:
            return self._generator.random(shape)
        return self._generator.uniform(low, high, shape)

    def bernoulli(self, p, shape):
        """
        Returns a float64 0/1 array where each entry is one with probability
        ``p``. The degenerate cases ``p == 0`` and ``p == 1`` are exact.
        """
        return (self._generator.random(shape) < p).astype(DTYPE)

    def normal(self, shape=None, scale=1.0):
        return self._generator.normal(0.0, scale, shape)

    def permutation(self, n):
        return self._generator.permutation(n)

    def integers(self, low, high, shape=None):
        return self._generator.integers(low, high, shape)

    def choice(self, n, size, replace=False):
        return self._generator.choice(n, size=size, replace=replace)


def check_finite(a, what="matrix"):
    """
    Raises :class:`.NonFiniteError` if the specified array contains NaN or
    infinite values, and returns it unchanged otherwise.
    """
    if not np.all(np.isfinite(a)):
        raise exceptions.NonFiniteError(f"Non-finite values in {what}")
    return a


def as_matrix(values):
    """
    Returns the specified values as a two dimensional float64 array. One
    dimensional input is interpreted as a single row.
    """
    a = np.array(values, dtype=DTYPE)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(1, -1)
    elif a.ndim > 2:
        raise exceptions.ShapeError(f"Expected at most 2 dimensions, got {a.ndim}")
    return check_finite(a)


def matmul(a, b):
    """
    Returns the matrix product of ``a`` and ``b``.
    """
    if a.ndim != 2 or b.ndim != 2:
        raise exceptions.ShapeError("matmul requires two dimensional operands")
    if a.shape[1] != b.shape[0]:
        raise exceptions.ShapeError(
            f"Cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}"
        )
    return check_finite(a @ b, "matrix product")


def frobenius_norm_sq(a):
    """
    Returns the sum of squared entries of ``a``.
    """
    a = np.asarray(a, dtype=DTYPE)
    return float(np.vdot(a, a))


def jacobi_eigenvalues(g, tol=1e-12, max_sweeps=100):
    """
    Returns the eigenvalues of the symmetric matrix ``g`` in descending order,
    computed with cyclic Jacobi rotations. Sweeps stop once the off-diagonal
    Frobenius norm falls to ``tol`` times the norm of ``g``.

    :raises ConvergenceError: if ``max_sweeps`` sweeps do not reach ``tol``.
    """
    a = np.array(g, dtype=DTYPE)
    n = a.shape[0]
    if a.shape != (n, n):
        raise exceptions.ShapeError(f"Expected a square matrix, got {a.shape}")
    scale = np.sqrt(frobenius_norm_sq(a))
    if n == 1 or scale == 0:
        return np.sort(np.diag(a))[::-1]
    threshold = tol * scale
    for sweep in range(max_sweeps):
        off = np.sqrt(frobenius_norm_sq(a - np.diag(np.diag(a))))
        if off <= threshold:
            logger.debug(f"Jacobi converged after {sweep} sweeps (n={n})")
            return np.sort(np.diag(a))[::-1]
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= threshold / n:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    raise exceptions.ConvergenceError(
        f"Jacobi eigenvalue iteration did not converge in {max_sweeps} sweeps"
    )


def singular_values(a, tol=1e-12, max_sweeps=100):
    """
    Returns the singular values of ``a`` in descending order. These are the
    square roots of the eigenvalues of the smaller Gram matrix, with tiny
    negative eigenvalues from rounding clamped to zero.
    """
    a = np.asarray(a, dtype=DTYPE)
    if a.ndim != 2 or min(a.shape) < 1:
        raise exceptions.ShapeError(f"Expected a non-empty matrix, got {a.shape}")
    check_finite(a)
    gram = a.T @ a if a.shape[1] <= a.shape[0] else a @ a.T
    eigenvalues = jacobi_eigenvalues(gram, tol=tol, max_sweeps=max_sweeps)
    return np.sqrt(np.clip(eigenvalues, 0.0, None))
