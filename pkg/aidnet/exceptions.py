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
Exceptions raised by aidnet.
"""


class AidnetException(Exception):
    """
    Superclass of all exceptions thrown by aidnet.
    """


class ShapeError(AidnetException, ValueError):
    """
    Exception raised when matrix or batch dimensions do not agree.
    """


class NonFiniteError(AidnetException, ArithmeticError):
    """
    Exception raised when an operation produces NaN or infinite values.
    """


class ConvergenceError(AidnetException, ArithmeticError):
    """
    Exception raised when an iterative kernel exhausts its sweep budget.
    """


class StaleTraceError(AidnetException):
    """
    Exception raised when a forward trace does not belong to the network
    it is being differentiated against.
    """


class ConfigError(AidnetException, ValueError):
    """
    Exception raised when an experiment configuration is invalid.
    """


class VerificationError(AidnetException):
    """
    Exception raised when a numerical certification suite fails.
    """


class FileError(AidnetException):
    """
    Exception raised when some non-specific error happens during file handling.
    """


class FileFormatError(FileError):
    """
    Exception raised when a malformed file is encountered.
    """


class MagicMismatchError(FileFormatError):
    """
    Exception raised when an IDX file header carries the wrong magic number.
    """


class TruncatedFileError(FileFormatError):
    """
    Exception raised when a file ends before its header says it should.
    """


class CountMismatchError(FileFormatError):
    """
    Exception raised when paired image and label files disagree on the
    number of items.
    """


class InvalidLabelError(AidnetException, ValueError):
    """
    Exception raised when a class label is outside the valid range.
    """


class TaskIndexError(AidnetException, IndexError):
    """
    Exception raised when a task stream is asked for a task it does not have.
    """


class SingularCoefficientError(AidnetException, ValueError):
    """
    Exception raised when a bound is requested where its coefficient is
    undefined.
    """
