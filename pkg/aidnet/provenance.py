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
Provenance documents attached to checkpoints and logged by ``aidnet run``.

A document records the run parameters together with a digest of them, the
random stream layout the run drew from and the environment it ran in.
"""
import hashlib
import json
import platform
import sys

import numcodecs
import numpy as np
import zarr

from . import numkit


__version__ = "undefined"
try:
    from . import _version

    __version__ = _version.version
except ImportError:  # pragma: nocover
    pass

SCHEMA_VERSION = "1.1.0"

LIBRARIES = {"numpy": np, "numcodecs": numcodecs, "zarr": zarr}


def parameters_digest(parameters):
    """
    Returns the SHA-256 hex digest of ``parameters`` written as canonical
    JSON. Runs with identical settings have identical digests.
    """
    text = json.dumps(parameters, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def get_environment():
    """
    Returns the platform, interpreter, library versions and numeric settings
    of the current process.
    """
    return {
        "os": {
            "system": platform.system(),
            "release": platform.release(),
            "machine": platform.machine(),
        },
        "python": {
            "implementation": platform.python_implementation(),
            "version": platform.python_version(),
        },
        "libraries": {
            name: {"version": module.__version__} for name, module in LIBRARIES.items()
        },
        "numerics": {
            "dtype": np.dtype(numkit.DTYPE).name,
            "bit_generator": numkit.BIT_GENERATOR.__name__,
            "byteorder": sys.byteorder,
        },
    }


def get_random_streams(parameters):
    return {
        "seed": parameters.get("seed"),
        "data": numkit.DATA_STREAM,
        "model": numkit.MODEL_STREAM,
    }


def get_provenance_dict(parameters):
    """
    Returns a dictionary describing an execution of aidnet with the
    specified run parameters.
    """
    return {
        "schema_version": SCHEMA_VERSION,
        "software": {"name": "aidnet", "version": __version__},
        "parameters": parameters,
        "parameters_digest": parameters_digest(parameters),
        "random_streams": get_random_streams(parameters),
        "environment": get_environment(),
    }
