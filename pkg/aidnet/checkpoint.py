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
Network checkpoints stored as compressed zarr zip archives.
"""
import contextlib
import functools
import json
import logging
import math
import os
import pathlib
import tempfile
import warnings
import zipfile

import humanize
import numcodecs
import numpy as np
import zarr

from . import activations
from . import exceptions
from . import nn
from . import numkit
from . import provenance

logger = logging.getLogger(__name__)

FORMAT_NAME = "aidnet"
FORMAT_VERSION = [1, 0]

LAYER_ARRAYS = ("W", "b", "W0", "b0")
SUMMARY_COLUMNS = ("layer", "shape", "params", "weight_norm", "drift", "stored")


def save(net, destination, parameters=None):
    """
    Writes the parameters and initial parameters of ``net`` losslessly to
    the specified path or file-like object. The file is written to a
    temporary location first and moved into place once complete.

    :param Network net: The network to store.
    :param destination: The string, :class:`pathlib.Path` or file-like object
        to write to.
    :param dict parameters: Run parameters recorded in the provenance.
    """
    try:
        destination = pathlib.Path(destination).resolve()
        is_path = True
        destdir = destination.parent
    except TypeError:
        is_path = False
        destdir = None
    with tempfile.TemporaryDirectory(dir=destdir, prefix=".aidnet_work_") as tmpdir:
        filename = pathlib.Path(tmpdir, "tmp.aidz")
        logger.debug(f"Writing to temporary file {filename}")
        with zarr.ZipStore(str(filename), mode="w") as store:
            root = zarr.group(store=store)
            save_zarr(net, root, parameters)
        size = os.path.getsize(filename)
        if is_path:
            os.replace(filename, destination)
            logger.info(
                f"Wrote {destination} ({humanize.naturalsize(size, binary=True)})"
            )
        else:
            with open(filename, "rb") as source:
                chunk_size = 2**20
                for chunk in iter(functools.partial(source.read, chunk_size), b""):
                    destination.write(chunk)


def save_zarr(net, root, parameters=None):
    provenance_dict = provenance.get_provenance_dict(parameters or {})
    with warnings.catch_warnings():
        # zarr warns about duplicate names when attrs are rewritten in a zip.
        warnings.simplefilter("ignore")
        root.attrs["format_name"] = FORMAT_NAME
        root.attrs["format_version"] = FORMAT_VERSION
        root.attrs["dims"] = net.dims
        root.attrs["activation"] = net.activation.asdict()
        root.attrs["provenance"] = provenance_dict

    compressor = numcodecs.Blosc(
        cname="zstd", clevel=9, shuffle=numcodecs.Blosc.SHUFFLE
    )
    for index, layer in enumerate(net.layers):
        stored = layer.parameters() + layer.initial_parameters()
        values = dict(zip(LAYER_ARRAYS, stored))
        for name in LAYER_ARRAYS:
            data = values[name]
            array = root.empty(
                f"layers/{index}/{name}",
                chunks=data.shape,
                shape=data.shape,
                dtype=numkit.DTYPE,
                compressor=compressor,
            )
            array[:] = data
            logger.debug(
                "layers/{}/{}: output={}".format(
                    index,
                    name,
                    humanize.naturalsize(array.nbytes_stored, binary=True),
                )
            )


def check_format(root):
    try:
        format_name = root.attrs["format_name"]
        format_version = root.attrs["format_version"]
    except KeyError as ke:
        raise exceptions.FileFormatError("Incorrect file format") from ke
    if format_name != FORMAT_NAME:
        raise exceptions.FileFormatError(
            f"Incorrect file format: expected '{FORMAT_NAME}' got '{format_name}'"
        )
    if format_version[0] < FORMAT_VERSION[0]:
        raise exceptions.FileFormatError(
            f"Format version {format_version} too old. "
            f"Current version = {FORMAT_VERSION}"
        )
    if format_version[0] > FORMAT_VERSION[0]:
        raise exceptions.FileFormatError(
            f"Format version {format_version} too new. "
            f"Current version = {FORMAT_VERSION}"
        )


@contextlib.contextmanager
def load_zarr(path):
    path = str(path)
    try:
        store = zarr.ZipStore(path, mode="r")
    except zipfile.BadZipFile as bzf:
        raise exceptions.FileFormatError("File is not an aidnet checkpoint") from bzf
    root = zarr.group(store=store)
    try:
        check_format(root)
        yield root
    finally:
        store.close()


def load_network_zarr(root):
    try:
        dims = list(root.attrs["dims"])
        spec = activations.ActivationSpec.fromdict(root.attrs["activation"])
        layers = []
        for index in range(len(dims) - 1):
            values = {
                name: np.asarray(root[f"layers/{index}/{name}"][:])
                for name in LAYER_ARRAYS
            }
            layers.append(nn.LinearLayer(**values))
    except (KeyError, ValueError, TypeError) as e:
        raise exceptions.FileFormatError(f"Corrupt checkpoint: {e}") from e
    net = nn.Network(layers, spec)
    if net.dims != dims:
        raise exceptions.FileFormatError(
            f"Stored dims {dims} do not match the layers {net.dims}"
        )
    return net


def load(path):
    """
    Reads a checkpoint written by :func:`save` and returns the network.

    :param str path: The location of the checkpoint.
    :rtype: Network
    """
    with load_zarr(path) as root:
        return load_network_zarr(root)


def layer_summary(root, net):
    """
    Returns one row of text cells per linear layer of ``net``: its weight
    shape, parameter count, weight norm, distance from the initial
    parameters and compressed size in the archive.
    """
    rows = []
    for index, layer in enumerate(net.layers):
        stored = sum(
            root[f"layers/{index}/{name}"].nbytes_stored for name in LAYER_ARRAYS
        )
        drift = sum(
            numkit.frobenius_norm_sq(p - p0)
            for p, p0 in zip(layer.parameters(), layer.initial_parameters())
        )
        rows.append(
            (
                f"layers/{index}",
                f"{layer.fan_out}x{layer.fan_in}",
                humanize.intcomma(layer.W.size + layer.b.size),
                f"{math.sqrt(numkit.frobenius_norm_sq(layer.W)):.4g}",
                f"{math.sqrt(drift):.4g}",
                humanize.naturalsize(stored, binary=True),
            )
        )
    return rows


def print_summary(path, verbosity=0):
    with load_zarr(path) as root:
        net = load_network_zarr(root)
        rows = layer_summary(root, net)
        attrs = dict(root.attrs)
    document = attrs.get("provenance", {})

    size = humanize.naturalsize(os.path.getsize(path), binary=True)
    print(f"File: {path}\t{size}")
    print("dims:", net.dims)
    print("activation:", net.activation)
    print("parameters:", humanize.intcomma(net.parameter_count()))
    if "parameters_digest" in document:
        print("run digest:", document["parameters_digest"][:16])
    if verbosity > 0:
        print("format_version:", attrs["format_version"])
        print("provenance: ", end="")
        print(json.dumps(document, indent=4, sort_keys=True))
    table = [SUMMARY_COLUMNS] + rows
    widths = [max(len(row[j]) for row in table) for j in range(len(SUMMARY_COLUMNS))]
    for row in table:
        print("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
