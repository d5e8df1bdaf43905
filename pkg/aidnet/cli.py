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
Command line interface to aidnet.
"""
import argparse
import contextlib
import json
import logging
import pathlib
import sys

import aidnet
from . import checkpoint
from . import exceptions
from . import numkit
from . import provenance
from . import runner
from . import tasks
from . import theory

logger = logging.getLogger(__name__)
log_format = "%(asctime)s %(levelname)s %(message)s"

VERIFICATION_FAILED = 2

METRICS_FILE = "metrics.csv"
CHECKPOINT_FILE = "network.aidz"
IDX_IMAGES_SUFFIX = "-images-idx3-ubyte"
IDX_LABELS_SUFFIX = "-labels-idx1-ubyte"


def exit(message):  # noqa: A001
    """
    Exit with the specified error message, setting error status.
    """
    sys.exit(f"{sys.argv[0]}: {message}")


def setup_logging(args):
    log_level = "WARN"
    if args.verbosity > 0:
        log_level = "INFO"
    if args.verbosity > 1:
        log_level = "DEBUG"
    logging.basicConfig(level=log_level, format=log_format)


class ArgumentParser(argparse.ArgumentParser):
    """
    Reports usage errors with exit status 1, the status of every other
    invalid invocation.
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def check_output(outfile, args):
    if outfile.exists() and not args.force:
        exit(f"'{outfile}' already exists; use --force to overwrite")


@contextlib.contextmanager
def check_errors(path):
    try:
        yield
    except OSError as ose:
        exit(str(ose))
    except exceptions.FileFormatError as ffe:
        exit(f"Error reading '{path}': {ffe}")
    except exceptions.ConfigError as ce:
        exit(f"Invalid configuration '{path}': {ce}")
    except (exceptions.AidnetException, ValueError) as e:
        exit(f"{path}: {e}")


def run_run(args):
    setup_logging(args)
    with check_errors(args.config):
        cfg = runner.ExperimentConfig.from_file(args.config)
        if args.seed is not None:
            cfg = cfg.replace(seed=args.seed)
    out = pathlib.Path(args.out)
    metrics_path = out / METRICS_FILE
    checkpoint_path = out / CHECKPOINT_FILE
    check_output(metrics_path, args)
    if cfg.checkpoint:
        check_output(checkpoint_path, args)
    logger.info(
        "Provenance: "
        + json.dumps(provenance.get_provenance_dict(cfg.asdict()), sort_keys=True)
    )
    with check_errors(cfg.dataset):
        exp = runner.setup_experiment(cfg)
    with check_errors(args.config):
        records = runner.run_experiment(cfg, exp)
    with check_errors(out):
        out.mkdir(parents=True, exist_ok=True)
        runner.emit_csv(records, metrics_path, extended=cfg.extended_metrics)
        if cfg.checkpoint:
            checkpoint.save(exp.net, checkpoint_path, cfg.asdict())


def run_verify(args):
    setup_logging(args)
    reports = theory.run_suites([args.suite], args.trials, args.seed)
    for report in reports:
        print(report.format())
    if not all(report.passed for report in reports):
        sys.exit(VERIFICATION_FAILED)


def run_data_synth(args):
    setup_logging(args)
    out = pathlib.Path(args.out)
    with check_errors(out):
        dataset = tasks.synth_dataset(
            args.per_class,
            args.classes,
            args.features,
            args.separation,
            numkit.Rng(args.seed, (numkit.DATA_STREAM,)),
        )
        if args.format == "idx":
            images = pathlib.Path(str(out) + IDX_IMAGES_SUFFIX)
            labels = pathlib.Path(str(out) + IDX_LABELS_SUFFIX)
            check_output(images, args)
            check_output(labels, args)
            tasks.write_idx(dataset, images, labels)
            logger.info(f"Wrote {images} and {labels}")
        else:
            check_output(out, args)
            tasks.save_npz(dataset, out)
            logger.info(f"Wrote {out}")


def run_inspect(args):
    setup_logging(args)
    with check_errors(args.file):
        checkpoint.print_summary(args.file, args.verbosity)


def add_common_arguments(parser):
    parser.add_argument(
        "-v", "--verbosity", action="count", default=0, help="Increase the verbosity"
    )


def aidnet_cli_parser():
    parser = ArgumentParser(
        description="Train and certify networks with interval-wise dropout."
    )
    parser.add_argument(
        "-V", "--version", action="version", version=f"%(prog)s {aidnet.__version__}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Run a continual training experiment")
    add_common_arguments(run)
    run.add_argument("--config", required=True, help="The experiment config file")
    run.add_argument(
        "--out", default=".", help="Directory to write metrics.csv to (default: .)"
    )
    run.add_argument(
        "--seed", type=int, default=None, help="Override the seed of the config"
    )
    run.add_argument(
        "-f", "--force", action="store_true", help="Force overwrite of output files"
    )
    run.set_defaults(runner=run_run)

    verify = subparsers.add_parser("verify", help="Run numerical verification suites")
    add_common_arguments(verify)
    verify.add_argument(
        "--suite", choices=list(theory.SUITES) + ["all"], default="all"
    )
    verify.add_argument(
        "--trials", type=int, default=1000, help="Random instances per suite"
    )
    verify.add_argument("--seed", type=int, default=1, help="Master seed")
    verify.set_defaults(runner=run_verify)

    data = subparsers.add_parser("data", help="Dataset utilities")
    data_commands = data.add_subparsers(dest="data_command", required=True)
    synth = data_commands.add_parser("synth", help="Write a synthetic dataset")
    add_common_arguments(synth)
    synth.add_argument("--classes", type=int, required=True)
    synth.add_argument("--per-class", type=int, required=True)
    synth.add_argument("--features", type=int, required=True)
    synth.add_argument(
        "--separation", type=float, default=tasks.DEFAULT_SEPARATION
    )
    synth.add_argument("--seed", type=int, default=42)
    synth.add_argument(
        "--format",
        choices=["npz", "idx"],
        default="npz",
        help="npz archive, or an IDX pair written to OUT-images/labels files",
    )
    synth.add_argument("--out", required=True, help="Output path or IDX prefix")
    synth.add_argument(
        "-f", "--force", action="store_true", help="Force overwrite of output files"
    )
    synth.set_defaults(runner=run_data_synth)

    inspect = subparsers.add_parser("inspect", help="Summarise a network checkpoint")
    add_common_arguments(inspect)
    inspect.add_argument("file", help="The checkpoint file")
    inspect.set_defaults(runner=run_inspect)
    return parser


def aidnet_main(arg_list=None):
    parser = aidnet_cli_parser()
    args = parser.parse_args(arg_list)
    args.runner(args)
