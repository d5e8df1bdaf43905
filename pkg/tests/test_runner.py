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
Tests for experiment configuration, the training loop and CSV output.
"""
import pathlib
import statistics
import tempfile
import textwrap
import unittest
from unittest import mock

import numpy as np
import pytest

from aidnet import activations as act
from aidnet import exceptions
from aidnet import metrics
from aidnet import nn
from aidnet import optim
from aidnet import runner
from aidnet import tasks


def small_config(**kwargs):
    values = dict(
        dataset="synth:4x30x8",
        stream=tasks.RANDOM_LABEL,
        tasks=3,
        widths=(12, 12),
        epochs=2,
        batch=16,
        probe_batch=40,
        seed=5,
    )
    values.update(kwargs)
    return runner.ExperimentConfig(**values)


def write_config(path, text):
    path.write_text(textwrap.dedent(text))
    return path


class TestConfigFile(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.path = pathlib.Path(self.tmpdir.name) / "run.cfg"

    def tearDown(self):
        del self.tmpdir

    def test_empty(self):
        write_config(self.path, "# nothing set\n")
        cfg = runner.ExperimentConfig.from_file(self.path)
        self.assertEqual(cfg, runner.ExperimentConfig())

    def test_values(self):
        write_config(
            self.path,
            """
            # A permuted stream.
            dataset = synth:3x20x6
            stream = permuted

            tasks = 4
            widths = 32, 16
            activation = aid
            activation_p = 0.8
            optimizer = sgd
            lr = 0.05
            regularizer = l2_init
            lambda = 0.01
            reset_optimizer = auto
            exclude_previous_label = no
            lr_decay_epochs = 10,20
            """,
        )
        cfg = runner.ExperimentConfig.from_file(self.path)
        self.assertEqual(cfg.dataset, "synth:3x20x6")
        self.assertEqual(cfg.stream, tasks.PERMUTED)
        self.assertEqual(cfg.tasks, 4)
        self.assertEqual(cfg.widths, (32, 16))
        self.assertEqual(cfg.activation_spec(), act.ActivationSpec(act.AID, p=0.8))
        self.assertEqual(cfg.optimizer, optim.SGD)
        self.assertEqual(cfg.learning_rate, 0.05)
        self.assertEqual(cfg.regularizer, optim.L2_INIT)
        self.assertEqual(cfg.lam, 0.01)
        self.assertIsNone(cfg.reset_optimizer)
        self.assertFalse(cfg.exclude_previous_label)
        self.assertEqual(cfg.lr_decay_epochs, (10, 20))

    def test_default_values(self):
        write_config(self.path, "lr = default\nactivation_p = none\n")
        cfg = runner.ExperimentConfig.from_file(self.path)
        self.assertIsNone(cfg.lr)
        self.assertEqual(cfg.learning_rate, optim.DEFAULT_LEARNING_RATES[optim.ADAM])

    def test_duplicate_key(self):
        write_config(self.path, "tasks = 2\ntasks = 3\n")
        with self.assertRaisesRegex(exceptions.ConfigError, "duplicate key 'tasks'"):
            runner.ExperimentConfig.from_file(self.path)

    def test_unknown_key(self):
        write_config(self.path, "learning_rate = 0.1\n")
        with self.assertRaisesRegex(exceptions.ConfigError, "learning_rate"):
            runner.ExperimentConfig.from_file(self.path)

    def test_field_name_of_alias(self):
        write_config(self.path, "lam = 0.1\n")
        cfg = runner.ExperimentConfig.from_file(self.path)
        self.assertEqual(cfg.lam, 0.1)

    def test_missing_separator(self):
        write_config(self.path, "tasks\n")
        with self.assertRaisesRegex(exceptions.ConfigError, ":1:"):
            runner.ExperimentConfig.from_file(self.path)

    def test_bad_values(self):
        for line in ["tasks = ten", "widths = 1,x", "checkpoint = maybe", "lr = fast"]:
            write_config(self.path, line + "\n")
            with self.assertRaises(exceptions.ConfigError):
                runner.ExperimentConfig.from_file(self.path)

    def test_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            runner.ExperimentConfig.from_file(self.path)


class TestConfig(unittest.TestCase):
    def test_validation(self):
        bad = [
            {"stream": "sorted"},
            {"tasks": 0},
            {"widths": ()},
            {"widths": (10, 0)},
            {"optimizer": "rmsprop"},
            {"lr": -1.0},
            {"regularizer": "l1"},
            {"lam": -0.1},
            {"intervention": "prune"},
            {"sp_lambda": 1.5},
            {"redo_tau": -1.0},
            {"epochs": -1},
            {"batch": 0},
            {"seed": -1},
            {"seed": 2**64},
            {"probe_batch": 0},
            {"test_fraction": 1.0},
            {"chunks": 0},
            {"subsample": -1},
            {"warm_fraction": 0.0},
            {"activation": "swish"},
            {"activation": act.DROPOUT, "activation_p": 1.0},
            {"activation": act.AID, "activation_p": 1.5},
            {"activation": act.RRELU, "rrelu_lower": 0.5, "rrelu_upper": 0.25},
            {"activation": act.AID_GENERAL},
        ]
        for kwargs in bad:
            with self.subTest(kwargs=kwargs):
                with self.assertRaises(exceptions.ConfigError):
                    runner.ExperimentConfig(**kwargs)

    def test_config_error_is_value_error(self):
        with self.assertRaises(ValueError):
            runner.ExperimentConfig(tasks=0)

    def test_activation_defaults(self):
        cases = [
            (act.RELU, act.ActivationSpec(act.RELU)),
            (act.AID, act.ActivationSpec(act.AID, p=0.9)),
            (act.AID_PQ, act.ActivationSpec(act.AID_PQ, p=0.1, q=0.9)),
            (act.DROPOUT, act.ActivationSpec(act.DROPOUT, p=0.1)),
            (act.DROPRELU, act.ActivationSpec(act.DROPRELU, p=0.1)),
            (act.MOD_LEAKY_RELU, act.ActivationSpec(act.MOD_LEAKY_RELU, alpha=0.9)),
            (act.RRELU, act.ActivationSpec(act.RRELU, lower=0.125, upper=1 / 3)),
            (act.CRELU, act.ActivationSpec(act.CRELU)),
        ]
        for kind, spec in cases:
            cfg = runner.ExperimentConfig(activation=kind)
            self.assertEqual(cfg.activation_spec(), spec)

    def test_general_scheme(self):
        cfg = runner.ExperimentConfig(
            activation=act.AID_GENERAL, aid_boundaries=[0.0], aid_probs=[0.9, 0.1]
        )
        spec = cfg.activation_spec()
        self.assertEqual(spec.scheme.boundaries, (0.0,))
        self.assertEqual(spec.scheme.probs, (0.9, 0.1))

    def test_resets_optimizer(self):
        for stream in [tasks.PERMUTED, tasks.RANDOM_LABEL]:
            self.assertFalse(runner.ExperimentConfig(stream=stream).resets_optimizer)
        for stream in [tasks.CHUNKED_FULL, tasks.CHUNKED_LIMITED, tasks.WARM_START]:
            self.assertTrue(runner.ExperimentConfig(stream=stream).resets_optimizer)
        cfg = runner.ExperimentConfig(stream=tasks.PERMUTED, reset_optimizer=True)
        self.assertTrue(cfg.resets_optimizer)
        cfg = runner.ExperimentConfig(stream=tasks.WARM_START, reset_optimizer=False)
        self.assertFalse(cfg.resets_optimizer)

    def test_asdict(self):
        cfg = small_config(lam=0.25, regularizer=optim.L2)
        d = cfg.asdict()
        self.assertEqual(d["lambda"], 0.25)
        self.assertNotIn("lam", d)
        self.assertEqual(d["widths"], [12, 12])
        self.assertEqual(runner.ExperimentConfig.from_dict(d), cfg)

    def test_replace(self):
        cfg = small_config()
        other = cfg.replace(seed=6)
        self.assertEqual(other.seed, 6)
        self.assertEqual(cfg.seed, 5)
        with self.assertRaises(exceptions.ConfigError):
            cfg.replace(tasks=0)


class TestSetup(unittest.TestCase):
    def test_dims(self):
        exp = runner.setup_experiment(small_config())
        self.assertEqual(exp.net.dims, [8, 12, 12, 4])
        self.assertEqual(len(exp.heldout), 0)

    def test_heldout(self):
        exp = runner.setup_experiment(small_config(test_fraction=0.25))
        self.assertEqual(len(exp.heldout), 30)
        self.assertEqual(len(exp.stream.base), 90)

    def test_subsample(self):
        exp = runner.setup_experiment(small_config(subsample=50))
        self.assertEqual(len(exp.stream.base), 50)

    def test_measurement_batch_from_training_data(self):
        exp = runner.setup_experiment(small_config())
        self.assertEqual(len(exp.probe), 40)
        rows = {tuple(x) for x in exp.stream.base.X}
        self.assertTrue(all(tuple(x) in rows for x in exp.probe.X))

    def test_measurement_batch_from_heldout(self):
        exp = runner.setup_experiment(small_config(test_fraction=0.25, probe_batch=20))
        self.assertEqual(len(exp.probe), 20)
        rows = {tuple(x) for x in exp.heldout.X}
        self.assertTrue(all(tuple(x) in rows for x in exp.probe.X))

    def test_measurement_batch_larger_than_data(self):
        exp = runner.setup_experiment(small_config(test_fraction=0.25))
        self.assertTrue(exp.probe.equals(exp.heldout))

    def test_measurement_batch_independent_of_model(self):
        a = runner.setup_experiment(small_config())
        b = runner.setup_experiment(small_config(activation=act.AID, widths=(5,)))
        self.assertTrue(a.probe.equals(b.probe))

    def test_bad_stream_settings(self):
        cfg = small_config(stream=tasks.CHUNKED_FULL, chunks=200)
        with self.assertRaises(exceptions.ConfigError):
            runner.setup_experiment(cfg)

    def test_bad_dataset(self):
        with self.assertRaises(exceptions.ConfigError):
            runner.setup_experiment(small_config(dataset="synth:4x30"))

    def test_activation_does_not_change_tasks(self):
        a = runner.setup_experiment(small_config())
        b = runner.setup_experiment(small_config(activation=act.AID))
        for t in range(3):
            ta = tasks.next_task(a.stream, t)
            tb = tasks.next_task(b.stream, t)
            self.assertTrue(np.array_equal(ta.X, tb.X))
            self.assertTrue(np.array_equal(ta.labels, tb.labels))
        for t in range(3):
            pa = a.data_rng(tasks.SHUFFLE_KEY, t, 0).permutation(90)
            pb = b.data_rng(tasks.SHUFFLE_KEY, t, 0).permutation(90)
            self.assertTrue(np.array_equal(pa, pb))

    def test_initial_networks_match_for_same_widths(self):
        a = runner.setup_experiment(small_config())
        b = runner.setup_experiment(small_config(activation=act.AID))
        for p, q in zip(a.net.parameters(), b.net.parameters()):
            self.assertTrue(np.array_equal(p, q))


class TestRunExperiment(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.dir = pathlib.Path(self.tmpdir.name)

    def tearDown(self):
        del self.tmpdir

    def test_records(self):
        records = runner.run_experiment(small_config())
        self.assertEqual([r.task for r in records], [0, 1, 2])
        self.assertTrue(all(r.split == metrics.TRAIN_SPLIT for r in records))
        self.assertTrue(all(r.epoch == 2 for r in records))
        self.assertTrue(all(r.loss is None for r in records))

    def test_heldout_records(self):
        records = runner.run_experiment(small_config(test_fraction=0.25))
        self.assertEqual([r.task for r in records], [0, 0, 1, 1, 2, 2])
        self.assertEqual(
            [r.split for r in records], [metrics.TRAIN_SPLIT, metrics.TEST_SPLIT] * 3
        )

    def test_extended(self):
        records = runner.run_experiment(small_config(extended_metrics=True))
        for record in records:
            self.assertGreater(record.weight_norm, 0)
            self.assertGreater(record.loss, 0)

    def test_deterministic(self):
        for kind in [act.RELU, act.AID, act.RRELU, act.FOURIER]:
            cfg = small_config(activation=kind, stream=tasks.PERMUTED)
            paths = [self.dir / f"{kind}_{j}.csv" for j in range(2)]
            for path in paths:
                runner.emit_csv(runner.run_experiment(cfg), path)
            self.assertEqual(paths[0].read_bytes(), paths[1].read_bytes())

    def test_seed_changes_output(self):
        a = runner.run_experiment(small_config(seed=1))
        b = runner.run_experiment(small_config(seed=2))
        self.assertNotEqual(a, b)

    def test_separable_data_fitted(self):
        cfg = runner.ExperimentConfig(
            dataset="synth:3x60x8x20",
            stream=tasks.PERMUTED,
            tasks=1,
            widths=(16,),
            activation=act.IDENTITY,
            lr=0.01,
            epochs=100,
            batch=30,
            seed=3,
        )
        records = runner.run_experiment(cfg)
        self.assertGreaterEqual(records[0].accuracy, 0.99)

    def test_untrained_accuracy_near_chance(self):
        cfg = small_config(dataset="synth:4x100x8", tasks=1, epochs=0)
        records = runner.run_experiment(cfg)
        self.assertAlmostEqual(records[0].accuracy, 0.25, delta=0.1)

    def test_all_streams(self):
        for stream in tasks.STREAM_KINDS:
            num_tasks = 2 if stream == tasks.WARM_START else 3
            cfg = small_config(stream=stream, tasks=num_tasks, chunks=3)
            records = runner.run_experiment(cfg)
            self.assertEqual(len(records), num_tasks)

    def test_measurement_batch_fixed_across_tasks(self):
        for stream in [tasks.RANDOM_LABEL, tasks.CHUNKED_LIMITED]:
            cfg = small_config(stream=stream, tasks=3, chunks=3, probe_batch=10)
            exp = runner.setup_experiment(cfg)
            with mock.patch.object(
                metrics, "measure", wraps=metrics.measure
            ) as measure:
                runner.run_experiment(cfg, exp)
            self.assertEqual(measure.call_count, 3)
            for call in measure.call_args_list:
                self.assertTrue(np.array_equal(call.kwargs["probe"], exp.probe.X))

    def test_measurement_batch_follows_permutation(self):
        cfg = small_config(stream=tasks.PERMUTED, test_fraction=0.25, probe_batch=10)
        exp = runner.setup_experiment(cfg)
        with mock.patch.object(metrics, "measure", wraps=metrics.measure) as measure:
            runner.run_experiment(cfg, exp)
        probes = [call.kwargs["probe"] for call in measure.call_args_list]
        self.assertEqual(len(probes), 6)
        for t in range(3):
            expected = exp.probe.X[:, exp.stream.permutation(t)]
            self.assertTrue(np.array_equal(probes[2 * t], expected))
            self.assertTrue(np.array_equal(probes[2 * t + 1], expected))

    def test_optimizer_reset_at_boundaries(self):
        cfg = small_config(stream=tasks.CHUNKED_LIMITED, chunks=3)
        exp = runner.setup_experiment(cfg)
        with mock.patch.object(
            exp.opt, "reset_state", wraps=exp.opt.reset_state
        ) as reset:
            runner.run_experiment(cfg, exp)
        self.assertEqual(reset.call_count, 2)

    def test_no_optimizer_reset(self):
        cfg = small_config(
            stream=tasks.CHUNKED_LIMITED, chunks=3, reset_optimizer=False
        )
        exp = runner.setup_experiment(cfg)
        with mock.patch.object(exp.opt, "reset_state") as reset:
            runner.run_experiment(cfg, exp)
        reset.assert_not_called()


class TestDivergence(unittest.TestCase):
    def test_diverged_task_recorded(self):
        original = runner.train_task

        def train_task(exp, task, t):
            if t == 1:
                raise exceptions.NonFiniteError("Loss diverged")
            return original(exp, task, t)

        with mock.patch.object(runner, "train_task", side_effect=train_task):
            with self.assertLogs("aidnet.runner", "WARNING") as logs:
                records = runner.run_experiment(small_config())
        self.assertEqual(len(records), 3)
        self.assertEqual(records[1], metrics.MetricsRecord.diverged_task(1, 2, "train"))
        self.assertGreater(records[2].accuracy, 0)
        self.assertIn("Task 1 diverged", logs.output[0])

    def test_nan_loss(self):
        with mock.patch.object(
            nn, "softmax_cross_entropy", return_value=(float("nan"), None)
        ):
            records = runner.run_experiment(small_config())
        self.assertEqual(len(records), 3)
        for record in records:
            self.assertEqual(record.accuracy, 0.0)
            self.assertEqual(record.dormant_ratio, 1.0)


class TestInterventions(unittest.TestCase):
    def run_first_task(self, **kwargs):
        exp = runner.setup_experiment(small_config(**kwargs))
        runner.run_task(exp, 0)
        return exp

    def assert_at_initial(self, net):
        for p, p0 in zip(net.parameters(), net.initial_parameters()):
            self.assertTrue(np.array_equal(p, p0))

    def test_none(self):
        exp = self.run_first_task()
        moved = any(
            not np.array_equal(p, p0)
            for p, p0 in zip(exp.net.parameters(), exp.net.initial_parameters())
        )
        self.assertTrue(moved)

    def test_full_reset(self):
        exp = self.run_first_task(intervention=runner.FULL_RESET)
        self.assert_at_initial(exp.net)
        self.assertIsNone(exp.opt.m)

    def test_shrink_perturb_full(self):
        exp = self.run_first_task(intervention=runner.SHRINK_PERTURB, sp_lambda=1.0)
        self.assert_at_initial(exp.net)

    def test_shrink_perturb_partial(self):
        with mock.patch.object(optim, "shrink_perturb") as shrink:
            exp = self.run_first_task(
                intervention=runner.SHRINK_PERTURB, sp_lambda=0.3
            )
        shrink.assert_called_once_with(exp.net, 0.3)

    def test_redo(self):
        with mock.patch.object(
            optim, "redo_reset", return_value=(None, [0, 0])
        ) as redo:
            exp = self.run_first_task(intervention=runner.REDO, redo_tau=0.1)
        args = redo.call_args.args
        self.assertIs(args[0], exp.net)
        self.assertEqual(args[1].shape, (40, 8))
        self.assertTrue(np.array_equal(args[1], exp.probe.X))
        self.assertEqual(args[2], 0.1)
        self.assertIs(args[4], exp.opt)

    def test_not_after_last_task(self):
        exp = runner.setup_experiment(
            small_config(tasks=1, intervention=runner.FULL_RESET)
        )
        runner.run_task(exp, 0)
        moved = any(
            not np.array_equal(p, p0)
            for p, p0 in zip(exp.net.parameters(), exp.net.initial_parameters())
        )
        self.assertTrue(moved)


class TestCsv(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.path = pathlib.Path(self.tmpdir.name) / "metrics.csv"

    def tearDown(self):
        del self.tmpdir

    def test_round_trip(self):
        records = runner.run_experiment(small_config(test_fraction=0.25))
        runner.emit_csv(records, self.path)
        self.assertEqual(runner.read_csv(self.path), records)

    def test_round_trip_extended(self):
        records = runner.run_experiment(small_config(extended_metrics=True))
        runner.emit_csv(records, self.path)
        self.assertEqual(runner.read_csv(self.path), records)

    def test_header(self):
        records = runner.run_experiment(small_config())
        runner.emit_csv(records, self.path)
        lines = self.path.read_text().splitlines()
        self.assertEqual(lines[0], ",".join(runner.CSV_FIELDS))
        self.assertEqual(len(lines), 4)
        self.assertEqual(lines.count(lines[0]), 1)

    def test_float_format(self):
        record = metrics.MetricsRecord(0, 1, "train", 0.1, 1 / 3, 5, -0.2)
        runner.emit_csv([record], self.path)
        row = self.path.read_text().splitlines()[1]
        self.assertEqual(
            row,
            "0,1,train,0.10000000000000001,0.33333333333333331,5,"
            "-0.20000000000000001",
        )

    def test_extended_columns(self):
        record = metrics.MetricsRecord(0, 1, "train", 0.5, 0.0, 2, 0.0, loss=1.5)
        runner.emit_csv([record], self.path)
        header = self.path.read_text().splitlines()[0]
        self.assertEqual(
            header, ",".join(runner.CSV_FIELDS + metrics.EXTENDED_FIELDS)
        )
        runner.emit_csv([record], self.path, extended=False)
        header = self.path.read_text().splitlines()[0]
        self.assertEqual(header, ",".join(runner.CSV_FIELDS))

    def test_diverged_column(self):
        records = [
            metrics.MetricsRecord(0, 1, "train", 0.5, 0.0, 2, 0.0),
            metrics.MetricsRecord.diverged_task(1, 1, "train"),
        ]
        runner.emit_csv(records, self.path)
        lines = self.path.read_text().splitlines()
        self.assertEqual(lines[0], ",".join(runner.CSV_FIELDS + ("diverged",)))
        self.assertTrue(lines[1].endswith(",0"))
        self.assertEqual(lines[2], "1,1,train,0,1,0,0,1")
        self.assertEqual(runner.read_csv(self.path), records)

    def test_diverged_round_trip(self):
        original = runner.train_task

        def train_task(exp, task, t):
            if t == 2:
                raise exceptions.NonFiniteError("Loss diverged")
            return original(exp, task, t)

        with mock.patch.object(runner, "train_task", side_effect=train_task):
            records = runner.run_experiment(small_config(extended_metrics=True))
        runner.emit_csv(records, self.path)
        header = self.path.read_text().splitlines()[0]
        self.assertTrue(header.endswith(",loss,diverged"))
        self.assertEqual(
            [r.diverged for r in runner.read_csv(self.path)], [False, False, True]
        )

    def test_empty(self):
        with self.assertRaises(ValueError):
            runner.emit_csv([], self.path)
        self.assertFalse(self.path.exists())
        self.assertEqual(list(self.path.parent.iterdir()), [])

    def test_missing_columns(self):
        self.path.write_text("task,epoch\n0,1\n")
        with self.assertRaises(exceptions.FileFormatError):
            runner.read_csv(self.path)


def median_run(activation, seed, **kwargs):
    # 1,600 samples, each as wide as a flattened 28x28 image
    cfg = runner.ExperimentConfig(
        dataset="synth:10x160x784",
        stream=tasks.RANDOM_LABEL,
        tasks=20,
        widths=(100, 100, 100),
        activation=activation,
        optimizer=optim.ADAM,
        lr=1e-3,
        epochs=100,
        batch=64,
        seed=seed,
        **kwargs,
    )
    records = runner.run_experiment(cfg)
    return records[0], records[-1]


TRAINABILITY_SEEDS = [1, 2, 3]


@pytest.fixture(scope="module")
def trainability_runs():
    return {
        kind: [median_run(kind, seed) for seed in TRAINABILITY_SEEDS]
        for kind in [act.RELU, act.AID]
    }


@pytest.mark.slow
class TestTrainability:
    """
    Random-label streams at desk scale: vanilla ReLU networks lose the
    ability to fit new labels while AID networks keep it.
    """

    def median_drop(self, runs, kind):
        return statistics.median(
            first.accuracy - last.accuracy for first, last in runs[kind]
        )

    def final_median(self, runs, kind, name):
        return statistics.median(getattr(last, name) for _, last in runs[kind])

    def test_relu_loses_trainability(self, trainability_runs):
        assert self.median_drop(trainability_runs, act.RELU) >= 0.10

    def test_aid_keeps_trainability(self, trainability_runs):
        assert self.median_drop(trainability_runs, act.AID) <= 0.05

    def test_aid_drops_less(self, trainability_runs):
        aid = self.median_drop(trainability_runs, act.AID)
        assert aid < self.median_drop(trainability_runs, act.RELU)

    def test_dormant_ratio(self, trainability_runs):
        relu = self.final_median(trainability_runs, act.RELU, "dormant_ratio")
        aid = self.final_median(trainability_runs, act.AID, "dormant_ratio")
        assert relu > aid

    def test_effective_rank(self, trainability_runs):
        relu = self.final_median(trainability_runs, act.RELU, "srank")
        aid = self.final_median(trainability_runs, act.AID, "srank")
        assert aid > relu
