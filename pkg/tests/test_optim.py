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
Tests for the optimizers, regularizers and task-boundary interventions.
"""
import unittest

import numpy as np
import pytest

from aidnet import activations as act
from aidnet import nn
from aidnet import numkit
from aidnet import optim


def relu_network(widths=(4,), input_width=3, num_classes=2, seed=1, kind=act.RELU):
    return nn.build_network(
        input_width,
        widths,
        num_classes,
        act.ActivationSpec(kind),
        numkit.Rng(seed),
        match_parameters=False,
    )


class TestRegularizer(unittest.TestCase):
    def test_none(self):
        self.assertIsNone(optim.RegularizerSpec().gradient(np.ones(2), np.zeros(2)))

    def test_l2(self):
        reg = optim.RegularizerSpec(optim.L2, 0.5)
        gradient = reg.gradient(np.array([2.0, -4.0]), None)
        self.assertTrue(np.array_equal(gradient, [1, -2]))
        self.assertTrue(np.all(reg.gradient(np.zeros(3), None) == 0))

    def test_l2_init(self):
        reg = optim.RegularizerSpec(optim.L2_INIT, 0.5)
        theta = numkit.Rng(1).normal(5)
        self.assertTrue(np.all(reg.gradient(theta, theta.copy()) == 0))
        np.testing.assert_allclose(
            reg.gradient(np.array([3.0]), np.array([1.0])), [1.0], rtol=1e-15
        )

    def test_validation(self):
        with self.assertRaises(ValueError):
            optim.RegularizerSpec("l1", 0.1)
        with self.assertRaises(ValueError):
            optim.RegularizerSpec(optim.L2, -0.1)
        with self.assertRaises(ValueError):
            optim.RegularizerSpec(optim.L2, np.nan)


class TestStep(unittest.TestCase):
    def test_sgd(self):
        opt = optim.OptimizerState(optim.SGD, lr=0.1)
        params = [np.array([1.0])]
        optim.step(opt, params, [np.array([2.0])])
        self.assertAlmostEqual(params[0][0], 0.8, places=15)
        self.assertEqual(opt.t, 1)

    def test_sgd_l2(self):
        opt = optim.OptimizerState(optim.SGD, lr=0.1)
        params = [np.array([2.0])]
        reg = optim.RegularizerSpec(optim.L2, 0.5)
        optim.step(opt, params, [np.array([0.0])], reg)
        self.assertAlmostEqual(params[0][0], 1.9, places=15)

    def test_adam_first_step(self):
        opt = optim.OptimizerState(optim.ADAM, lr=1e-3)
        params = [np.zeros(3)]
        optim.step(opt, params, [np.array([3.0, -0.5, 1e-3])])
        np.testing.assert_allclose(params[0], [-1e-3, 1e-3, -1e-3], rtol=1e-4)

    def test_adam_zero_gradient(self):
        opt = optim.OptimizerState(optim.ADAM)
        params = [np.ones(2)]
        optim.step(opt, params, [np.zeros(2)])
        self.assertTrue(np.array_equal(params[0], np.ones(2)))

    def test_default_learning_rates(self):
        self.assertEqual(optim.OptimizerState(optim.ADAM).lr, 1e-3)
        self.assertEqual(optim.OptimizerState(optim.SGD).lr, 3e-2)

    def test_validation(self):
        with self.assertRaises(ValueError):
            optim.OptimizerState("rmsprop")
        with self.assertRaises(ValueError):
            optim.OptimizerState(optim.SGD, lr=0.0)
        opt = optim.OptimizerState(optim.SGD)
        with self.assertRaises(ValueError):
            optim.step(opt, [np.ones(2)], [])
        with self.assertRaises(ValueError):
            optim.step(opt, [np.ones(2)], [np.ones(3)])

    def test_purity(self):
        rng = numkit.Rng(3)
        grads = [rng.normal((3, 2)), rng.normal(3)]
        start = [rng.normal((3, 2)), rng.normal(3)]
        results = []
        for _ in range(2):
            opt = optim.OptimizerState(optim.ADAM, lr=0.01)
            params = [p.copy() for p in start]
            for _ in range(3):
                optim.step(opt, params, grads, optim.RegularizerSpec(optim.L2, 0.1))
            results.append(params)
        for a, b in zip(*results):
            self.assertTrue(np.array_equal(a, b))

    def test_reset_state(self):
        opt = optim.OptimizerState(optim.ADAM)
        optim.step(opt, [np.zeros(2)], [np.ones(2)])
        self.assertIsNotNone(opt.m)
        opt.reset_state()
        self.assertIsNone(opt.m)
        self.assertIsNone(opt.v)
        self.assertEqual(opt.t, 0)

    def test_apply_step_touches(self):
        net = relu_network()
        X = numkit.Rng(2).normal((5, 3))
        logits, trace = nn.forward(net, X, act.TRAIN)
        _, grad = nn.softmax_cross_entropy(logits, np.zeros(5, int))
        nn.backward(net, trace, grad)
        generation = net.generation
        before = net.layers[0].W.copy()
        optim.apply_step(optim.OptimizerState(optim.SGD), net)
        self.assertEqual(net.generation, generation + 1)
        self.assertFalse(np.array_equal(net.layers[0].W, before))


class TestStepDecay(unittest.TestCase):
    def test_milestones(self):
        schedule = optim.StepDecay((10, 20))
        self.assertEqual(schedule.learning_rate(0.1, 0), 0.1)
        self.assertAlmostEqual(schedule.learning_rate(0.1, 10), 0.01)
        self.assertAlmostEqual(schedule.learning_rate(0.1, 25), 0.001)

    def test_no_milestones(self):
        self.assertEqual(optim.StepDecay().learning_rate(0.5, 100), 0.5)


class TestShrinkPerturb(unittest.TestCase):
    def perturbed(self):
        net = relu_network()
        for p in net.parameters():
            p += 1.0
        return net

    def test_zero_is_noop(self):
        net = self.perturbed()
        before = [p.copy() for p in net.parameters()]
        optim.shrink_perturb(net, 0.0)
        for p, q in zip(net.parameters(), before):
            self.assertTrue(np.array_equal(p, q))

    def test_one_resets(self):
        net = self.perturbed()
        optim.shrink_perturb(net, 1.0)
        for p, p0 in zip(net.parameters(), net.initial_parameters()):
            self.assertTrue(np.array_equal(p, p0))

    def test_example(self):
        layers = [
            nn.LinearLayer([[5.0]], [5.0], W0=[[0.0]], b0=[0.0]),
            nn.LinearLayer([[5.0]], [5.0], W0=[[0.0]], b0=[0.0]),
        ]
        net = nn.Network(layers, act.ActivationSpec(act.RELU))
        optim.shrink_perturb(net, 0.2)
        for p in net.parameters():
            self.assertEqual(p.ravel()[0], 4.0)

    def test_composition(self):
        a = self.perturbed()
        b = a.clone()
        optim.shrink_perturb(a, 0.2)
        optim.shrink_perturb(a, 0.3)
        optim.shrink_perturb(b, 1 - 0.8 * 0.7)
        for p, q in zip(a.parameters(), b.parameters()):
            np.testing.assert_allclose(p, q, rtol=1e-12, atol=1e-15)

    def test_range(self):
        with self.assertRaises(ValueError):
            optim.shrink_perturb(relu_network(), 1.5)

    def test_touches(self):
        net = relu_network()
        generation = net.generation
        optim.shrink_perturb(net, 0.5)
        self.assertGreater(net.generation, generation)


class TestRedo:
    def batch(self, rows=50):
        return numkit.Rng(9).normal((rows, 3))

    def silenced_network(self):
        net = relu_network()
        net.layers[0].W[1] = 0.0
        net.layers[0].b[1] = -1.0
        return net

    def test_nothing_dormant(self):
        net = relu_network()
        before = [p.copy() for p in net.parameters()]
        _, counts = optim.redo_reset(net, self.batch(), 0.0, numkit.Rng(1))
        assert counts == [0]
        for p, q in zip(net.parameters(), before):
            assert np.array_equal(p, q)

    def test_silenced_unit(self):
        net = self.silenced_network()
        original = net.layers[0].W.copy()
        _, counts = optim.redo_reset(net, self.batch(), 0.0, numkit.Rng(1))
        assert counts == [1]
        first, second = net.layers
        assert not np.all(first.W[1] == 0)
        assert first.b[1] == 0
        assert np.all(second.W[:, 1] == 0)
        others = [0, 2, 3]
        assert np.array_equal(first.W[others], original[others])
        assert np.all(second.W[:, others] != 0)

    def test_rerun_resets_nothing_new(self):
        net = self.silenced_network()
        X = self.batch()
        optim.redo_reset(net, X, 0.0, numkit.Rng(1))
        _, counts = optim.redo_reset(net, X, 0.0, numkit.Rng(2))
        assert counts == [0]

    def test_all_silent_layer(self):
        net = relu_network()
        net.layers[0].W[:] = 0.0
        net.layers[0].b[:] = -1.0
        _, counts = optim.redo_reset(net, self.batch(), 0.0, numkit.Rng(1))
        assert counts == [4]

    def test_clears_moments(self):
        net = self.silenced_network()
        opt = optim.OptimizerState(optim.ADAM)
        for p, g in zip(net.parameters(), net.gradients()):
            g[:] = 1.0
        optim.apply_step(opt, net)
        optim.redo_reset(net, self.batch(), 0.0, numkit.Rng(1), opt)
        for moments in (opt.m, opt.v):
            assert np.all(moments[0][1] == 0)
            assert moments[1][1] == 0
            assert np.all(moments[2][:, 1] == 0)
            assert np.all(moments[0][0] != 0)
            assert np.all(moments[2][:, 0] != 0)

    def test_width_doubling_unit(self):
        net = relu_network(kind=act.CRELU, widths=(8,))
        assert net.layers[0].fan_out == 4
        net.layers[0].W[2] = 0.0
        net.layers[0].b[2] = 0.0
        _, counts = optim.redo_reset(net, self.batch(), 0.0, numkit.Rng(1))
        assert counts == [1]
        following = net.layers[1]
        assert np.all(following.W[:, [2, 6]] == 0)
        assert np.all(following.W[:, [0, 1, 3, 4, 5, 7]] != 0)

    def test_negative_tau(self):
        with pytest.raises(ValueError):
            optim.redo_reset(relu_network(), self.batch(), -1.0, numkit.Rng(1))
