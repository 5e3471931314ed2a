"""Network architecture, forward/centering, gradients, sizing, checkpoints."""

import math

import numpy as np
import pytest

from prefbench.comparison import ComparisonModel, ModelKind
from prefbench.data import generate_dataset
from prefbench.errors import ConfigurationError, DomainError
from prefbench.network import (
    MLPArchitecture,
    MLPParameters,
    _forward_cached,
    forward,
    forward_batch,
    init_params,
    load_checkpoint,
    nll_and_gradient,
    param_count,
    param_count_bound,
    save_checkpoint,
    theorem_architecture,
)
from prefbench.rewards import GroundTruthReward, RewardFamily

BT = ComparisonModel(ModelKind.BT)


def zero_params(arch):
    return MLPParameters(
        weights=[np.zeros((o, i)) for i, o in zip(arch.layer_sizes[:-1], arch.layer_sizes[1:])],
        biases=[np.zeros(o) for o in arch.layer_sizes[1:]],
        arch=arch,
    )


def _activation_pattern(params, states):
    _, acts = _forward_cached(params, states)
    return [a > 0 for a in acts[1:]]


def fd_gradient_max_rel_error(params, batch, model, h=1e-5):
    """Full finite-difference sweep over every parameter entry.

    Central differences are a derivative oracle only on the smooth piece of
    the piecewise-linear loss, so perturbations that flip any ReLU
    activation are skipped (zero-init biases plus a dead sample can park
    pre-activations exactly on the kink, where no two-sided slope exists).
    """
    _, grads = nll_and_gradient(params, batch, model)
    states = (
        batch.states
        if hasattr(batch, "states")
        else np.stack([np.asarray(s.s, dtype=float) for s in batch])
    )
    base = _activation_pattern(params, states)
    worst = 0.0
    for arrays, garrays in ((params.weights, grads.weights), (params.biases, grads.biases)):
        for arr, garr in zip(arrays, garrays):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                ix = it.multi_index
                orig = arr[ix]
                arr[ix] = orig + h
                pattern_up = _activation_pattern(params, states)
                up, _ = nll_and_gradient(params, batch, model)
                arr[ix] = orig - h
                pattern_down = _activation_pattern(params, states)
                down, _ = nll_and_gradient(params, batch, model)
                arr[ix] = orig
                crossed = any(
                    not (np.array_equal(b, u) and np.array_equal(b, d))
                    for b, u, d in zip(base, pattern_up, pattern_down)
                )
                if crossed:
                    continue
                fd = (up - down) / (2 * h)
                worst = max(worst, abs(fd - garr[ix]) / max(abs(fd), 1e-8))
    return worst


class TestArchitecture:
    def test_rectangular_shape(self):
        arch = MLPArchitecture.rectangular(10, 64, 4, 2)
        assert arch.layer_sizes == (10, 64, 64, 64, 64, 2)
        assert arch.depth == 4 and arch.width == 64

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            MLPArchitecture(input_dim=3, hidden_widths=(), output_dim=2)
        with pytest.raises(ConfigurationError):
            MLPArchitecture(input_dim=3, hidden_widths=(0,), output_dim=2)


class TestInit:
    def test_deterministic(self):
        arch = MLPArchitecture.rectangular(6, 8, 2, 2)
        a = init_params(arch, np.random.default_rng(5))
        b = init_params(arch, np.random.default_rng(5))
        assert all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))

    def test_he_variance(self):
        # pool first-layer weights across inits: 1e5 draws, fan_in = 10
        arch = MLPArchitecture.rectangular(10, 100, 1, 2)
        rng = np.random.default_rng(0)
        entries = np.concatenate(
            [init_params(arch, rng).weights[0].ravel() for _ in range(100)]
        )
        assert entries.size == 10**5
        assert np.var(entries) == pytest.approx(0.2, rel=0.05)

    def test_biases_zero(self):
        params = init_params(MLPArchitecture.rectangular(4, 5, 2, 2), np.random.default_rng(1))
        assert all(np.all(b == 0) for b in params.biases)


class TestParamCount:
    def test_exact_count_by_shape_enumeration(self):
        # 10*4+4 + 2*(4*4+4) + 4*2+2 = 44 + 40 + 10
        arch = MLPArchitecture.rectangular(10, 4, 3, 2)
        assert param_count(arch) == 94

    def test_bound_formula_values(self):
        assert param_count_bound(4, 3, 10) == 44 + 40 + 5
        assert param_count_bound(1, 1, 1) == 4

    def test_single_output_exact_within_bound(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            w, dep, d = int(rng.integers(1, 40)), int(rng.integers(1, 10)), int(rng.integers(1, 30))
            arch = MLPArchitecture.rectangular(d, w, dep, actions=1)
            assert param_count(arch) <= param_count_bound(w, dep, d)


class TestTheoremArchitecture:
    def test_width_formula(self):
        width, _ = theorem_architecture(10, 1.0, 2**14)
        assert width == 114 * 4 * 100

    def test_depth_trivial_n(self):
        _, depth = theorem_architecture(1, 1.0, 1)
        assert depth == 21 * 4 * math.ceil(math.log2(8))  # 252

    def test_depth_arithmetic_oracle(self):
        _, depth = theorem_architecture(10, 1.0, 2**14)
        m2 = 2 ** (14 * 10 / 24)
        assert depth == 21 * 4 * math.ceil(m2 * math.log2(8 * m2))

    def test_domain(self):
        with pytest.raises(DomainError):
            theorem_architecture(10, 0.0, 100)


class TestForward:
    def test_zero_params_zero_output(self):
        arch = MLPArchitecture.rectangular(3, 4, 2, 2)
        assert np.array_equal(forward(zero_params(arch), np.ones(3)), np.zeros(2))

    def test_centering(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            arch = MLPArchitecture.rectangular(5, int(rng.integers(2, 20)), 2, 3)
            params = init_params(arch, rng)
            states = rng.normal(size=(100, 5))
            out = forward_batch(params, states)
            assert np.max(np.abs(out.sum(axis=1))) <= 1e-9

    def test_hand_built_relu_unit(self):
        # one hidden unit computing ReLU(s1); head routes it to action 0 only,
        # so the centered output is (ReLU(s1)/2, -ReLU(s1)/2)
        arch = MLPArchitecture(input_dim=2, hidden_widths=(1,), output_dim=2)
        params = zero_params(arch)
        params.weights[0][0, 0] = 1.0
        params.weights[1][0, 0] = 1.0
        for s1 in (0.7, -0.3, 2.5):
            out = forward(params, np.array([s1, 9.9]))
            relu = max(s1, 0.0)
            assert out == pytest.approx([relu / 2.0, -relu / 2.0], abs=1e-15)

    def test_first_layer_positive_homogeneity(self):
        rng = np.random.default_rng(4)
        arch = MLPArchitecture.rectangular(4, 6, 3, 2)
        params = init_params(arch, rng)
        states = rng.normal(size=(20, 4))
        _, acts = _forward_cached(params, states)
        scaled = params.copy()
        scaled.weights[0] *= 2.5
        scaled.biases[0] *= 2.5
        _, acts_scaled = _forward_cached(scaled, states)
        assert np.allclose(acts_scaled[1], 2.5 * acts[1], atol=1e-12)

    def test_dimension_mismatch(self):
        params = zero_params(MLPArchitecture.rectangular(3, 4, 1, 2))
        with pytest.raises(DomainError):
            forward(params, np.ones(4))


class TestLikelihoodGradient:
    @pytest.fixture
    def batch(self):
        gt = GroundTruthReward.sample(RewardFamily.SINUSOIDAL, 3, np.random.default_rng(0))
        return generate_dataset(gt, BT, 16, seed=9)

    def test_zero_params_loss_is_log_two(self, batch):
        arch = MLPArchitecture.rectangular(3, 5, 2, 2)
        loss, _ = nll_and_gradient(zero_params(arch), batch.samples, BT)
        assert loss == pytest.approx(math.log(2.0), abs=1e-15)

    def test_gradient_matches_finite_differences(self, batch):
        for seed in range(3):
            params = init_params(
                MLPArchitecture.rectangular(3, 5, 2, 2), np.random.default_rng(seed)
            )
            assert fd_gradient_max_rel_error(params, batch.samples, BT) <= 1e-4

    def test_duplication_invariance(self, batch):
        params = init_params(MLPArchitecture.rectangular(3, 5, 2, 2), np.random.default_rng(3))
        samples = batch.samples
        loss_a, grads_a = nll_and_gradient(params, samples, BT)
        loss_b, grads_b = nll_and_gradient(params, samples + samples, BT)
        assert loss_b == pytest.approx(loss_a, abs=1e-14)
        for ga, gb in zip(grads_a.weights, grads_b.weights):
            assert np.allclose(ga, gb, atol=1e-14)

    def test_uncentered_head_shift_invariance(self, batch):
        params = init_params(MLPArchitecture.rectangular(3, 5, 2, 2), np.random.default_rng(4))
        loss_a, _ = nll_and_gradient(params, batch.samples, BT)
        shifted = params.copy()
        shifted.biases[-1] += 17.3  # common shift of both raw output units
        loss_b, _ = nll_and_gradient(shifted, batch.samples, BT)
        assert loss_b == pytest.approx(loss_a, abs=1e-12)

    def test_empty_batch_rejected(self):
        params = zero_params(MLPArchitecture.rectangular(3, 5, 2, 2))
        with pytest.raises(DomainError):
            nll_and_gradient(params, [], BT)


class TestCheckpoint:
    def test_round_trip_bitwise(self, tmp_path):
        params = init_params(MLPArchitecture.rectangular(7, 9, 3, 2), np.random.default_rng(6))
        path = str(tmp_path / "net.ckpt")
        save_checkpoint(params, path)
        back = load_checkpoint(path)
        assert back.arch == params.arch
        assert all(np.array_equal(a, b) for a, b in zip(back.weights, params.weights))
        assert all(np.array_equal(a, b) for a, b in zip(back.biases, params.biases))

    def test_magic_checked(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
        with pytest.raises(ConfigurationError):
            load_checkpoint(str(path))

    def test_trailing_bytes_rejected(self, tmp_path):
        params = init_params(MLPArchitecture.rectangular(2, 3, 1, 2), np.random.default_rng(7))
        path = str(tmp_path / "net.ckpt")
        save_checkpoint(params, path)
        with open(path, "ab") as fh:
            fh.write(b"\x00")
        with pytest.raises(ConfigurationError):
            load_checkpoint(path)
