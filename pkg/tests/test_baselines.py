import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from durkit.baselines import (DurationRegressor, FlowMatchConfig, FlowMatchDuration, RatioScaleCalibration,
                              RegressorConfig, euler_integrate, match_parameter_count, ratio_scale_predict,
                              ratio_scale_total, straight_path)
from durkit.nn import count_parameters


class TestRatioScale:
    def test_scales_total(self):
        assert ratio_scale_total(RatioScaleCalibration(10, 80), 3) == 24

    def test_uniform_split(self):
        d = ratio_scale_predict(RatioScaleCalibration(10, 80), 3)
        assert d.total == 24 and d.durations == (8, 8, 8)

    def test_remainder_goes_to_leading_tokens(self):
        # 7 * 10 / 3 = 23.33 -> 23 frames over 7 tokens
        assert ratio_scale_predict(RatioScaleCalibration(3, 10), 7).durations == (4, 4, 3, 3, 3, 3, 3)

    def test_at_least_one_frame_per_token(self):
        assert ratio_scale_predict(RatioScaleCalibration(10, 2), 4).durations == (1, 1, 1, 1)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            RatioScaleCalibration(0, 10)
        with pytest.raises(ValueError):
            ratio_scale_total(RatioScaleCalibration(1, 10), 0)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 50), st.integers(1, 500), st.integers(1, 60), st.integers(2, 4))
    def test_linear_in_length(self, ref_tokens, ref_frames, n, k):
        cal = RatioScaleCalibration(ref_tokens, ref_frames)
        exact = n * k * ref_frames / ref_tokens
        total = ratio_scale_total(cal, n * k)
        assert total == max(n * k, int(np.floor(exact + 0.5)))
        d = ratio_scale_predict(cal, n * k).as_array()
        assert d.max() - d.min() <= 1


def regressor_config(**kw):
    return RegressorConfig(**{"vocab_size": 10, "d_model": 16, "num_heads": 2, "d_ff": 32, "filter_size": 16,
                              "dropout": 0.0, **kw})


class TestRegressor:
    def test_constant_corpus(self):
        torch.manual_seed(0)
        m = DurationRegressor(regressor_config())
        opt = torch.optim.Adam(m.parameters(), lr=1e-2)
        g = torch.Generator().manual_seed(0)
        for _ in range(200):
            ids = torch.randint(3, 10, (8, 6), generator=g)
            mask = torch.ones(8, 6, dtype=torch.bool)
            loss = m.loss(ids, mask, torch.full((8, 6), 8.0))
            opt.zero_grad()
            loss.backward()
            opt.step()
        m.eval()
        pred = m.predict_frames(torch.randint(3, 10, (4, 9), generator=g), torch.ones(4, 9, dtype=torch.bool))
        assert torch.all((pred >= 7) & (pred <= 9))

    def test_batch_invariance(self):
        torch.manual_seed(1)
        m = DurationRegressor(regressor_config()).eval()
        ids = torch.tensor([[4, 5, 6, 7]])
        mask = torch.ones(1, 4, dtype=torch.bool)
        alone = m(ids, mask)
        other = torch.tensor([[8, 9, 3, 0]])
        both = m(torch.cat([ids, other]), torch.cat([mask, torch.tensor([[True, True, True, False]])]))
        torch.testing.assert_close(alone[0], both[0], rtol=0, atol=1e-6)

    def test_padding_does_not_leak(self):
        torch.manual_seed(2)
        m = DurationRegressor(regressor_config()).eval()
        ids = torch.tensor([[4, 5, 6]])
        mask = torch.ones(1, 3, dtype=torch.bool)
        padded = m(torch.tensor([[4, 5, 6, 0, 0]]), torch.tensor([[True, True, True, False, False]]))
        torch.testing.assert_close(m(ids, mask)[0], padded[0, :3], rtol=0, atol=1e-6)

    def test_parameter_matching(self):
        base = regressor_config()
        for target in (5000, 12000, 30000):
            cfg = match_parameter_count(target, base)
            assert abs(count_parameters(DurationRegressor(cfg)) - target) / target < 0.1

    def test_config_errors(self):
        with pytest.raises(ValueError):
            regressor_config(kernel_size=4)
        with pytest.raises(ValueError):
            RegressorConfig.from_dict({"filters": 3})


class TestFlowMatching:
    def test_single_pair_constant_velocity(self):
        # the exact field for one pair is the constant x1 - x0; one Euler step lands on x1
        x0 = torch.tensor([[0.3, -1.2, 2.0]], dtype=torch.float64)
        x1 = torch.tensor([[5.0, 7.0, 1.0]], dtype=torch.float64)
        out = euler_integrate(lambda x, t: x1 - x0, x0, 1)
        torch.testing.assert_close(out, x1, rtol=0, atol=1e-12)
        for steps in (4, 32):
            torch.testing.assert_close(euler_integrate(lambda x, t: x1 - x0, x0, steps), x1, rtol=0, atol=1e-6)

    def test_straight_path(self):
        x0, x1 = torch.zeros(2, 3), torch.ones(2, 3) * 4
        xt, v = straight_path(x0, x1, torch.tensor([0.25, 1.0]))
        torch.testing.assert_close(xt, torch.tensor([[1.0] * 3, [4.0] * 3]))
        torch.testing.assert_close(v, x1 - x0)

    def test_sample_shapes_and_floor(self):
        torch.manual_seed(0)
        m = FlowMatchDuration(FlowMatchConfig(vocab_size=10, d_model=16, d_ff=32, num_steps=4)).eval()
        m.set_normalization(6.0, 2.0)
        ids = torch.tensor([[4, 5, 6, 0], [7, 8, 9, 3]])
        mask = torch.tensor([[True, True, True, False], [True] * 4])
        a = m.sample(ids, mask, torch.Generator().manual_seed(5))
        b = m.sample(ids, mask, torch.Generator().manual_seed(5))
        assert a.shape == (2, 4) and torch.equal(a, b) and a.min() >= 1

    def test_loss_is_finite_and_decreases(self):
        torch.manual_seed(0)
        m = FlowMatchDuration(FlowMatchConfig(vocab_size=10, d_model=16, d_ff=32))
        m.set_normalization(8.0, 3.0)
        opt = torch.optim.Adam(m.parameters(), lr=3e-3)
        g = torch.Generator().manual_seed(0)
        ids = torch.randint(3, 10, (16, 8), generator=g)
        dur = (ids.double() * 1.5).float()
        mask = torch.ones(16, 8, dtype=torch.bool)
        losses = []
        for _ in range(200):
            loss = m.loss(ids, mask, dur, g)
            opt.zero_grad()
            loss.backward()
            opt.step()
            losses.append(loss.item())
        assert np.mean(losses[-50:]) < np.mean(losses[:50])

    def test_config_errors(self):
        with pytest.raises(ValueError):
            FlowMatchConfig(num_steps=0)
        with pytest.raises(ValueError):
            FlowMatchConfig(time_dim=7)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 12), st.integers(1, 9), st.integers(0, 2**16))
    def test_noise_ignores_padding_columns(self, b, n, extra, seed):
        from durkit.baselines.flowmatch import _noise
        short = _noise((b, n), torch.Generator().manual_seed(seed), torch.float32)
        padded = _noise((b, n + extra), torch.Generator().manual_seed(seed), torch.float32)
        assert torch.equal(short, padded[:, :n]) and torch.isfinite(padded).all()

    def test_noise_is_standard_normal(self):
        from durkit.baselines.flowmatch import _noise
        x = _noise((200, 500), torch.Generator().manual_seed(0), torch.float64)
        assert abs(x.mean().item()) < 0.01 and abs(x.std().item() - 1) < 0.01
