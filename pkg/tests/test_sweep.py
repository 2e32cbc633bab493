"""Field sweeps: magnetization estimators, plans, warm-start hand-off."""

import numpy as np
import pytest

from nhvmc.ansatz import load_checkpoint
from nhvmc.engine import TrainConfig
from nhvmc.sampling import SamplerConfig
from nhvmc.series import e_low
from nhvmc.sweep import (
    SweepPlan,
    energy_per_spin_curve,
    magnetization,
    mean_abs_magnetization,
    param_sha,
    sweep,
)


def spins(*rows):
    return np.array(rows, dtype=np.int8)


class TestMagnetization:
    def test_all_up_is_one(self):
        assert magnetization(spins([1, 1, 1], [1, 1, 1])) == 1.0

    def test_opposite_configs_cancel(self):
        assert magnetization(spins([1, 1, 1], [-1, -1, -1])) == 0.0

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            magnetization(np.empty((0, 4), dtype=np.int8))
        with pytest.raises(ValueError):
            mean_abs_magnetization(np.empty((0, 4), dtype=np.int8))

    def test_weighted_mean(self):
        batch = spins([1, 1], [-1, -1])
        assert magnetization(batch, weights=[3.0, 1.0]) == pytest.approx(0.5)
        assert mean_abs_magnetization(batch, weights=[3.0, 1.0]) == 1.0


class TestSweepPlan:
    def test_default_grid_has_31_points(self):
        grid = SweepPlan().grid
        assert len(grid) == 31
        assert grid[0] == 3.0 and grid[-1] == 0.0

    def test_step_sign_must_match_endpoints(self):
        with pytest.raises(ValueError):
            SweepPlan(eta_start=0.0, eta_end=3.0, step=-0.1)
        with pytest.raises(ValueError):
            SweepPlan(step=0.0)

    def test_explicit_points_must_be_monotone(self):
        assert SweepPlan(points=(0.2, 0.5, 1.0)).grid == [0.2, 0.5, 1.0]
        with pytest.raises(ValueError):
            SweepPlan(points=(0.2, 1.0, 0.5))


def tiny_sweep(tmp_path=None, warm=True, arch="rbm", points=(0.6, 0.5)):
    plan = SweepPlan(points=points, warm_start=warm, fine_steps=8)
    return sweep(
        plan, arch, 4,
        TrainConfig(steps=8, seed=13),
        SamplerConfig(batch=64, seed=13, burn_in=2, thinning=1),
        hidden=6, cell="vanilla", eval_batches=2,
        checkpoint_dir=tmp_path, ed_compare=True, ed_size_cap=6,
    )


class TestSweep:
    def test_points_complete_with_ed_overlay(self, tmp_path):
        points = tiny_sweep(tmp_path)
        assert len(points) == 2
        for pt in points:
            assert not pt.failed
            assert pt.eps_vs_ed is not None and pt.eps_vs_ed >= 0
            assert -1.5 < pt.energy_per_spin.real < 0.5
            assert 0.0 <= pt.abs_m <= 1.0
            assert 0.0 <= pt.mean_abs_m <= 1.0

    def test_warm_start_loads_previous_checkpoint_bit_exact(self, tmp_path):
        points = tiny_sweep(tmp_path)
        saved, _ = load_checkpoint(tmp_path / "rbm_point000.ckpt")
        assert points[1].initial_param_sha == param_sha(saved)

    def test_cold_start_reinitializes_each_point(self, tmp_path):
        points = tiny_sweep(tmp_path, warm=False)
        assert points[0].initial_param_sha != points[1].initial_param_sha

    def test_deterministic_from_master_seed(self, tmp_path):
        a = tiny_sweep(tmp_path / "a")
        b = tiny_sweep(tmp_path / "b")
        for pa, pb in zip(a, b):
            assert pa.energy_per_spin == pb.energy_per_spin
            assert pa.abs_m == pb.abs_m

    def test_warm_start_energy_advantage_at_second_point(self, tmp_path):
        plan = SweepPlan(points=(0.5, 0.45), warm_start=True, fine_steps=150)
        cfg = TrainConfig(steps=150, seed=13)
        scfg = SamplerConfig(batch=128, seed=13, burn_in=5)
        warm = sweep(plan, "rbm", 4, cfg, scfg, hidden=6, eval_batches=1)
        cold_plan = SweepPlan(points=(0.5, 0.45), warm_start=False, fine_steps=150)
        cold = sweep(cold_plan, "rbm", 4, cfg, scfg, hidden=6, eval_batches=1)
        assert (warm[1].initial_energy_per_spin.real
                < cold[1].initial_energy_per_spin.real)


class TestEnergyCurve:
    def test_csv_row_contract(self, tmp_path):
        points = tiny_sweep(tmp_path)
        rows = energy_per_spin_curve(points)
        assert list(rows[0].keys()) == [
            "eta", "xi", "arch", "warm", "energy_per_spin_re",
            "energy_per_spin_im", "abs_m", "eps_vs_ed",
        ]

    def test_series_overlay_delegates_to_low_branch(self, tmp_path):
        points = tiny_sweep(tmp_path, points=(0.2, 0.1))
        se = {0.1: e_low(0.1, 0.01), 0.2: e_low(0.2, 0.02)}
        rows = energy_per_spin_curve(points, se_points=se)
        assert rows[1]["e_series"] == e_low(0.1, 0.01)

    def test_ed_overlay_at_classical_point(self):
        plan = SweepPlan(points=(0.1, 0.0), warm_start=True, fine_steps=5)
        points = sweep(plan, "rbm", 4, TrainConfig(steps=5, seed=13),
                       SamplerConfig(batch=32, seed=13, burn_in=1),
                       hidden=4, eval_batches=1, ed_compare=True, ed_size_cap=6)
        assert points[1].ed_energy_per_spin == pytest.approx(-1.0, abs=1e-10)
