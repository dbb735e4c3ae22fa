"""Real-time rule: hand-traced steps, priority/safety properties, batch parity."""

import numpy as np
import pytest

from hes_regkit import (
    RegSignal,
    SocState,
    load_trace_csv,
    rt_dispatch,
    rt_dispatch_batch,
    rt_step,
    save_trace_csv,
    synth_signal,
    validate_trace,
)
from helpers import DT_2S, random_capacity, random_signal, random_system, reference_system


class TestRtStep:
    def setup_method(self):
        self.cfg = reference_system()

    def test_upward_uses_generator_then_battery(self):
        step, _ = rt_step(self.cfg, 12.21, 0.5, SocState(0.5))
        assert step.p_gen == 3.0
        assert step.p_load == 0.0
        assert step.p_charge == 0.0
        assert step.p_discharge == pytest.approx(3.105, abs=1e-12)
        assert step.p_hes == pytest.approx(6.105, abs=1e-12)

    def test_downward_saturates_both_assets(self):
        step, nxt = rt_step(self.cfg, 12.21, -1.0, SocState(0.5))
        assert step.p_load == 3.0
        assert step.p_charge == -5.0
        assert step.p_hes == -8.0
        # charging at 5 MW for 2 s raises SoC by 0.95 * 5 * dt / 5
        assert nxt.e == pytest.approx(0.5 + 0.95 * DT_2S, abs=1e-15)

    def test_empty_battery_cannot_discharge(self):
        step, _ = rt_step(self.cfg, 10.0, 0.2, SocState(0.1))
        assert step.p_discharge == 0.0
        assert step.p_hes == 2.0

    def test_full_battery_cannot_charge(self):
        step, _ = rt_step(self.cfg, 10.0, -1.0, SocState(0.9))
        assert step.p_charge == 0.0
        assert step.p_hes == -3.0

    def test_partial_headroom_throttles_discharge(self):
        cfg = reference_system(dt=0.1)  # big steps so headroom binds
        e = 0.1 + 0.02  # delta_d = 0.95 * 0.02 * 5 / (0.1 * 5) = 0.19
        step, nxt = rt_step(cfg, 20.0, 1.0, SocState(e))
        assert step.p_discharge == pytest.approx(0.19 * 5.0, abs=1e-12)
        assert nxt.e == pytest.approx(0.1, abs=1e-12)  # lands exactly on the floor

    def test_zero_command_idles(self):
        step, nxt = rt_step(self.cfg, 10.0, 0.0, SocState(0.5))
        assert step.p_hes == 0.0
        assert (step.p_gen, step.p_load, step.p_discharge) == (0.0, 0.0, 0.0)
        assert step.p_charge == 0.0
        assert nxt.e == 0.5


class TestRtDispatch:
    def setup_method(self):
        self.cfg = reference_system()

    def test_square_wave_at_reach_tracks_exactly(self):
        sig = synth_signal("square-wave", 1800, DT_2S, 0, amplitude=1.0, period=2)
        trace = rt_dispatch(self.cfg, 8.0, sig)
        assert np.all(trace.p_hes == trace.target)  # +-8 exactly every step
        assert trace.abs_error() == 0.0
        # alternation loses a little energy each cycle but stays interior
        assert trace.soc.min() > 0.4 and trace.soc.max() <= 0.5

    def test_trace_soc_consistent_with_dynamics(self):
        rng = np.random.default_rng(11)
        sig = RegSignal(samples=rng.uniform(-1, 1, 200), dt=DT_2S)
        trace = rt_dispatch(self.cfg, 10.0, sig)
        batt = self.cfg.batt
        e = trace.soc[0]
        for k in range(trace.n_steps):
            de = (
                -(batt.eta_c * trace.p_charge[k] + trace.p_discharge[k] / batt.eta_d)
                * self.cfg.dt
                / batt.energy_capacity
            )
            e = e + de
            assert trace.soc[k + 1] == e  # bitwise identical chain

    def test_output_recombines_assets(self):
        sig = synth_signal("drifting", 128, DT_2S, 5, bias=0.2, noise=0.6)
        trace = rt_dispatch(self.cfg, 9.0, sig)
        recon = trace.p_gen - trace.p_load + trace.p_discharge + trace.p_charge
        assert np.array_equal(recon, trace.p_hes)

    def test_priority_order(self):
        rng = np.random.default_rng(3)
        sig = RegSignal(samples=rng.uniform(-1, 1, 300), dt=DT_2S)
        trace = rt_dispatch(self.cfg, 12.0, sig)
        engaged_d = trace.p_discharge > 1e-12
        assert np.all(trace.p_gen[engaged_d] == self.cfg.gen.p_max)
        engaged_c = trace.p_charge < -1e-12
        assert np.all(trace.p_load[engaged_c] == self.cfg.load.p_max)

    def test_soc_init_override(self):
        sig = synth_signal("square-wave", 16, DT_2S, 0)
        trace = rt_dispatch(self.cfg, 8.0, sig, soc_init=0.2)
        assert trace.soc[0] == 0.2

    def test_rejects_bad_inputs(self):
        sig = synth_signal("square-wave", 16, DT_2S, 0)
        with pytest.raises(ValueError, match="capacity"):
            rt_dispatch(self.cfg, 0.0, sig)
        with pytest.raises(ValueError, match="dt"):
            rt_dispatch(self.cfg, 8.0, RegSignal(samples=np.zeros(4), dt=1.0))
        with pytest.raises(ValueError, match="soc_init"):
            rt_dispatch(self.cfg, 8.0, sig, soc_init=0.99)

    def test_randomized_traces_always_feasible(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            cfg = random_system(rng, dt=float(rng.uniform(0.001, 0.1)))
            sig = random_signal(rng, int(rng.integers(20, 200)), cfg.dt)
            c = random_capacity(rng, cfg, hi=1.6)
            trace = rt_dispatch(cfg, c, sig)
            assert validate_trace(cfg, trace) == []


class TestBatchParity:
    def test_batch_matches_scalar(self):
        cfg = reference_system()
        rng = np.random.default_rng(23)
        matrix = rng.uniform(-1, 1, size=(6, 80))
        batch = rt_dispatch_batch(cfg, 11.0, matrix, DT_2S)
        for i in range(6):
            trace = rt_dispatch(cfg, 11.0, RegSignal(samples=matrix[i], dt=DT_2S))
            assert batch.err_sums[i] == pytest.approx(trace.abs_error(), abs=1e-9)
            assert batch.soc_final[i] == pytest.approx(trace.soc[-1], abs=1e-12)
            assert batch.soc_lowest[i] <= trace.soc[1:].min() + 1e-15
            assert batch.soc_highest[i] >= trace.soc[1:].max() - 1e-15

    def test_batch_extremes_respect_bounds(self):
        rng = np.random.default_rng(29)
        for _ in range(10):
            cfg = random_system(rng, dt=float(rng.uniform(0.005, 0.05)))
            matrix = rng.uniform(-1, 1, size=(40, 60))
            c = random_capacity(rng, cfg, hi=1.5)
            batch = rt_dispatch_batch(cfg, c, matrix, cfg.dt)
            assert batch.gen_max <= cfg.gen.p_max + 1e-9
            assert batch.load_max <= cfg.load.p_max + 1e-9
            assert batch.discharge_max <= cfg.batt.p_max + 1e-9
            assert batch.charge_min >= -cfg.batt.p_max - 1e-9
            assert batch.asset_sign_min >= -1e-12
            assert batch.overlap_max <= 1e-12
            assert batch.soc_lowest.min() >= cfg.batt.soc_min - 1e-12
            assert batch.soc_highest.max() <= cfg.batt.soc_max + 1e-12

    def test_batch_rejects_bad_shapes(self):
        cfg = reference_system()
        with pytest.raises(ValueError, match="2-D"):
            rt_dispatch_batch(cfg, 8.0, np.zeros(5), DT_2S)


class TestTraceCsv:
    def test_round_trip_bit_exact(self, tmp_path):
        cfg = reference_system()
        sig = synth_signal("energy-neutral-random", 50, DT_2S, 9)
        trace = rt_dispatch(cfg, 12.21, sig)
        p = save_trace_csv(tmp_path / "trace.csv", trace, sig.samples, 12.21)
        loaded, r, c = load_trace_csv(p)
        assert c == 12.21
        assert np.array_equal(r, sig.samples)
        for name in ("target", "p_gen", "p_load", "p_discharge", "p_charge", "p_hes", "soc"):
            assert np.array_equal(getattr(loaded, name), getattr(trace, name)), name
        # second serialization is byte-identical
        p2 = save_trace_csv(tmp_path / "trace2.csv", loaded, r, c)
        assert p.read_bytes() == p2.read_bytes()

    def test_rejects_wrong_header(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("# c=1\n# soc_init=0.5\nk,r,oops\n")
        with pytest.raises(ValueError, match="header"):
            load_trace_csv(p)

    def test_rejects_missing_metadata(self, tmp_path):
        cfg = reference_system()
        sig = synth_signal("square-wave", 8, DT_2S, 0)
        trace = rt_dispatch(cfg, 8.0, sig)
        p = save_trace_csv(tmp_path / "t.csv", trace, sig.samples, 8.0)
        body = [ln for ln in p.read_text().splitlines() if not ln.startswith("# c=")]
        p.write_text("\n".join(body) + "\n")
        with pytest.raises(ValueError, match="metadata"):
            load_trace_csv(p)
