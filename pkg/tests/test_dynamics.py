import math

import numpy as np
import pytest

from dressedspin.core import Basis, StateVector, basis_state
from dressedspin.dynamics import (
    Constant,
    ControlWaveform,
    LinearRamp,
    PulseSchedule,
    Segment,
    Sinusoid,
    Square,
    StepControl,
    _step_unitaries,
    constant_schedule,
    evolve,
    evolve_unitary,
    spectrum_scan,
)
from dressedspin.model import DoubleDotParams, SingleQubitParams, generalized_rabi

UP = basis_state(Basis.ROT2, "up")


class TestWaveforms:
    def test_square_duty_validation(self):
        with pytest.raises(ValueError, match="duty"):
            Square(1.0, 0.0, period=1e-6, duty=1.5)

    def test_sinusoid_frequency_validation(self):
        with pytest.raises(ValueError, match="frequency"):
            Sinusoid(1.0, frequency=0.0)

    def test_segment_duration_validation(self):
        with pytest.raises(ValueError, match="duration"):
            Segment(0.0)

    def test_duplicate_targets_rejected(self):
        c = ControlWaveform("eps", Constant(1.0))
        with pytest.raises(ValueError, match="duplicate"):
            Segment(1e-6, (c, c))

    def test_square_sampling(self):
        sq = Square(2.0, -1.0, period=1.0, duty=0.25, phase_offset=0.0)
        t = np.array([0.1, 0.3, 1.1, 1.6])
        assert np.allclose(sq.sample(t, 2.0), [2.0, -1.0, 2.0, -1.0])

    def test_linear_ramp_endpoints(self):
        r = LinearRamp(1.0, 3.0)
        assert np.allclose(r.sample(np.array([0.0, 0.5, 1.0]), 1.0), [1.0, 2.0, 3.0])


class TestEvolve:
    def test_empty_schedule_returns_input(self):
        sched = PulseSchedule((), Basis.ROT2)
        res = evolve(sched, SingleQubitParams(omega_r=1e6, delta_nu=0.0), UP)
        assert res.converged and res.steps_used == 0
        assert np.allclose(res.final_state.amplitudes, UP.amplitudes)

    def test_basis_mismatch(self):
        sched = constant_schedule(Basis.DRESSED2, 1e-6)
        from dressedspin.core import BasisMismatchError

        with pytest.raises(BasisMismatchError):
            evolve(sched, SingleQubitParams(omega_r=1e6, delta_nu=0.0), UP)

    def test_resonant_pi_pulse(self):
        p = SingleQubitParams(omega_r=10e6, delta_nu=0.0)
        sched = constant_schedule(Basis.ROT2, 50e-9)
        res = evolve(sched, p, UP, StepControl(tolerance=1e-9))
        assert res.converged
        assert res.final_state.populations()[1] == pytest.approx(1.0, abs=1e-8)

    def test_off_resonant_peak_transfer(self):
        # at delta_nu = omega_r the maximum flip probability is 1/2, reached
        # at half a generalized-Rabi period
        omega = 10e6
        for dnu, expect in ((omega, 0.5), (0.0, 1.0)):
            p = SingleQubitParams(omega_r=omega, delta_nu=dnu)
            t_peak = 0.5 / generalized_rabi(omega, dnu)
            res = evolve(constant_schedule(Basis.ROT2, t_peak), p, UP, StepControl(tolerance=1e-9))
            assert res.final_state.populations()[1] == pytest.approx(expect, abs=1e-6)

    def test_norm_conserved_along_trajectory(self):
        p = SingleQubitParams(omega_r=10e6, delta_nu=3e6)
        wave = ControlWaveform("delta_nu", Sinusoid(1e6, 10e6, 0.0))
        sched = PulseSchedule((Segment(2e-6, (wave,)),), Basis.DRESSED2)
        res = evolve(sched, p, basis_state(Basis.DRESSED2, 0), StepControl(tolerance=1e-6), n_samples=50)
        assert res.converged
        for _, pops in res.samples:
            assert abs(float(np.sum(pops)) - 1.0) < 1e-9

    def test_halving_self_consistency(self):
        p = SingleQubitParams(omega_r=10e6, delta_nu=0.0)
        wave = ControlWaveform("delta_nu", LinearRamp(0.0, 5e6))
        sched = PulseSchedule((Segment(1e-6, (wave,)),), Basis.DRESSED2)
        tol = 1e-6
        res = evolve(sched, p, basis_state(Basis.DRESSED2, 0), StepControl(tolerance=tol))
        # rerun with the converged resolution doubled: populations move < tol
        dt = 1e-6 / res.steps_used
        res2 = evolve(sched, p, basis_state(Basis.DRESSED2, 0), StepControl(initial_dt=dt / 2, tolerance=tol))
        assert np.max(np.abs(res.final_state.populations() - res2.final_state.populations())) < tol

    def test_time_reversal_for_constant_schedule(self):
        p = SingleQubitParams(omega_r=5e6, delta_nu=3e6)
        p_neg = SingleQubitParams(omega_r=-5e6, delta_nu=-3e6)
        tol = 1e-8
        psi0 = StateVector(np.array([0.6, 0.8j]), Basis.ROT2)
        fwd = evolve(constant_schedule(Basis.ROT2, 1e-6), p, psi0, StepControl(tolerance=tol))
        back = evolve(constant_schedule(Basis.ROT2, 1e-6), p_neg, fwd.final_state, StepControl(tolerance=tol))
        assert np.max(np.abs(back.final_state.amplitudes - psi0.amplitudes)) < 10 * tol

    def test_nonconvergence_reported_not_raised(self):
        p = SingleQubitParams(omega_r=10e6, delta_nu=0.0)
        wave = ControlWaveform("delta_nu", Sinusoid(5e6, 10e6, 0.0))
        sched = PulseSchedule((Segment(5e-6, (wave,)),), Basis.DRESSED2)
        res = evolve(sched, p, basis_state(Basis.DRESSED2, 0),
                     StepControl(initial_dt=5e-7, tolerance=1e-12, max_halvings=2))
        assert not res.converged
        assert res.estimated_error > 1e-12

    def test_unitary_evolution_matches_state_evolution(self):
        p = SingleQubitParams(omega_r=10e6, delta_nu=1e6)
        wave = ControlWaveform("delta_nu", Sinusoid(1e6, 10e6, 0.3))
        sched = PulseSchedule((Segment(1e-6, (wave,)),), Basis.DRESSED2)
        ctrl = StepControl(tolerance=1e-7)
        ures = evolve_unitary(sched, p, ctrl)
        sres = evolve(sched, p, basis_state(Basis.DRESSED2, 0), ctrl)
        assert ures.converged
        assert np.max(np.abs(ures.final_unitary.matrix[:, 0] - sres.final_state.amplitudes)) < 1e-6

    def test_two_by_two_fast_path_matches_eigendecomposition(self):
        rng = np.random.default_rng(3)
        m = rng.normal(size=(6, 2, 2)) + 1j * rng.normal(size=(6, 2, 2))
        k = (m + np.conjugate(np.swapaxes(m, -1, -2))) / 2
        fast = _step_unitaries(k, 1e-7)
        w, v = np.linalg.eigh(k)
        slow = np.matmul(v * np.exp(-2j * np.pi * w * 1e-7)[..., None, :],
                         np.conjugate(np.swapaxes(v, -1, -2)))
        assert np.max(np.abs(fast - slow)) < 1e-12


class TestSpectrumScan:
    def test_compositions_normalized(self):
        dd = DoubleDotParams(2e6, -2e6, 10e6, 10e6, t_c=1e9, eps=0.0)
        scan = spectrum_scan(dd, np.linspace(-200e9, 50e9, 41))
        sums = scan.compositions.sum(axis=2)
        assert np.max(np.abs(sums - 1.0)) < 1e-10

    def test_large_positive_bias_ground_is_charge_singlet(self):
        dd = DoubleDotParams(2e6, -2e6, 10e6, 10e6, t_c=1e9, eps=0.0)
        scan = spectrum_scan(dd, np.array([300e9]))
        ground = np.argmin(scan.energies[0])
        assert scan.compositions[0, ground, 0] >= 0.999  # s02 weight

    def test_branches_continuous(self):
        dd = DoubleDotParams(2e6, -2e6, 10e6, 10e6, t_c=1e9, eps=0.0)
        scan = spectrum_scan(dd, np.linspace(-200e9, 50e9, 201))
        jumps = np.abs(np.diff(scan.compositions, axis=0))
        assert float(jumps.max()) < 0.5

    def test_crossing_vs_anticrossing_gap(self):
        # no detuning difference: the lowest two branches cross (gap -> 0)
        dd0 = DoubleDotParams(0.0, 0.0, 10e6, 10e6, t_c=1e9, eps=0.0)
        scan0 = spectrum_scan(dd0, np.linspace(-110e9, -90e9, 101))
        gaps0 = np.sort(scan0.energies, axis=1)
        min0 = float(np.min(gaps0[:, 1] - gaps0[:, 0]))
        dd1 = DoubleDotParams(2e6, -2e6, 10e6, 10e6, t_c=1e9, eps=0.0)
        scan1 = spectrum_scan(dd1, np.linspace(-110e9, -90e9, 101))
        gaps1 = np.sort(scan1.energies, axis=1)
        min1 = float(np.min(gaps1[:, 1] - gaps1[:, 0]))
        assert min0 < 0.2e6 < 2e6 < min1

    def test_rejects_non_finite(self):
        dd = DoubleDotParams(0.0, 0.0, 10e6, 10e6, t_c=1e9, eps=0.0)
        with pytest.raises(ValueError, match="finite"):
            spectrum_scan(dd, [np.nan])

    def test_rejects_wrong_basis(self):
        dd = DoubleDotParams(0.0, 0.0, 10e6, 10e6, t_c=1e9, eps=0.0)
        with pytest.raises(ValueError, match="five-level"):
            spectrum_scan(dd, [0.0], Basis.ROT4)
