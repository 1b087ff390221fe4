import logging
import math

import numpy as np
import pytest

from dressedspin.core import Basis, HADAMARD, HermitianOperator, SIGMA_X, SIGMA_Y, SIGMA_Z, tensor
from dressedspin.model import (
    DoubleDotParams,
    ParameterError,
    RegimeError,
    SingleQubitParams,
    axis_angle,
    build_hamiltonian,
    generalized_rabi,
    hadamard_conjugate,
    hamiltonian_stack,
    reference_singlet_triplet_matrix,
    singlet_triplet_form_check,
    singlet_triplet_transform,
    sw_reduced,
    sw_reduced_generic,
    to_singlet_triplet,
)

DD_REF = DoubleDotParams(
    delta_nu_1=2e6, delta_nu_2=-2e6, omega_r1=10e6, omega_r2=10e6, t_c=1e9, eps=50e9, u=500e9
)


class TestSingleQubitParams:
    def test_delta_nu_derived(self):
        p = SingleQubitParams(omega_r=1e6, nu=1.002e9, f_mw=1e9)
        assert p.delta_nu == pytest.approx(2e6)

    def test_inconsistent_delta_nu_rejected(self):
        with pytest.raises(ParameterError, match="inconsistent"):
            SingleQubitParams(omega_r=1e6, nu=1.002e9, f_mw=1e9, delta_nu=3e6)

    def test_lab_fields_give_nu_and_omega(self):
        # nu = g mu_B B0 / h, Omega_R = g mu_B B1 / (2h)
        p = SingleQubitParams(g=2.0, b0=1.0, b1=1e-3, f_mw=27.9924898722e9)
        assert p.nu == pytest.approx(2 * 13.996244936e9, rel=1e-6)
        assert p.omega_r == pytest.approx(13.996244936e6, rel=1e-6)

    def test_missing_fields_named(self):
        p = SingleQubitParams(omega_r=1e6)
        with pytest.raises(ParameterError, match="delta_nu"):
            build_hamiltonian(Basis.ROT2, p)


class TestBuilders:
    def test_rot2_matrix(self):
        p = SingleQubitParams(omega_r=10e6, delta_nu=2e6)
        h = build_hamiltonian(Basis.ROT2, p)
        assert np.allclose(h.matrix, 0.5 * np.array([[2e6, 10e6], [10e6, -2e6]]))

    def test_dressed2_on_resonance_diagonal(self):
        p = SingleQubitParams(omega_r=10e6, delta_nu=0.0)
        h = build_hamiltonian(Basis.DRESSED2, p)
        assert np.allclose(h.matrix, np.diag([5e6, -5e6]))

    def test_dressed2_requires_positive_drive(self):
        with pytest.raises(ParameterError, match="omega_r"):
            build_hamiltonian(Basis.DRESSED2, SingleQubitParams(omega_r=0.0, delta_nu=1e6))

    def test_lab2_requires_time(self):
        p = SingleQubitParams(omega_r=1e6, nu=1e9, f_mw=1e9)
        with pytest.raises(ParameterError, match="time"):
            build_hamiltonian(Basis.LAB2, p)
        h = build_hamiltonian(Basis.LAB2, p, t=0.0)
        assert h.matrix[0, 1] == pytest.approx(1e6)  # cos(0) * Omega_R

    def test_time_rejected_for_static_bases(self):
        with pytest.raises(ParameterError, match="time-independent"):
            build_hamiltonian(Basis.ROT2, SingleQubitParams(omega_r=1e6, delta_nu=0.0), t=1e-9)

    def test_params_kind_mismatch(self):
        with pytest.raises(ParameterError, match="requires"):
            build_hamiltonian(Basis.DRESSED5, SingleQubitParams(omega_r=1e6, delta_nu=0.0))
        with pytest.raises(ParameterError, match="requires"):
            build_hamiltonian(Basis.ROT2, DD_REF)

    def test_singlet2(self):
        h = build_hamiltonian(Basis.SINGLET2, DoubleDotParams(t_c=1e9, eps=50e9, omega_r1=1e6, omega_r2=1e6))
        assert np.allclose(h.matrix, 0.5 * np.array([[0, 2e9], [2e9, -100e9]]))

    def test_dressed5_zero_detuning_structure(self):
        dd = DoubleDotParams(0.0, 0.0, 10e6, 10e6, t_c=1e9, eps=0.0)
        k = build_hamiltonian(Basis.DRESSED5, dd).matrix
        # diagonal: -eps, +-(sum/2), and the product kets at (diff/2) = 0
        assert np.allclose(np.diag(k), [0.0, 10e6, 0.0, 0.0, -10e6])
        # S(0,2) couples to the product kets only, with +-t_c/sqrt(2)
        s2 = 1e9 / math.sqrt(2)
        assert np.allclose(k[0], [0.0, 0.0, s2, -s2, 0.0])
        # no detuning entries anywhere
        assert k[1, 2] == 0 and k[2, 4] == 0

    def test_dressed6_requires_u_and_equal_rabi(self):
        dd = DoubleDotParams(0.0, 0.0, 10e6, 10e6, t_c=1e9, eps=0.0)
        with pytest.raises(ParameterError, match="'u'"):
            build_hamiltonian(Basis.DRESSED6, dd)
        dd_uneq = DoubleDotParams(0.0, 0.0, 10e6, 12e6, t_c=1e9, eps=0.0, u=500e9)
        with pytest.raises(RegimeError, match="omega_r1 == omega_r2"):
            build_hamiltonian(Basis.DRESSED6, dd_uneq)

    def test_dressed6_consistent_with_dressed5_couplings(self):
        k6 = build_hamiltonian(Basis.DRESSED6, DD_REF).matrix
        k5 = build_hamiltonian(Basis.DRESSED5, DD_REF).matrix
        # z_zbar couples to T- with dnu1/2 and to T+ with dnu2/2 in both forms
        assert k6[0, 2] == k5[2, 4]
        assert k6[0, 3] == k5[1, 2]
        # and to S(0,2) with +t_c/sqrt(2), zbar_z with the opposite sign
        assert k6[0, 4] == pytest.approx(k5[0, 2].real)
        assert k6[1, 4] == pytest.approx(k5[0, 3].real)

    def test_every_builder_output_is_hermitian(self):
        # the HermitianOperator constructor enforces the invariant; build all
        sq = SingleQubitParams(omega_r=7e6, delta_nu=3e6, nu=1.003e9, f_mw=1e9)
        for basis in (Basis.ROT2, Basis.DRESSED2):
            build_hamiltonian(basis, sq)
        build_hamiltonian(Basis.LAB2, sq, t=1.3e-9)
        for basis in (Basis.ROT4, Basis.DRESSED4, Basis.SINGLET2, Basis.DRESSED5,
                      Basis.DRESSED_ST5, Basis.DRESSED6):
            build_hamiltonian(basis, DD_REF)

    def test_stack_override_shapes(self):
        eps = np.linspace(-1e9, 1e9, 7)
        k = hamiltonian_stack(Basis.DRESSED5, DD_REF, {"eps": eps})
        assert k.shape == (7, 5, 5)
        assert np.allclose(k[:, 0, 0], -eps)

    def test_stack_unknown_target(self):
        with pytest.raises(ParameterError, match="unknown control target"):
            hamiltonian_stack(Basis.DRESSED5, DD_REF, {"bogus": np.zeros(3)})


class TestFrames:
    def test_table_axis_map(self):
        # z -> x, x -> z, y -> -y under the dressing transformation
        for m, expect in ((SIGMA_Z, SIGMA_X), (SIGMA_X, SIGMA_Z), (SIGMA_Y, -SIGMA_Y)):
            out = hadamard_conjugate(HermitianOperator(m, Basis.ROT2))
            assert out.basis is Basis.DRESSED2
            assert np.allclose(out.matrix, expect)

    def test_conjugation_matches_dressed_builder(self):
        p = SingleQubitParams(omega_r=10e6, delta_nu=2e6)
        a = hadamard_conjugate(build_hamiltonian(Basis.ROT2, p))
        b = build_hamiltonian(Basis.DRESSED2, p)
        assert np.max(np.abs(a.matrix - b.matrix)) < 1e-12 * np.max(np.abs(b.matrix))

    def test_two_qubit_conjugation_matches(self):
        dd = DoubleDotParams(2e6, -1e6, 10e6, 11e6, t_c=0.0, eps=0.0)
        a = hadamard_conjugate(build_hamiltonian(Basis.ROT4, dd))
        b = build_hamiltonian(Basis.DRESSED4, dd)
        assert np.max(np.abs(a.matrix - b.matrix)) < 1e-6

    def test_wrong_basis_rejected(self):
        with pytest.raises(ParameterError, match="rot2 or rot4"):
            hadamard_conjugate(HermitianOperator(SIGMA_Z, Basis.DRESSED2))

    def test_spectrum_invariance_rot_vs_dressed(self):
        p = SingleQubitParams(omega_r=10e6, delta_nu=3e6)
        w1 = np.linalg.eigvalsh(build_hamiltonian(Basis.ROT2, p).matrix)
        w2 = np.linalg.eigvalsh(build_hamiltonian(Basis.DRESSED2, p).matrix)
        assert np.max(np.abs(w1 - w2)) < 1e-10 * np.max(np.abs(w1))

    def test_singlet_projector_invariant(self):
        # the (1,1) singlet projector commutes with Hadamard (x) Hadamard
        s = np.zeros(4)
        s[1], s[2] = 1 / math.sqrt(2), -1 / math.sqrt(2)
        proj = np.outer(s, s)
        hh = tensor(HADAMARD, HADAMARD)
        assert np.allclose(hh @ proj @ hh.conj().T, proj, atol=1e-14)
        # and the triplet projector (complement within spin space) as well
        triplet = np.eye(4) - proj
        assert np.allclose(hh @ triplet @ hh.conj().T, triplet, atol=1e-14)


class TestSingletTriplet:
    def test_decoupled_when_symmetric(self):
        dd = DoubleDotParams(0.0, 0.0, 10e6, 10e6, t_c=1e9, eps=10e9)
        hst = to_singlet_triplet(build_hamiltonian(Basis.DRESSED5, dd))
        assert hst.matrix[2, 3] == 0.0  # S(1,1)-T0 entry is (omega_r1 - omega_r2)/2

    def test_charge_coupling_becomes_2tc(self):
        hst = to_singlet_triplet(build_hamiltonian(Basis.DRESSED5, DD_REF))
        assert hst.matrix[0, 2] == pytest.approx(DD_REF.t_c)  # (1/2) * 2 t_c

    def test_spectrum_preserved(self):
        h5 = build_hamiltonian(Basis.DRESSED5, DD_REF)
        hst = to_singlet_triplet(h5)
        w1 = np.linalg.eigvalsh(h5.matrix)
        w2 = np.linalg.eigvalsh(hst.matrix)
        assert np.max(np.abs(w1 - w2)) < 1e-10 * np.max(np.abs(w1))

    def test_wrong_basis(self):
        with pytest.raises(ParameterError, match="dressed5"):
            to_singlet_triplet(build_hamiltonian(Basis.ROT2, SingleQubitParams(omega_r=1e6, delta_nu=0.0)))

    def test_diagonal_spectrum_invariant(self):
        dd = DoubleDotParams(0.0, 0.0, 8e6, 8e6, t_c=0.0, eps=7e9)
        h5 = build_hamiltonian(Basis.DRESSED5, dd)
        hst = to_singlet_triplet(h5)
        assert np.allclose(sorted(np.diag(h5.matrix).real), np.linalg.eigvalsh(hst.matrix))

    def test_form_check_is_clean(self, caplog):
        with caplog.at_level(logging.INFO, logger="dressedspin.model"):
            mismatches = singlet_triplet_form_check(DD_REF)
        assert mismatches == []
        assert any("agree" in r.message for r in caplog.records)

    def test_reference_form_matches_derived_entrywise(self):
        ref = reference_singlet_triplet_matrix(DD_REF)
        derived = to_singlet_triplet(build_hamiltonian(Basis.DRESSED5, DD_REF)).matrix
        assert np.max(np.abs(ref - derived)) < 1e-12 * np.max(np.abs(ref))

    def test_transform_is_unitary(self):
        b = singlet_triplet_transform().matrix
        assert np.allclose(b @ b.conj().T, np.eye(5), atol=1e-15)


class TestGeneralizedRabi:
    @pytest.mark.parametrize(
        "omega,dnu,expect",
        [(10e6, 0.0, 10e6), (0.0, 7e6, 7e6), (3e6, 4e6, 5e6)],
    )
    def test_values(self, omega, dnu, expect):
        assert generalized_rabi(omega, dnu) == pytest.approx(expect, rel=1e-12)


class TestReduction:
    def test_exchange_value(self):
        dd = DoubleDotParams(0.0, 0.0, 10e6, 10e6, t_c=1e9, eps=0.0, u=10e9)
        rh = sw_reduced(dd)
        assert rh.a == pytest.approx(0.1e9, rel=1e-12)
        assert rh.d == 0.0

    def test_symmetric_detuning_gives_pure_exchange(self):
        dd = DoubleDotParams(3e5, 3e5, 10e6, 10e6, t_c=1e9, eps=0.0, u=100e9)
        rh = sw_reduced(dd)
        assert rh.d == 0.0
        # eigenbasis is the (anti)symmetric pair: eigenvectors (1, +-1)/sqrt(2)
        _, v = np.linalg.eigh(rh.matrix.matrix)
        assert np.allclose(np.abs(v), 1 / math.sqrt(2))

    def test_matrix_layout(self):
        rh = sw_reduced(DD_REF)
        m = rh.matrix.matrix
        assert m[0, 0] == pytest.approx(-rh.a + rh.d)
        assert m[1, 1] == pytest.approx(-rh.a - rh.d)
        assert m[0, 1] == pytest.approx(rh.a)

    def test_validity_window_enforced(self):
        dd = DoubleDotParams(0.0, 0.0, 10e6, 10e6, t_c=60e9, eps=50e9, u=100e9)
        with pytest.raises(RegimeError, match="validity window"):
            sw_reduced(dd)

    def test_unequal_rabi_rejected(self):
        dd = DoubleDotParams(0.0, 0.0, 10e6, 12e6, t_c=1e9, eps=0.0, u=100e9)
        with pytest.raises(RegimeError, match="unsupported assumption"):
            sw_reduced(dd)

    def test_generic_path_matches_closed_form(self):
        for dd in (
            DD_REF,
            DoubleDotParams(1e5, -3e5, 10e6, 10e6, t_c=2e9, eps=-120e9, u=700e9),
            DoubleDotParams(0.0, 5e5, 12e6, 12e6, t_c=0.5e9, eps=30e9, u=200e9),
        ):
            closed = sw_reduced(dd).matrix.matrix
            generic = sw_reduced_generic(dd).matrix
            assert np.max(np.abs(closed - generic)) <= 1e-12 * np.max(np.abs(closed))

    def test_mid_spectrum_oracle_bound(self):
        # brute-force six-level diagonalization as the oracle, matched by
        # eigenvector weight on the retained subspace
        omega = 10e6
        for ratio, u in ((0.05, 200e9), (0.02, 500e9), (0.005, 800e9)):
            dnu = 0.1 * omega
            dd = DoubleDotParams(dnu, -0.5 * dnu, omega, omega, t_c=ratio * u, eps=0.1 * u, u=u)
            k6 = hamiltonian_stack(Basis.DRESSED6, dd)
            w6, v6 = np.linalg.eigh(k6)
            weight = np.abs(v6[0]) ** 2 + np.abs(v6[1]) ** 2
            matched = np.sort(w6[np.sort(np.argsort(weight)[-2:])])
            reduced = np.sort(np.linalg.eigvalsh(sw_reduced(dd).matrix.matrix))
            bound = 5.0 * max(dd.t_c**2 / u, dnu**2 / omega) * (dd.t_c / u)
            assert np.max(np.abs(matched - reduced)) < bound

    def test_axis_angle_limits(self):
        dd = DoubleDotParams(0.0, 0.0, 10e6, 10e6, t_c=1e9, eps=0.0, u=100e9)
        assert axis_angle(sw_reduced(dd)) == 0.0
        dd2 = DoubleDotParams(1e6, 0.0, 10e6, 10e6, t_c=0.001e9, eps=0.0, u=100e9)
        assert axis_angle(sw_reduced(dd2)) > 0.5 * math.pi - 0.1

    def test_axis_angle_ordering_in_t_c(self):
        thetas = []
        for t_c in (4e9, 0.4e9, 0.04e9):
            dd = DoubleDotParams(1e6, 0.0, 10e6, 10e6, t_c=t_c, eps=0.0, u=1000e9)
            thetas.append(axis_angle(sw_reduced(dd)))
        assert thetas[0] < thetas[1] < thetas[2]

    def test_axis_angle_undefined(self):
        from dressedspin.model import ReducedHamiltonian

        rh = ReducedHamiltonian(0.0, 0.0, HermitianOperator(np.zeros((2, 2)), Basis.REDUCED2))
        with pytest.raises(RegimeError, match="undefined"):
            axis_angle(rh)
