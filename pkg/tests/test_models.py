import numpy as np
import pytest

from dressedsim import algebra as alg
from dressedsim import models
from dressedsim.noise import NoiseSpectrum

TWO_PI = 2 * np.pi


def resonant_pair(g=TWO_PI * 7.5, **kw):
    return models.CoupledPair(omega0=TWO_PI * 4000.0, omega1=TWO_PI * 4000.0,
                              coupling=g, **kw)


class TestDrivenQubit:
    def test_eigensplitting_equals_rabi(self):
        omega = TWO_PI * 15.0  # the fixed comparison point of the rate scans
        spec = models.build_driven_qubit(models.DrivenQubit(rabi=omega))
        w = np.linalg.eigvalsh(spec.hamiltonian)
        assert w[1] - w[0] == pytest.approx(omega, rel=1e-12)

    def test_zero_drive_free_spec(self):
        spec = models.build_driven_qubit(models.DrivenQubit(rabi=0.0))
        assert np.all(spec.hamiltonian == 0)
        assert spec.jumps == ()

    def test_gamma1_jump_present(self):
        spec = models.build_driven_qubit(
            models.DrivenQubit(rabi=1.0, gamma1=0.02))
        (rate, op), = spec.jumps
        assert rate == 0.02
        assert np.array_equal(op, alg.SIGMA_MINUS)

    def test_validation(self):
        with pytest.raises(ValueError):
            models.DrivenQubit(rabi=-1.0)


class TestSingleExcitation:
    def test_dressed_splitting_at_resonance(self):
        g = TWO_PI * 7.69
        spec = models.build_single_excitation(resonant_pair(g))
        w = np.linalg.eigvalsh(spec.hamiltonian)
        assert w[1] - w[0] == pytest.approx(2 * g, rel=1e-12)
        # eigenvectors are the dressed states
        _, v = np.linalg.eigh(spec.hamiltonian)
        overlap = abs(np.vdot(v[:, 1], alg.KET_DRESSED_1))
        assert overlap == pytest.approx(1.0, abs=1e-12)

    def test_gap_formula_off_resonance(self):
        for delta_f, g_f in [(3.0, 5.0), (0.0, 7.5), (-4.0, 2.0)]:
            pair = models.CoupledPair(omega0=TWO_PI * (4000 + delta_f),
                                      omega1=TWO_PI * 4000.0,
                                      coupling=TWO_PI * g_f)
            spec = models.build_single_excitation(pair)
            w = np.linalg.eigvalsh(spec.hamiltonian)
            expected = np.sqrt(pair.detuning ** 2 + 4 * pair.coupling ** 2)
            assert w[1] - w[0] == pytest.approx(expected, rel=1e-12)

    def test_spectrum_at_resonance_is_pm_g(self):
        g = TWO_PI * 3.0
        spec = models.build_single_excitation(resonant_pair(g))
        assert np.allclose(np.linalg.eigvalsh(spec.hamiltonian), [-g, g])

    def test_noise_is_transverse_in_dressed_basis(self):
        spec = models.build_single_excitation(resonant_pair())
        dressed = alg.dressed_basis_change(spec.noise_operator)
        assert np.allclose(dressed, 0.5 * alg.SIGMA_X, atol=1e-14)

    def test_noise_target_flips_sign(self):
        s0 = models.build_single_excitation(resonant_pair(noise_target=0))
        s1 = models.build_single_excitation(resonant_pair(noise_target=1))
        assert np.allclose(s0.noise_operator, -s1.noise_operator)

    def test_drive_couple_correspondence(self):
        # driven qubit at Omega and the dressed form of the pair at g=Omega/2
        # share the same spectrum
        omega = TWO_PI * 15.0
        h_drive = models.build_driven_qubit(
            models.DrivenQubit(rabi=omega)).hamiltonian
        h_pair = models.build_single_excitation(
            resonant_pair(g=omega / 2)).hamiltonian
        h_pair_dressed = alg.dressed_basis_change(h_pair)
        w1 = np.linalg.eigvalsh(h_drive)
        w2 = np.linalg.eigvalsh(h_pair_dressed)
        assert np.allclose(w1, w2, atol=1e-12)


class TestDressedTriad:
    def test_rate_arithmetic(self):
        pair = resonant_pair(gamma1_q0=0.01, gamma1_q1=0.02)
        assert models.gamma_1g_analytic(pair, 0.10) == pytest.approx(0.115)

    def test_jump_structure_without_noise(self):
        pair = resonant_pair(gamma1_q0=0.03, gamma1_q1=0.03)
        spec = models.build_dressed_triad(pair, gamma_g=0.0)
        assert len(spec.jumps) == 2
        for rate, op in spec.jumps:
            # decay goes to |00> only; no dressed interconversion
            assert np.all(op[:2, :] == 0)
            assert abs(op[2, 0]) == pytest.approx(1 / np.sqrt(2))
            assert abs(op[2, 1]) == pytest.approx(1 / np.sqrt(2))

    def test_pure_flip_channel(self):
        spec = models.build_dressed_triad(resonant_pair(), gamma_g=0.2)
        rates = sorted(r for r, _ in spec.jumps)
        assert rates == [0.1, 0.1]
        flips = [op for _, op in spec.jumps]
        assert np.array_equal(flips[0], flips[1].T)

    def test_negative_gamma_rejected(self):
        with pytest.raises(ValueError):
            models.build_dressed_triad(resonant_pair(), gamma_g=-0.1)


class TestTwoQubit:
    def test_blocks(self):
        g = TWO_PI * 5.0
        spec = models.build_two_qubit(resonant_pair(g))
        h = spec.hamiltonian
        assert h[0, 0] == 0 and h[3, 3] == 0
        assert h[1, 2] == g and h[2, 1] == g
        # restriction to (|10>, |01>) equals the single-excitation builder
        se = models.build_single_excitation(resonant_pair(g))
        sub = h[np.ix_([2, 1], [2, 1])]
        assert np.allclose(sub, se.hamiltonian)
        nop_sub = spec.noise_operator[np.ix_([2, 1], [2, 1])]
        assert np.allclose(nop_sub, se.noise_operator)

    def test_jump_operators_local(self):
        pair = resonant_pair(gamma1_q0=0.01, gamma1_q1=0.02)
        spec = models.build_two_qubit(pair)
        (r0, op0), (r1, op1) = spec.jumps
        assert (r0, r1) == (0.01, 0.02)
        assert np.array_equal(op0, alg.kron(alg.SIGMA_MINUS, alg.ID2))
        assert np.array_equal(op1, alg.kron(alg.ID2, alg.SIGMA_MINUS))


class TestAnalyticRates:
    def test_gamma_g_flat(self):
        spec = NoiseSpectrum.flat_band(0.4, TWO_PI * 5, TWO_PI * 20)
        assert models.gamma_g_analytic(spec, TWO_PI * 7.5) == pytest.approx(0.2)

    def test_gamma_g_out_of_band(self):
        spec = NoiseSpectrum.flat_band(0.4, TWO_PI * 5, TWO_PI * 20)
        assert models.gamma_g_analytic(spec, TWO_PI * 15) == 0.0

    def test_gamma_1rho(self):
        spec = NoiseSpectrum.flat_band(0.4, TWO_PI * 5, TWO_PI * 20)
        got = models.gamma_1rho_analytic(0.02, spec, TWO_PI * 15)
        assert got == pytest.approx(0.21)
        silent = NoiseSpectrum.flat_band(0.0, TWO_PI * 5, TWO_PI * 20)
        assert models.gamma_1rho_analytic(0.02, silent, TWO_PI * 15) \
            == pytest.approx(0.01)

    def test_gamma_omega_equals_gamma_g_at_matched_frequency(self):
        spec = NoiseSpectrum.flat_band(0.3, TWO_PI * 5, TWO_PI * 20)
        omega = TWO_PI * 15.0
        gamma_omega = models.gamma_1rho_analytic(0.0, spec, omega)
        gamma_g = models.gamma_g_analytic(spec, omega / 2)
        assert gamma_omega == pytest.approx(gamma_g)

    def test_detailed_balance(self):
        up, down = models.detailed_balance_rates(0.5, 0.0)
        assert up == 0.0
        assert down == pytest.approx(TWO_PI * 0.5)
        up, down = models.detailed_balance_rates(0.5, 1000.0)
        assert up / down == pytest.approx(1000.0 / 1001.0)

    def test_classical_limit_maps_to_flip_rates(self):
        # 2pi J (n_th + 1/2) -> S/2 identifies gamma_up = gamma_down =
        # gamma_g/2 for n_th >> 1
        j, n_th = 1e-4, 1e6
        up, down = models.detailed_balance_rates(j, n_th)
        gamma_g = up + down  # polarization decay rate of the flip channel
        assert up == pytest.approx(gamma_g / 2, rel=1e-5)
        assert down == pytest.approx(gamma_g / 2, rel=1e-5)


class TestLindbladSpec:
    def test_dimension_checks(self):
        with pytest.raises(ValueError, match="dimension"):
            models.LindbladSpec(np.eye(2), jumps=((0.1, np.eye(3)),))
        with pytest.raises(ValueError, match="rates"):
            models.LindbladSpec(np.eye(2), jumps=((-0.1, np.eye(2)),))

    def test_hamiltonian_scale_includes_noise(self):
        from dressedsim.noise import NoiseTrajectory
        traj = NoiseTrajectory(0.01, np.array([1.0, -2.0, 0.5]))
        spec = models.LindbladSpec(np.zeros((2, 2)),
                                   noise_operator=0.5 * alg.SIGMA_Z,
                                   trajectory=traj)
        assert spec.hamiltonian_scale() == pytest.approx(1.0)
