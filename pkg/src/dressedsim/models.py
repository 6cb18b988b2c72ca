"""Physical system models: driven qubit, coupled pair, dressed triad.

Each builder returns a :class:`LindbladSpec` holding a static Hamiltonian,
optional decay channels, and optionally a fixed noise operator that a scalar
detuning trajectory multiplies.  All frequencies are angular (rad/us), all
rates are 1/us.  Analytic rate formulas for the relaxation channels live
here alongside the builders they describe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import algebra as alg
from .noise import NoiseSpectrum, NoiseTrajectory

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class DrivenQubit:
    """Resonantly driven qubit: Rabi frequency and energy-relaxation rate."""

    rabi: float
    gamma1: float = 0.0

    def __post_init__(self):
        if self.rabi < 0 or self.gamma1 < 0:
            raise ValueError("rabi and gamma1 must be >= 0")


@dataclass(frozen=True)
class CoupledPair:
    """Two exchange-coupled qubits.

    ``omega0``/``omega1`` are the bare angular frequencies of qubits 0 and 1,
    ``coupling`` the exchange strength g, and ``gamma1_q0``/``gamma1_q1`` the
    individual energy-relaxation rates.  ``noise_target`` selects which
    qubit's frequency the injected detuning noise modulates.
    """

    omega0: float
    omega1: float
    coupling: float
    gamma1_q0: float = 0.0
    gamma1_q1: float = 0.0
    noise_target: int = 0

    def __post_init__(self):
        if self.coupling <= 0:
            raise ValueError("coupling g must be > 0")
        if self.gamma1_q0 < 0 or self.gamma1_q1 < 0:
            raise ValueError("decay rates must be >= 0")
        if self.noise_target not in (0, 1):
            raise ValueError("noise_target must be 0 or 1")

    @property
    def detuning(self) -> float:
        """Qubit-qubit detuning Delta = omega0 - omega1 (derived)."""
        return self.omega0 - self.omega1

    def at_resonance(self) -> "CoupledPair":
        """Copy of the pair with both qubits tuned to omega0."""
        return CoupledPair(self.omega0, self.omega0, self.coupling,
                           self.gamma1_q0, self.gamma1_q1, self.noise_target)


@dataclass(frozen=True)
class LindbladSpec:
    """Hamiltonian + dissipator specification for the integrators.

    The (possibly time-dependent) Hamiltonian is ``hamiltonian +
    delta(t) * noise_operator`` where ``delta`` is read from ``trajectory``;
    both optional pieces may be ``None`` for a static closed/dissipative
    system.  ``jumps`` is a list of ``(rate, operator)`` pairs entering the
    dissipator as ``rate * (L rho L^dag - {L^dag L, rho}/2)``.
    """

    hamiltonian: np.ndarray = field(repr=False)
    jumps: tuple = ()
    noise_operator: np.ndarray | None = field(default=None, repr=False)
    trajectory: NoiseTrajectory | None = None

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("hamiltonian must be square")
        object.__setattr__(self, "hamiltonian", h)
        jumps = []
        for rate, op in self.jumps:
            if rate < 0:
                raise ValueError("jump rates must be >= 0")
            op = np.asarray(op, dtype=complex)
            if op.shape != h.shape:
                raise ValueError("jump operator dimension mismatch with "
                                 "hamiltonian")
            jumps.append((float(rate), op))
        object.__setattr__(self, "jumps", tuple(jumps))
        if self.noise_operator is not None:
            nop = np.asarray(self.noise_operator, dtype=complex)
            if nop.shape != h.shape:
                raise ValueError("noise operator dimension mismatch")
            object.__setattr__(self, "noise_operator", nop)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def with_trajectory(self, traj: NoiseTrajectory | None) -> "LindbladSpec":
        return LindbladSpec(self.hamiltonian, self.jumps,
                            self.noise_operator, traj)

    def max_rate(self) -> float:
        return max((r for r, _ in self.jumps), default=0.0)

    def hamiltonian_scale(self) -> float:
        """Bound on the spectral radius of H(t), noise included."""
        scale = float(np.linalg.norm(self.hamiltonian, 2))
        if self.noise_operator is not None and self.trajectory is not None:
            peak = float(np.max(np.abs(self.trajectory.samples), initial=0.0))
            scale += peak * float(np.linalg.norm(self.noise_operator, 2))
        return scale


def build_driven_qubit(model: DrivenQubit,
                       trajectory: NoiseTrajectory | None = None,
                       ) -> LindbladSpec:
    """Rotating-frame spec of a driven qubit locked along x.

    H = (Omega/2) sigma_x; dephasing noise enters as (delta(t)/2) sigma_z,
    transverse to the drive axis.  A nonzero gamma1 adds the lab-frame
    amplitude-damping jump sqrt(gamma1) |0><1|.
    """
    jumps = []
    if model.gamma1 > 0:
        jumps.append((model.gamma1, alg.SIGMA_MINUS))
    return LindbladSpec(hamiltonian=0.5 * model.rabi * alg.SIGMA_X,
                        jumps=tuple(jumps),
                        noise_operator=0.5 * alg.SIGMA_Z,
                        trajectory=trajectory)


def build_single_excitation(model: CoupledPair,
                            trajectory: NoiseTrajectory | None = None,
                            ) -> LindbladSpec:
    """Single-excitation-manifold spec of the coupled pair.

    In the bare basis (|10>, |01>): H = (Delta/2)(|10><10| - |01><01|) +
    g(|01><10| + h.c.).  Frequency noise on either qubit is detuning noise;
    it enters as (delta(t)/2) sigma_z with a sign fixed by which qubit is
    modulated.  At resonance the eigenstates are the dressed pair split by
    2g.  T1 decay leaves this manifold and is not representable here; use
    :func:`build_dressed_triad` or :func:`build_two_qubit` when rates
    matter.
    """
    h = 0.5 * model.detuning * alg.SIGMA_Z + model.coupling * alg.SIGMA_X
    sign = 1.0 if model.noise_target == 0 else -1.0
    return LindbladSpec(hamiltonian=h, jumps=(),
                        noise_operator=0.5 * sign * alg.SIGMA_Z,
                        trajectory=trajectory)


def build_dressed_triad(model: CoupledPair, gamma_g: float) -> LindbladSpec:
    """Three-level master-equation spec in the basis (|1~>, |0~>, |00>).

    Decay of each bare qubit appears as a jump |00><10| or |00><01| at its
    own rate; the noise-induced dressed-state relaxation appears as the two
    equal-rate flips |1~><0~| and |0~><1~| at gamma_g/2 each.  The dressed
    population difference then decays at
    Gamma_1g = (gamma1_q0 + gamma1_q1)/2 + gamma_g.
    """
    if gamma_g < 0:
        raise ValueError("gamma_g must be >= 0")
    sqrt2 = np.sqrt(2.0)
    ket_10 = np.array([1.0, 1.0, 0.0], dtype=complex) / sqrt2
    ket_01 = np.array([1.0, -1.0, 0.0], dtype=complex) / sqrt2
    ket_00 = np.array([0.0, 0.0, 1.0], dtype=complex)
    a0 = np.outer(ket_00, ket_10.conj())   # |00><10|
    a1 = np.outer(ket_00, ket_01.conj())   # |00><01|
    a10 = np.zeros((3, 3), dtype=complex)
    a10[0, 1] = 1.0                        # |1~><0~|
    a01 = a10.T.copy()                     # |0~><1~|
    jumps = []
    if model.gamma1_q0 > 0:
        jumps.append((model.gamma1_q0, a0))
    if model.gamma1_q1 > 0:
        jumps.append((model.gamma1_q1, a1))
    if gamma_g > 0:
        jumps.append((gamma_g / 2.0, a10))
        jumps.append((gamma_g / 2.0, a01))
    h = model.coupling * np.diag([1.0, -1.0, 0.0]).astype(complex)
    return LindbladSpec(hamiltonian=h, jumps=tuple(jumps))


def build_two_qubit(model: CoupledPair,
                    trajectory: NoiseTrajectory | None = None,
                    ) -> LindbladSpec:
    """Full two-qubit spec in the basis (|00>, |01>, |10>, |11>).

    Rotating frame at the mean qubit frequency: H = (Delta/2)(n0 - n1) +
    g(|01><10| + h.c.).  Frequency noise on the target qubit is the diagonal
    operator (delta(t)/2)(2 n_t - 1), which restricts to the detuning-noise
    operator on the single-excitation block and additionally phases |00> and
    |11>.  T1 jumps are local sigma_minus operators.
    """
    n0 = np.diag([0.0, 0.0, 1.0, 1.0]).astype(complex)
    n1 = np.diag([0.0, 1.0, 0.0, 1.0]).astype(complex)
    exchange = np.zeros((4, 4), dtype=complex)
    exchange[1, 2] = exchange[2, 1] = 1.0
    h = 0.5 * model.detuning * (n0 - n1) + model.coupling * exchange
    n_t = n0 if model.noise_target == 0 else n1
    noise_op = 0.5 * (2.0 * n_t - np.eye(4))
    jumps = []
    if model.gamma1_q0 > 0:
        jumps.append((model.gamma1_q0, alg.kron(alg.SIGMA_MINUS, alg.ID2)))
    if model.gamma1_q1 > 0:
        jumps.append((model.gamma1_q1, alg.kron(alg.ID2, alg.SIGMA_MINUS)))
    return LindbladSpec(hamiltonian=h, jumps=tuple(jumps),
                        noise_operator=noise_op, trajectory=trajectory)


def gamma_g_analytic(spectrum: NoiseSpectrum, g: float) -> float:
    """Dressed-state relaxation rate S_Delta(2g) / 2 from detuning noise."""
    if g <= 0:
        raise ValueError("g must be > 0")
    return 0.5 * float(np.asarray(spectrum.psd_at(2.0 * g)))


def gamma_1rho_analytic(gamma1: float, spectrum: NoiseSpectrum,
                        omega_rabi: float) -> float:
    """Rotating-frame relaxation rate gamma1/2 + S(Omega)/2."""
    if omega_rabi <= 0:
        raise ValueError("omega_rabi must be > 0")
    return 0.5 * gamma1 + 0.5 * float(np.asarray(spectrum.psd_at(omega_rabi)))


def gamma_1g_analytic(model: CoupledPair, gamma_g: float) -> float:
    """Total dressed relaxation (gamma1_q0 + gamma1_q1)/2 + gamma_g."""
    return 0.5 * (model.gamma1_q0 + model.gamma1_q1) + gamma_g


def detailed_balance_rates(j_at_split: float,
                           n_th: float) -> tuple[float, float]:
    """Up/down dressed flip rates from a quantum bath at the splitting.

    gamma_up = 2pi J n_th, gamma_down = 2pi J (n_th + 1); their ratio tends
    to one in the classical limit n_th >> 1, where both reduce to gamma_g/2.
    """
    if j_at_split < 0 or n_th < 0:
        raise ValueError("spectral density and occupation must be >= 0")
    gamma_up = TWO_PI * j_at_split * n_th
    gamma_down = TWO_PI * j_at_split * (n_th + 1.0)
    return gamma_up, gamma_down
