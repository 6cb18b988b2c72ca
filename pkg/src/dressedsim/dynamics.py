"""Numerical evolution: Lindblad integration and stochastic unitaries.

Two propagation paths:

* :func:`evolve_lindblad` integrates the master equation d rho/dt =
  -i[H, rho] + sum_k gamma_k D[L_k] rho with a classical fixed-step
  fourth-order scheme on the vectorized density matrix.  The Hamiltonian may
  carry a piecewise-constant detuning trajectory.
* :func:`evolve_noisy_unitary` propagates a pure state under the stochastic
  Hamiltonian H0 + delta(t_k) N with one exact matrix exponential per noise
  sample, so the comparison of ensemble decay rates against analytic
  formulas carries no integrator error.

:func:`ensemble_relaxation` runs an ensemble of trajectories (choosing the
unitary path when the spec is jump-free, the Lindblad path otherwise) and
averages observables in trajectory-index order, making results independent
of any execution parallelism.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import algebra as alg
from .models import LindbladSpec
from .noise import NoiseSpectrum, NoiseTrajectory, synthesize

TWO_PI = 2.0 * np.pi

TRACE_GUARD = 1e-8


class IntegrationError(RuntimeError):
    """Raised when an integrator violates its accuracy guards."""


@dataclass
class EvolutionResult:
    """Time grid, recorded states and named observable series of one run."""

    times: np.ndarray
    states: list[np.ndarray] = field(repr=False)
    observables: dict[str, np.ndarray]
    trace_drift: float = 0.0
    norm_drift: float = 0.0
    convergence_delta: float | None = None
    min_eigenvalue: float | None = None

    def to_csv(self) -> str:
        names = list(self.observables)
        buf = io.StringIO()
        buf.write("t_us," + ",".join(names) + "\n")
        cols = [self.observables[n] for n in names]
        for i, t in enumerate(self.times):
            row = ",".join(f"{c[i]:.17g}" for c in cols)
            buf.write(f"{t:.17g},{row}\n")
        return buf.getvalue()


@dataclass
class EnsembleResult:
    """Trajectory-averaged observables with per-point standard errors."""

    trajectory_count: int
    times: np.ndarray
    mean_observables: dict[str, np.ndarray]
    standard_errors: dict[str, np.ndarray]
    seed: int
    per_trajectory: dict[str, np.ndarray] | None = field(default=None,
                                                         repr=False)

    def __post_init__(self):
        if self.trajectory_count < 2:
            raise ValueError("an ensemble needs at least two trajectories")

    def to_csv(self, name: str) -> str:
        buf = io.StringIO()
        buf.write(f"t_us,{name},stderr\n")
        mean = self.mean_observables[name]
        err = self.standard_errors[name]
        for t, m, s in zip(self.times, mean, err):
            buf.write(f"{t:.17g},{m:.17g},{s:.17g}\n")
        return buf.getvalue()


def expectation_values(states: list[np.ndarray] | np.ndarray,
                       op: np.ndarray) -> np.ndarray:
    """Real expectation <op> for each state (kets or density matrices)."""
    op = np.asarray(op, dtype=complex)
    arr = np.asarray(states)
    if arr.ndim == 2:   # stack of kets
        return np.einsum("ti,ij,tj->t", arr.conj(), op, arr).real
    return np.einsum("tij,ji->t", arr, op).real


def _noise_values(traj: NoiseTrajectory | None, n_steps: int,
                  dt: float) -> np.ndarray:
    """Piecewise-constant noise value for each integrator step."""
    if traj is None:
        return np.zeros(n_steps)
    # index of the noise sample active on [k dt, (k+1) dt)
    idx = np.floor((np.arange(n_steps) + 0.5) * dt / traj.dt).astype(int)
    if idx[-1] >= len(traj.samples):
        raise ValueError(
            f"trajectory ({traj.duration:.6g} us) shorter than the "
            f"requested evolution ({n_steps * dt:.6g} us)")
    return traj.samples[idx]


def _lindblad_superoperators(spec: LindbladSpec):
    """Static superoperator L0 and the noise commutator superoperator."""
    d = spec.dim
    eye = np.eye(d, dtype=complex)
    h = spec.hamiltonian

    def commutator_superop(a):
        return -1j * (np.kron(a, eye) - np.kron(eye, a.T))

    l0 = commutator_superop(h)
    for rate, op in spec.jumps:
        opd_op = op.conj().T @ op
        l0 += rate * (np.kron(op, op.conj())
                      - 0.5 * np.kron(opd_op, eye)
                      - 0.5 * np.kron(eye, opd_op.T))
    l_noise = (commutator_superop(spec.noise_operator)
               if spec.noise_operator is not None else None)
    return l0, l_noise


def _required_lindblad_dt(spec: LindbladSpec) -> float:
    scale = spec.hamiltonian_scale()
    bound = np.inf
    if scale > 0:
        bound = TWO_PI / (20.0 * scale)
    max_rate = spec.max_rate()
    if max_rate > 0:
        bound = min(bound, 1.0 / (20.0 * max_rate))
    return bound


def _rk4_lindblad(spec: LindbladSpec, rho0: np.ndarray, n_steps: int,
                  dt: float, record_idx: np.ndarray):
    d = spec.dim
    l0, l_noise = _lindblad_superoperators(spec)
    deltas = _noise_values(spec.trajectory, n_steps, dt)
    rho = np.asarray(rho0, dtype=complex).reshape(-1).copy()
    recorded = {}
    if 0 in record_idx:
        recorded[0] = rho.reshape(d, d).copy()
    max_drift = 0.0
    trace_idx = np.arange(d) * (d + 1)
    # group consecutive steps sharing a noise value to reuse the superoperator
    step = 0
    while step < n_steps:
        delta = deltas[step]
        run_end = step + 1
        while run_end < n_steps and deltas[run_end] == delta:
            run_end += 1
        lmat = l0 if (l_noise is None or delta == 0.0) else l0 + delta * l_noise
        for k in range(step, run_end):
            k1 = lmat @ rho
            k2 = lmat @ (rho + 0.5 * dt * k1)
            k3 = lmat @ (rho + 0.5 * dt * k2)
            k4 = lmat @ (rho + dt * k3)
            rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            tr = rho[trace_idx].sum().real
            drift = abs(tr - 1.0)
            if drift > TRACE_GUARD:
                raise IntegrationError(
                    f"trace drift {drift:.3e} exceeded {TRACE_GUARD:.1e} at "
                    f"step {k} (reduce dt)")
            max_drift = max(max_drift, drift)
            rho = rho / tr
            if k + 1 in record_idx:
                recorded[k + 1] = rho.reshape(d, d).copy()
    return recorded, max_drift


def evolve_lindblad(spec: LindbladSpec, rho0: np.ndarray, duration: float,
                    dt: float, observables: Mapping[str, np.ndarray] | None = None,
                    record_every: int = 1,
                    check_convergence: bool = False) -> EvolutionResult:
    """Fixed-step fourth-order integration of the Lindblad master equation.

    ``dt`` must satisfy dt <= min(2pi / (20 * |H|), 1 / (20 * max rate)).
    The trace is renormalized after every step; a per-step drift above 1e-8
    is treated as an integration failure, not silently corrected.  With
    ``check_convergence`` the run is repeated at dt/2 and the maximum
    difference of final-state entries is reported in ``convergence_delta``.

    Parameters
    ----------
    spec : LindbladSpec
        System specification; a noise trajectory attached to it makes the
        Hamiltonian piecewise constant in time.
    rho0 : array
        Initial density matrix.
    duration, dt : float
        Evolution window and integrator step (us).
    observables : mapping, optional
        Named Hermitian operators evaluated on every recorded state.
    record_every : int
        Record every k-th step (the initial and final states always are).
    """
    if dt <= 0 or duration <= 0:
        raise ValueError("duration and dt must be positive")
    bound = _required_lindblad_dt(spec)
    if dt > bound:
        raise ValueError(f"dt={dt:.6g} too large for this spec: need "
                         f"dt <= {bound:.6g}")
    alg.check_density_matrix(rho0)
    n_steps = int(round(duration / dt))
    record_idx = set(range(0, n_steps + 1, max(record_every, 1)))
    record_idx.add(n_steps)
    recorded, max_drift = _rk4_lindblad(spec, rho0, n_steps, dt,
                                        record_idx)
    order = sorted(recorded)
    states = [recorded[k] for k in order]
    times = dt * np.asarray(order, dtype=float)
    obs = {name: expectation_values(states, op)
           for name, op in (observables or {}).items()}
    min_eig = min(float(np.linalg.eigvalsh(s).min()) for s in states)
    delta = None
    if check_convergence:
        fine, _ = _rk4_lindblad(spec, rho0, 2 * n_steps, dt / 2.0,
                                {2 * n_steps})
        delta = float(np.max(np.abs(fine[2 * n_steps] - recorded[n_steps])))
    return EvolutionResult(times=times, states=states, observables=obs,
                           trace_drift=max_drift, convergence_delta=delta,
                           min_eigenvalue=min_eig)


def evolve_noisy_unitary(spec: LindbladSpec, psi0: np.ndarray,
                         traj: NoiseTrajectory,
                         observables: Mapping[str, np.ndarray] | None = None,
                         n_steps: int | None = None) -> EvolutionResult:
    """Exact piecewise-constant unitary evolution under a noise trajectory.

    One Hermitian matrix exponential per noise sample; the step equals the
    trajectory's own dt, which must resolve the fastest Hamiltonian scale
    (noise excursions included) with >= 10 steps per period.  The trajectory
    may be longer than the evolution; pass ``n_steps`` to use a prefix.
    """
    if spec.jumps:
        raise ValueError("evolve_noisy_unitary handles closed systems; use "
                         "evolve_lindblad for specs with jumps")
    dt = traj.dt
    scale = (2.0 * float(np.linalg.norm(spec.hamiltonian, 2))
             + 2.0 * float(np.max(np.abs(traj.samples), initial=0.0))
             * (float(np.linalg.norm(spec.noise_operator, 2))
                if spec.noise_operator is not None else 0.0))
    if scale > 0 and dt > TWO_PI / (10.0 * scale):
        raise ValueError(f"trajectory dt={dt:.6g} too coarse: need <= "
                         f"{TWO_PI / (10.0 * scale):.6g} for this spec")
    if n_steps is None:
        n_steps = len(traj.samples)
    if n_steps > len(traj.samples):
        raise ValueError("n_steps exceeds trajectory length")
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ValueError("psi0 must be normalized")
    if spec.noise_operator is None:
        h_stack = np.broadcast_to(spec.hamiltonian,
                                  (n_steps, spec.dim, spec.dim))
    else:
        h_stack = (spec.hamiltonian[None, :, :]
                   + traj.samples[:n_steps, None, None]
                   * spec.noise_operator[None, :, :])
    u_stack = alg.hermitian_expm_batch(h_stack, dt)
    psis = np.empty((n_steps + 1, spec.dim), dtype=complex)
    psis[0] = psi0
    psi = psi0
    for k in range(n_steps):
        psi = u_stack[k] @ psi
        psis[k + 1] = psi
    norms = np.linalg.norm(psis, axis=1)
    norm_drift = float(np.max(np.abs(norms - 1.0)))
    if norm_drift > 1e-8:
        raise IntegrationError(f"norm drift {norm_drift:.3e} exceeded 1e-8")
    times = dt * np.arange(n_steps + 1)
    obs = {name: expectation_values(psis, op)
           for name, op in (observables or {}).items()}
    states = [alg.density_from_ket(psis[i]) for i in (0, n_steps)]
    return EvolutionResult(times=times, states=states, observables=obs,
                           norm_drift=norm_drift)


def synthesis_duration(spectrum: NoiseSpectrum, duration: float,
                       dt: float, margin_factor: float = 4.0) -> float:
    """Synthesis window long enough for an unbiased ensemble over ``duration``.

    Covers the evolution window ``margin_factor`` times over (so comb-bin
    granularity stays well below the spectral resolution the system reaches
    by the end of the run), the 10-period precondition of
    :func:`dressedsim.noise.synthesize`, and its >= 50 in-band bins rule.
    """
    lo = max(spectrum.band_low, 1e-12)
    need = max(margin_factor * duration, 10.0 * TWO_PI / lo)
    if spectrum.band_high > spectrum.band_low:
        need = max(need,
                   52.0 * TWO_PI / (spectrum.band_high - spectrum.band_low))
    # keep the sample count an integer multiple of the evolution steps
    return np.ceil(need / dt) * dt


def ensemble_relaxation(spec_builder: Callable[[NoiseTrajectory], LindbladSpec],
                        spectrum: NoiseSpectrum | None, psi0: np.ndarray,
                        duration: float, dt: float, n_traj: int, seed: int,
                        observables: Mapping[str, np.ndarray],
                        record_times: np.ndarray | None = None,
                        synthesis_margin: float = 4.0,
                        keep_per_trajectory: bool = True) -> EnsembleResult:
    """Ensemble average of observables over independent noise trajectories.

    For each trajectory index ``j`` a noise realization is synthesized from
    the stream ``(seed, j)`` and the system built by ``spec_builder`` is
    propagated: with the unitary path when the spec has no jumps, with the
    Lindblad integrator (deterministic jumps plus the stochastic
    Hamiltonian) otherwise.  Averages are reduced in trajectory-index order;
    fixed ``(seed, n_traj)`` reproduces results bit for bit regardless of
    execution order.

    ``record_times`` selects the time points kept (snapped to the step
    grid); by default every step is kept.
    """
    if n_traj < 2:
        raise ValueError("n_traj must be >= 2")
    n_steps = int(round(duration / dt))
    if record_times is None:
        rec_idx = np.arange(n_steps + 1)
    else:
        rec_idx = np.unique(np.round(np.asarray(record_times) / dt
                                     ).astype(int))
        if rec_idx.min() < 0 or rec_idx.max() > n_steps:
            raise ValueError("record_times outside the evolution window")
    times = dt * rec_idx
    names = list(observables)
    values = {name: np.empty((n_traj, len(rec_idx))) for name in names}
    synth_dur = (synthesis_duration(spectrum, duration, dt, synthesis_margin)
                 if spectrum is not None else None)
    rec_set = set(int(k) for k in rec_idx)
    for j in range(n_traj):
        traj = (synthesize(spectrum, synth_dur, dt, seed, trajectory_index=j)
                if spectrum is not None else None)
        spec = spec_builder(traj)
        if spec.jumps:
            if dt > _required_lindblad_dt(spec):
                raise ValueError(f"dt={dt:.6g} too large for the dissipative "
                                 f"ensemble path: need dt <= "
                                 f"{_required_lindblad_dt(spec):.6g}")
            rho0 = alg.density_from_ket(psi0)
            recorded, _ = _rk4_lindblad(spec, rho0, n_steps, dt, rec_set)
            states = [recorded[int(k)] for k in rec_idx]
            for name in names:
                values[name][j] = expectation_values(states,
                                                     observables[name])
        else:
            result = evolve_noisy_unitary(spec, psi0, traj,
                                          observables=observables,
                                          n_steps=n_steps)
            for name in names:
                values[name][j] = result.observables[name][rec_idx]
    mean = {n: values[n].mean(axis=0) for n in names}
    stderr = {n: values[n].std(axis=0, ddof=1) / np.sqrt(n_traj)
              for n in names}
    return EnsembleResult(trajectory_count=n_traj, times=times,
                          mean_observables=mean, standard_errors=stderr,
                          seed=seed,
                          per_trajectory=values if keep_per_trajectory
                          else None)
