"""Band-limited classical detuning noise: synthesis, estimation, calibration.

Conventions
-----------
All spectra are two-sided power spectral densities of angular-frequency
fluctuations, parametrized by angular frequency omega (rad/us) and carrying
units of rad^2/us.  Only omega >= 0 is stored; S(-omega) = S(omega) is
implicit.  With this convention the Wiener-Khinchin relation reads

    var = (1/2pi) * integral S(omega) d omega  over the full real line,

and the dressed-state relaxation law has no hidden 2pi factors.  Laboratory
inputs in ordinary-frequency MHz are converted by multiplying by 2pi at the
configuration boundary (see :mod:`dressedsim.cli`), never here.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

TWO_PI = 2.0 * np.pi

#: CSV headers for the external tabulated-spectrum / trajectory interfaces.
SPECTRUM_CSV_HEADER = "omega_rad_per_us,psd_rad2_per_us"
TRAJECTORY_CSV_HEADER = "t_us,delta_rad_per_us"


@dataclass(frozen=True)
class NoiseSpectrum:
    """Target two-sided PSD of detuning fluctuations.

    ``kind`` is either ``"flat-band"`` (constant ``level`` on
    ``[band_low, band_high]``, zero outside) or ``"tabulated"`` (linear
    interpolation of ``table``, zero outside its support).
    """

    kind: str
    band_low: float
    band_high: float
    level: float = 0.0
    table: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("flat-band", "tabulated"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if not self.band_low < self.band_high:
            raise ValueError(f"band_low {self.band_low} must be < band_high "
                             f"{self.band_high}")
        if self.level < 0:
            raise ValueError("PSD level must be >= 0")
        if self.kind == "tabulated":
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 2:
                raise ValueError("table must be an (n, 2) array of "
                                 "(omega, psd) rows with n >= 2")
            if np.any(tab[:, 0] < 0):
                raise ValueError("tabulated omega values must be >= 0")
            if np.any(np.diff(tab[:, 0]) <= 0):
                raise ValueError("tabulated omega values must be increasing")
            if np.any(tab[:, 1] < 0):
                raise ValueError("tabulated PSD values must be >= 0")
            object.__setattr__(self, "table", tab)

    @classmethod
    def flat_band(cls, level: float, band_low: float,
                  band_high: float) -> "NoiseSpectrum":
        """Flat two-sided PSD ``level`` on the angular band ``[low, high]``."""
        return cls(kind="flat-band", band_low=band_low, band_high=band_high,
                   level=level)

    @classmethod
    def from_table(cls, omegas, psd) -> "NoiseSpectrum":
        """Tabulated spectrum from matching (omega, psd) arrays."""
        table = np.column_stack([np.asarray(omegas, dtype=float),
                                 np.asarray(psd, dtype=float)])
        return cls._from_table_impl(table)

    @classmethod
    def _from_table_impl(cls, table: np.ndarray) -> "NoiseSpectrum":
        lo = float(table[0, 0])
        hi = float(table[-1, 0])
        # a table may legitimately start at omega = 0
        return cls(kind="tabulated", band_low=lo if lo > 0 else -1e-12,
                   band_high=hi, table=table)

    def psd_at(self, omega) -> np.ndarray | float:
        """Evaluate S(|omega|); zero outside the stored support."""
        w = np.abs(np.asarray(omega, dtype=float))
        if self.kind == "flat-band":
            out = np.where((w >= self.band_low) & (w <= self.band_high),
                           self.level, 0.0)
        else:
            out = np.interp(w, self.table[:, 0], self.table[:, 1],
                            left=0.0, right=0.0)
        return out if out.ndim else float(out)

    def variance(self) -> float:
        """Process variance, (1/pi) * integral_0^inf S(omega) d omega."""
        if self.kind == "flat-band":
            return self.level * (self.band_high - self.band_low) / np.pi
        return float(np.trapezoid(self.table[:, 1], self.table[:, 0]) / np.pi)

    def scaled(self, factor: float) -> "NoiseSpectrum":
        """Spectrum with the PSD multiplied by ``factor`` (a power knob)."""
        if factor < 0:
            raise ValueError("scale factor must be >= 0")
        if self.kind == "flat-band":
            return NoiseSpectrum.flat_band(self.level * factor,
                                           self.band_low, self.band_high)
        table = self.table.copy()
        table[:, 1] *= factor
        return NoiseSpectrum._from_table_impl(table)

    def to_csv(self) -> str:
        if self.kind != "tabulated":
            raise ValueError("only tabulated spectra have a CSV form")
        buf = io.StringIO()
        buf.write(SPECTRUM_CSV_HEADER + "\n")
        for w, s in self.table:
            buf.write(f"{w:.17g},{s:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "NoiseSpectrum":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0].strip() != SPECTRUM_CSV_HEADER:
            raise ValueError(f"expected header {SPECTRUM_CSV_HEADER!r}")
        rows = [tuple(float(x) for x in ln.split(",")) for ln in lines[1:]]
        table = np.array(rows, dtype=float)
        return cls._from_table_impl(table)


@dataclass(frozen=True)
class NoiseTrajectory:
    """A concrete time-domain realization delta(t_k) of the detuning noise.

    ``samples[k]`` holds the value on ``[k*dt, (k+1)*dt)``; evolution code
    treats the Hamiltonian as piecewise constant over each sample.  ``seed``
    records the (master_seed, trajectory_index) pair that generated it.
    """

    dt: float
    samples: np.ndarray = field(repr=False)
    seed: tuple[int, int] | None = None

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("a trajectory needs at least two samples")
        object.__setattr__(self, "samples", samples)

    @property
    def duration(self) -> float:
        return self.dt * len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.samples))

    def variance(self) -> float:
        return float(np.var(self.samples))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(TRAJECTORY_CSV_HEADER + "\n")
        for t, x in zip(self.times, self.samples):
            buf.write(f"{t:.17g},{x:.17g}\n")
        return buf.getvalue()


def trajectory_rng(seed: int, trajectory_index: int = 0) -> np.random.Generator:
    """Per-trajectory RNG stream derived from (master seed, index).

    Streams are independent and do not depend on the order in which they are
    created, so ensembles are reproducible under any execution schedule.
    """
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(trajectory_index,)))


def synthesize(spectrum: NoiseSpectrum, duration: float, dt: float,
               seed: int, trajectory_index: int = 0,
               min_in_band_bins: int = 50) -> NoiseTrajectory:
    """Draw one stationary Gaussian-like realization with the target PSD.

    The realization is a cosine comb, ``delta(t) = sum_k A_k cos(w_k t +
    phi_k)``, with bin spacing ``2pi/duration``, independent uniform phases,
    and deterministic amplitudes ``A_k = sqrt(2 S(w_k) dw / pi)`` so that the
    realized two-sided PSD equals ``S`` and the variance obeys
    Wiener-Khinchin.  The whole comb is shifted by a uniform random sub-bin
    frequency offset per trajectory, so the ensemble explores a continuum of
    frequencies rather than a fixed grid (a fixed grid pins comb lines onto
    system resonances and biases ensemble decay rates).

    Parameters
    ----------
    spectrum : NoiseSpectrum
        Target two-sided PSD.
    duration : float
        Length of the realization (us); must cover >= 10 periods of the
        lowest band frequency.
    dt : float
        Sample step (us); must resolve the highest band frequency with >= 10
        samples per period.
    seed, trajectory_index : int
        RNG stream selector; fixed (seed, index) reproduces the trajectory.
    min_in_band_bins : int
        Minimum number of comb bins inside the band, enforcing approximate
        Gaussianity of the marginal by the central limit theorem.

    Returns
    -------
    NoiseTrajectory
    """
    if dt <= 0 or duration <= 0:
        raise ValueError("duration and dt must be positive")
    if dt > TWO_PI / (10.0 * spectrum.band_high):
        raise ValueError(
            f"dt={dt} too coarse: need dt <= 2pi/(10*band_high) = "
            f"{TWO_PI / (10.0 * spectrum.band_high):.6g}")
    band_low_eff = max(spectrum.band_low, 0.0)
    if band_low_eff > 0 and duration < 10.0 * TWO_PI / band_low_eff:
        raise ValueError(
            f"duration={duration} too short: need >= 10*2pi/band_low = "
            f"{10.0 * TWO_PI / band_low_eff:.6g}")
    n = int(round(duration / dt))
    rng = trajectory_rng(seed, trajectory_index)
    zero_level = (spectrum.kind == "flat-band" and spectrum.level == 0.0) or (
        spectrum.kind == "tabulated" and not np.any(spectrum.table[:, 1] > 0))
    if zero_level:
        return NoiseTrajectory(dt=dt, samples=np.zeros(n),
                               seed=(seed, trajectory_index))
    dw = TWO_PI / duration
    offset = rng.uniform(0.0, 1.0)
    k = np.arange(1, n // 2 + 1)
    wk = (k + offset) * dw
    psd = np.asarray(spectrum.psd_at(wk), dtype=float)
    n_in_band = int(np.count_nonzero(psd > 0))
    if n_in_band < min_in_band_bins:
        raise ValueError(
            f"only {n_in_band} comb bins fall in the band; need >= "
            f"{min_in_band_bins} (increase duration)")
    amps = np.sqrt(2.0 * psd * dw / np.pi)
    phases = rng.uniform(0.0, TWO_PI, size=k.size)
    coeff = np.zeros(n, dtype=complex)
    coeff[1:n // 2 + 1] = n * amps * np.exp(1j * phases)
    # analytic comb on the integer grid, then the sub-bin offset as a ramp
    z = np.fft.ifft(coeff)
    ramp = np.exp(1j * (TWO_PI * offset / n) * np.arange(n))
    return NoiseTrajectory(dt=dt, samples=(z * ramp).real,
                           seed=(seed, trajectory_index))


def estimate_psd(traj: NoiseTrajectory, segment_len: int) -> NoiseSpectrum:
    """Averaged-periodogram (Welch, rectangular, no overlap) PSD estimate.

    Returns a tabulated two-sided spectrum on the nonnegative FFT
    frequencies of a segment.  Parseval consistency holds: integrating the
    estimate over all frequencies recovers the sample variance.
    """
    n = len(traj.samples)
    if segment_len > n:
        raise ValueError(f"segment_len {segment_len} exceeds trajectory "
                         f"length {n}")
    if segment_len < 2 or segment_len & (segment_len - 1):
        raise ValueError("segment_len must be a power of two")
    freqs, psd = signal.welch(
        traj.samples, fs=1.0 / traj.dt, window="boxcar", nperseg=segment_len,
        noverlap=0, detrend=False, return_onesided=False, scaling="density")
    keep = freqs >= 0
    order = np.argsort(freqs[keep])
    omegas = TWO_PI * freqs[keep][order]
    # the per-Hz two-sided density numerically equals the angular-argument
    # density in the (1/2pi) integral convention
    return NoiseSpectrum._from_table_impl(
        np.column_stack([omegas, psd[keep][order]]))


def gate_window(traj: NoiseTrajectory, t_on: float,
                t_off: float) -> NoiseTrajectory:
    """Zero the trajectory outside the window ``[t_on, t_off)``."""
    if not 0.0 <= t_on < t_off:
        raise ValueError(f"need 0 <= t_on < t_off, got [{t_on}, {t_off})")
    if t_off > traj.duration + 0.5 * traj.dt:
        raise ValueError(f"t_off {t_off} exceeds trajectory duration "
                         f"{traj.duration}")
    times = traj.times
    gated = np.where((times >= t_on) & (times < t_off), traj.samples, 0.0)
    return NoiseTrajectory(dt=traj.dt, samples=gated, seed=traj.seed)


@dataclass(frozen=True)
class PowerCalibration:
    """Measurement-chain constants linking analyzer readings to qubit PSD."""

    sigma: float            # AWG voltage noise std (V)
    impedance: float        # line impedance (ohm)
    chain_factor: float     # dimensionless net attenuation/gain factor
    freq_sensitivity: float  # qubit frequency-vs-voltage slope (Hz/V)
    rbw: float              # analyzer resolution bandwidth (Hz)

    def __post_init__(self):
        for name in ("sigma", "impedance", "chain_factor",
                     "freq_sensitivity", "rbw"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


def output_power(sigma: float, impedance: float) -> float:
    """Average noise power sigma^2 / R delivered into a matched load (W)."""
    if sigma < 0 or impedance <= 0:
        raise ValueError("sigma must be >= 0 and impedance > 0")
    return sigma * sigma / impedance


def psd_from_analyzer(p_avg_dbm: float, cal: PowerCalibration) -> float:
    """Qubit frequency-noise PSD (rad^2/s) from an analyzer power reading.

    Applies ``S = C * 10^((P-30)/10) / RBW * R * (2pi * df/dV)^2`` with P in
    dBm; monotone increasing in P.
    """
    watts = 10.0 ** ((p_avg_dbm - 30.0) / 10.0)
    return (cal.chain_factor * watts / cal.rbw * cal.impedance
            * (TWO_PI * cal.freq_sensitivity) ** 2)


def autocovariance_psd(samples: np.ndarray, dt: float,
                       omegas: np.ndarray, max_lag: int | None = None,
                       ) -> np.ndarray:
    """Direct autocovariance-sum PSD, an independent cross-check estimator.

    Computes ``S(w) = dt * sum_k R_hat(k) exp(i w k dt)`` from the biased
    sample autocovariance.  O(n * lags); used by tests as an oracle for the
    Welch path, not meant for production sizes.
    """
    x = np.asarray(samples, dtype=float)
    x = x - x.mean()
    n = len(x)
    if max_lag is None:
        max_lag = n - 1
    acov = np.array([np.dot(x[:n - k], x[k:]) / n for k in range(max_lag + 1)])
    omegas = np.asarray(omegas, dtype=float)
    lags = np.arange(1, max_lag + 1) * dt
    s = acov[0] + 2.0 * np.cos(np.outer(omegas, lags)) @ acov[1:]
    return dt * s
