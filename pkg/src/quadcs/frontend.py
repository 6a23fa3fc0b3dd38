"""Simulation of the acquisition chain: chipping mixer, ideal bandpass
filtering, low-rate bandpass sampling and digital quadrature demodulation.

Two routes produce the compressive complex samples:

* `baseband_measure` - the fast baseband-equivalent path.  It chips the
  Nyquist-rate envelope samples, applies the ideal lowpass (an FFT mask over
  the selected spectral cells with gain ``B/B_cs``) and evaluates the result
  at the ``m`` output instants.  This is bit-exact against the factored
  frequency-domain operator.
* `mix_filter_sample` + `quadrature_demodulate` - the IF-level path.  The
  real IF signal is demodulated to its envelope (exact on the circle),
  chipped at the Nyquist clock, band-filtered, re-modulated onto the carrier,
  sampled at ``2*B_cs`` per the bandpass sampling theorem, and the I/Q
  streams are extracted digitally.

The chipping mixer acts on Nyquist-rate samples of the signal (an ideal
sampling mixer).  Multiplying the continuous zero-order-hold chip waveform
instead would fold the chips' spectral skirts into the measurement band and
deviate from the frequency-domain analysis at the tens-of-percent level.

Minimum-rate bandpass sampling of a *real* signal on the circle cannot carry
the imaginary part of the single spectral cell at exactly -B_cs/2 (the two
spectral replicas abut there).  The IF path therefore uses the open passband
(-B_cs/2, B_cs/2), dropping that edge cell, while the reference baseband path
keeps the operator's half-open band; `drop_edge_cell` projects reference
measurements onto the IF passband for comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .operator import ChippingSequence
from .waveforms import NyquistGrid

F0_TARGET = 450e6  # centre of the 400..500 MHz IF band used in experiments


def bandpass_sampling_freq(f_low: float, b_cs: float, l: int) -> float:
    """Admissible bandpass sampling rate (4*f_L + 2*B_cs)/(4*l + 1).

    ``l`` must satisfy ``1 <= l <= floor(f_L/(2*B_cs))``; at the upper limit
    with ``f_L/(2*B_cs)`` integral the rate reaches its minimum ``2*B_cs``.
    """
    if f_low <= 0 or b_cs <= 0:
        raise ValueError("band edge and bandwidth must be positive")
    l_max = math.floor(f_low / (2.0 * b_cs) + 1e-9)
    if not 1 <= l <= l_max:
        raise ValueError(f"sampling index l = {l} outside [1, {l_max}]")
    return (4.0 * f_low + 2.0 * b_cs) / (4.0 * l + 1.0)


@dataclass(frozen=True)
class FrontendConfig:
    """Realised acquisition parameters for one grid and measurement count.

    The compressive bandwidth is quantised to ``b_cs = m/T`` so every stage
    lands on the circular grid; ``f0 = (2l + 1/2)*b_cs`` puts the ADC in
    minimum-rate mode ``f_if = 2*b_cs``.  The filter gain ``B/b_cs`` keeps
    signal energy unchanged.
    """

    grid: NyquistGrid
    m: int
    f0: float
    l: int
    oversample: int = 16

    def __post_init__(self):
        if self.m < 2 or self.m % 2 != 0:
            raise ValueError(f"measurement count must be even and >= 2, got {self.m}")
        if (self.grid.n_cells - self.m) % 2 != 0:
            raise ValueError("n_cells - m must be even")
        b = self.grid.bandwidth
        if self.b_cs > b + 1e-9:
            raise ValueError(f"compressive bandwidth {self.b_cs} exceeds B = {b}")
        if self.f0 <= b / 2.0:
            raise ValueError(f"IF centre {self.f0} must exceed B/2 = {b / 2.0}")
        # minimum-rate mode: f0 = (2l + 1/2) b_cs with l in range
        expect = (2.0 * self.l + 0.5) * self.b_cs
        if abs(self.f0 - expect) > 1e-6 * self.b_cs:
            raise ValueError(
                f"f0 = {self.f0} is not (2l+1/2)*b_cs = {expect} (l = {self.l})"
            )
        l_max = math.floor(self.f_low / (2.0 * self.b_cs) + 1e-9)
        if not 1 <= self.l <= l_max:
            raise ValueError(f"sampling index l = {self.l} outside [1, {l_max}]")

    @property
    def b_cs(self) -> float:
        """Realised compressive bandwidth m/T (Hz)."""
        return self.m / self.grid.T

    @property
    def f_low(self) -> float:
        return self.f0 - self.b_cs / 2.0

    @property
    def f_if(self) -> float:
        """Bandpass ADC rate, minimum-rate mode: 2*b_cs."""
        return 2.0 * self.b_cs

    @property
    def t_cs(self) -> float:
        """Output complex sample period 2/f_if = 1/b_cs."""
        return 1.0 / self.b_cs

    @property
    def gain(self) -> float:
        return self.grid.bandwidth / self.b_cs

    @property
    def if_fine_cells(self) -> int:
        """Fine-grid size for the IF path: a common multiple of the Nyquist
        cells and the ADC instants, at a rate covering the IF spectrum."""
        base = math.lcm(self.grid.n_cells, 2 * self.m)
        need = max(
            self.oversample * self.grid.n_cells,
            math.ceil(2.5 * (self.f0 + self.grid.bandwidth / 2.0) * self.grid.T),
        )
        return base * math.ceil(need / base)

    @classmethod
    def for_grid(
        cls,
        grid: NyquistGrid,
        m: int,
        f0: float | None = None,
        oversample: int = 16,
    ) -> "FrontendConfig":
        """Tune f0 = (2l+1/2)*(m/T) closest to 450 MHz (or to ``f0``)."""
        b_cs = m / grid.T
        target = F0_TARGET if f0 is None else f0
        l = max(1, round((target / b_cs - 0.5) / 2.0))
        while (2 * l + 0.5) * b_cs <= grid.bandwidth / 2.0:
            l += 1
        return cls(grid=grid, m=m, f0=(2 * l + 0.5) * b_cs, l=l, oversample=oversample)

    def band_cells(self, open_band: bool = False) -> np.ndarray:
        """Selected spectral cells as signed harmonics of 1/T.

        Half-open ``[-m/2, m/2)`` matches the operator's row selector; the
        open variant drops the degenerate ``-m/2`` edge cell.
        """
        lo = -(self.m // 2) + (1 if open_band else 0)
        return np.arange(lo, self.m // 2)


class Measurements(NamedTuple):
    """Compressive complex samples with their I/Q split and noise component."""

    samples: np.ndarray
    i_samples: np.ndarray
    q_samples: np.ndarray
    noise: np.ndarray | None = None


def _band_coefficients(
    nyquist_signal: np.ndarray,
    chip: ChippingSequence,
    cfg: FrontendConfig,
    open_band: bool,
) -> tuple[np.ndarray, np.ndarray]:
    """Fourier coefficients of the filtered chipped signal on the band cells."""
    nc = cfg.grid.n_cells
    if len(nyquist_signal) != nc:
        raise ValueError(
            f"expected {nc} Nyquist-rate samples, got {len(nyquist_signal)}"
        )
    chipped = chip.values * nyquist_signal
    spectrum = np.fft.fft(chipped)
    cells = cfg.band_cells(open_band)
    return cells, spectrum[cells % nc] * (cfg.gain / nc)


def _sample_band(cells: np.ndarray, coeffs: np.ndarray, m: int) -> np.ndarray:
    """Evaluate sum_q c_q exp(2j*pi*q*t/T) at the m instants t = k*T/m."""
    full = np.zeros(m, dtype=complex)
    full[cells % m] += coeffs
    return m * np.fft.ifft(full)


def _decimate_to_nyquist(signal: np.ndarray, cfg: FrontendConfig) -> np.ndarray:
    nc = cfg.grid.n_cells
    if len(signal) % nc != 0:
        raise ValueError(
            f"signal length {len(signal)} is not a multiple of the "
            f"{nc} Nyquist cells"
        )
    return np.asarray(signal)[:: len(signal) // nc]


def baseband_measure(
    envelope: np.ndarray,
    chip: ChippingSequence,
    cfg: FrontendConfig,
    open_band: bool = False,
) -> Measurements:
    """Compressive complex envelope samples from the baseband-equivalent path.

    ``envelope`` holds complex-envelope samples at the Nyquist rate or an
    integer multiple of it (the chipping clock samples it down).  The output
    holds ``m`` samples taken every ``t_cs`` seconds.
    """
    nyq = _decimate_to_nyquist(envelope, cfg)
    cells, coeffs = _band_coefficients(nyq, chip, cfg, open_band)
    s = _sample_band(cells, coeffs, cfg.m)
    return Measurements(samples=s, i_samples=s.real, q_samples=s.imag)


def drop_edge_cell(samples: np.ndarray, cfg: FrontendConfig) -> np.ndarray:
    """Remove the -B_cs/2 spectral cell from time-domain measurements.

    Projects reference (half-open band) measurements onto the open passband
    the IF path realises.
    """
    m = cfg.m
    alt = np.where(np.arange(m) % 2 == 0, 1.0, -1.0)
    coeff = np.dot(alt, samples) / m
    return samples - coeff * alt


def mix_filter_sample(
    if_samples: np.ndarray,
    chip: ChippingSequence,
    cfg: FrontendConfig,
) -> np.ndarray:
    """Low-rate real samples y[k] of the compressive bandpass signal.

    The chain: recover the complex envelope from the real IF signal (exact on
    the circle), chip it at the Nyquist clock, apply the ideal bandpass
    (open passband, gain B/b_cs), re-modulate onto f0 and sample the real
    result at ``f_if = 2*b_cs``.  Returns ``2*m`` real samples obeying the
    alternating I/Q pattern of minimum-rate quadrature sampling.
    """
    n_fine = cfg.if_fine_cells
    if len(if_samples) != n_fine:
        raise ValueError(
            f"expected {n_fine} fine-grid samples (rate a common multiple of "
            f"B and f_if), got {len(if_samples)}"
        )
    fine_rate = n_fine / cfg.grid.T
    if fine_rate <= 2.0 * (cfg.f0 + cfg.grid.bandwidth / 2.0):
        raise ValueError("fine grid rate does not cover the IF spectrum")
    # exact envelope recovery: analytic signal, then carrier removal
    spectrum = np.fft.fft(np.asarray(if_samples, dtype=float))
    weights = np.zeros(n_fine)
    weights[1 : n_fine // 2] = 2.0
    weights[0] = 1.0
    if n_fine % 2 == 0:
        weights[n_fine // 2] = 1.0
    t = np.arange(n_fine) * (cfg.grid.T / n_fine)
    carrier = np.exp(2j * np.pi * cfg.f0 * t)
    envelope = np.fft.ifft(spectrum * weights) * np.conj(carrier)
    # sampling mixer at the chip clock, then the ideal bandpass filter
    nyq = _decimate_to_nyquist(envelope, cfg)
    cells, coeffs = _band_coefficients(nyq, chip, cfg, open_band=True)
    comp = np.zeros(n_fine, dtype=complex)
    comp[cells % n_fine] = coeffs
    compressive = np.fft.ifft(comp) * n_fine
    y_fine = np.real(compressive * carrier)
    return y_fine[:: n_fine // (2 * cfg.m)]


def quadrature_demodulate(y: np.ndarray, cfg: FrontendConfig) -> Measurements:
    """Digital I/Q extraction from minimum-rate bandpass samples.

    I: keep even samples, multiply by (-1)^k.  Q: demodulate by
    -2 sin(pi k/2), halfband lowpass (FFT mask), decimate by two.  Both
    streams are aligned at the instants ``k*t_cs``.  Odd-length inputs are
    truncated by one trailing sample.
    """
    y = np.asarray(y, dtype=float)
    if len(y) % 2 != 0:
        y = y[:-1]
    n = len(y)
    m = n // 2
    k = np.arange(n)
    i_samples = y[0::2] * np.where(np.arange(m) % 2 == 0, 1.0, -1.0)
    demod = y * (-2.0 * np.sin(np.pi * k / 2.0))
    mask = np.zeros(n)
    half = m // 2
    mask[1:half] = 1.0
    mask[0] = 1.0
    if half > 0:
        mask[-(half - 1) :] = 1.0 if half > 1 else mask[-(half - 1) :]
        mask[n - half + 1 :] = 1.0
    lowpassed = np.fft.ifft(np.fft.fft(demod) * mask).real
    q_samples = lowpassed[0::2]
    s = i_samples + 1j * q_samples
    return Measurements(samples=s, i_samples=i_samples, q_samples=q_samples)


def halfband_fir(taps: int = 63) -> np.ndarray:
    """Hamming-windowed halfband lowpass, the realisable h_lp alternative."""
    if taps % 2 == 0:
        raise ValueError("tap count must be odd")
    n = np.arange(taps) - (taps - 1) / 2.0
    h = 0.5 * np.sinc(n / 2.0)
    return h * np.hamming(taps)


def quadrature_demodulate_fir(
    y: np.ndarray, cfg: FrontendConfig, taps: int = 63
) -> Measurements:
    """Q-path variant using a circular FIR halfband filter (demonstration)."""
    y = np.asarray(y, dtype=float)
    if len(y) % 2 != 0:
        y = y[:-1]
    n = len(y)
    m = n // 2
    k = np.arange(n)
    i_samples = y[0::2] * np.where(np.arange(m) % 2 == 0, 1.0, -1.0)
    demod = y * (-2.0 * np.sin(np.pi * k / 2.0))
    h = halfband_fir(taps)
    kernel = np.zeros(n)
    centre = (taps - 1) // 2
    for j, hj in enumerate(h):
        kernel[(j - centre) % n] += hj
    lowpassed = np.fft.ifft(np.fft.fft(demod) * np.fft.fft(kernel)).real
    q_samples = lowpassed[0::2]
    s = i_samples + 1j * q_samples
    return Measurements(samples=s, i_samples=i_samples, q_samples=q_samples)


class NoisySignal(NamedTuple):
    noisy: np.ndarray
    noise: np.ndarray


def add_bandlimited_noise(
    signal: np.ndarray,
    noise_density: float,
    bandwidth: float,
    rng: np.random.Generator,
    rate: float | None = None,
) -> NoisySignal:
    """Add circular complex Gaussian envelope noise of one-sided density N0.

    The complex envelope of bandpass noise with power spectral density N0/2
    over the band ``f0 +/- B/2`` has power ``2*N0*B`` (each of I and Q carries
    ``N0*B``).  At the Nyquist rate the samples are i.i.d.; on finer grids
    the noise is brick-wall bandlimited to ``+/- B/2``.
    """
    if noise_density < 0 or bandwidth <= 0:
        raise ValueError("noise density must be >= 0 and bandwidth positive")
    signal = np.asarray(signal, dtype=complex)
    n = len(signal)
    if noise_density == 0.0:
        return NoisySignal(noisy=signal.copy(), noise=np.zeros(n, dtype=complex))
    rate = bandwidth if rate is None else rate
    factor = rate / bandwidth
    if abs(factor - round(factor)) > 1e-9:
        raise ValueError("sample rate must be an integer multiple of the bandwidth")
    factor = int(round(factor))
    if n % factor != 0:
        raise ValueError("signal length incompatible with the oversampling factor")
    sigma = math.sqrt(noise_density * bandwidth)  # per real dimension
    base = sigma * (
        rng.standard_normal(n // factor) + 1j * rng.standard_normal(n // factor)
    )
    if factor > 1:
        from .waveforms import bandlimited_upsample

        noise = bandlimited_upsample(base, factor)
    else:
        noise = base
    return NoisySignal(noisy=signal + noise, noise=noise)


def noise_density_for_isnr(r_power: float, isnr_db: float) -> float:
    """Invert ISNR = (int |r|^2 dt / T) / (N0 B): returns N0*B.

    ``r_power`` is the time-averaged power of the real IF signal over the
    whole observation interval.
    """
    if r_power <= 0:
        raise ValueError("signal power must be positive")
    return r_power / (10.0 ** (isnr_db / 10.0))
