"""Radar baseband waveforms, target scenes, and the waveform-matched dictionary.

Conventions used throughout the package:

* Time is circular with period ``T`` (the observation interval); every shift
  and convolution wraps.  ``T`` holds an integer number of Nyquist cells of
  width ``tau0 = 1/B``.
* The dictionary consists of the first ``N`` circular shifts of the baseband
  pulse, column ``n`` carrying delay ``n*tau0`` (``n = 0..N-1``).  ``N`` is
  the number of resolvable delays in ``(0, T - Tp]``.
* Baseband pulses have unit modulus inside the pulse; measurement operators
  normalise atoms to unit energy separately (see :mod:`quadcs.operator`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class WaveformKind(enum.Enum):
    LFM = "lfm"
    PHASE_CODED = "phase_coded"


def zadoff_chu_code(num_bits: int, root: int = 1) -> np.ndarray:
    """Zadoff-Chu phase code of length ``num_bits``.

    phi_m = pi*root*m^2/M for even M, pi*root*m*(m+1)/M for odd M.  The root
    must be coprime with the length, which yields the ideal (impulse-like)
    periodic autocorrelation of the unit-modulus code exp(j*phi_m).
    """
    if num_bits < 1:
        raise ValueError(f"code length must be >= 1, got {num_bits}")
    if math.gcd(root, num_bits) != 1:
        raise ValueError(
            f"Zadoff-Chu root {root} shares a factor with length {num_bits}"
        )
    m = np.arange(num_bits)
    if num_bits % 2 == 0:
        phases = np.pi * root * m**2 / num_bits
    else:
        phases = np.pi * root * m * (m + 1) / num_bits
    return phases


@dataclass(frozen=True)
class WaveformSpec:
    """Parametric description of the transmitted baseband pulse.

    For LFM the chirp rate is ``mu = bandwidth/pulse_width``.  For phase-coded
    pulses the bit width is ``1/bandwidth`` and ``num_bits`` must equal
    ``round(pulse_width*bandwidth)``; ``phase_code`` defaults to a Zadoff-Chu
    code with root ``zc_root``.
    """

    kind: WaveformKind
    pulse_width: float
    bandwidth: float
    zc_root: int = 1
    phase_code: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.pulse_width <= 0:
            raise ValueError(f"pulse_width must be positive, got {self.pulse_width}")
        if self.bandwidth <= 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.kind is WaveformKind.PHASE_CODED:
            code = self.phase_code
            if code is None:
                code = zadoff_chu_code(self.num_bits, self.zc_root)
            code = np.asarray(code, dtype=float)
            if len(code) != self.num_bits:
                raise ValueError(
                    f"phase code length {len(code)} != num_bits {self.num_bits}"
                )
            object.__setattr__(self, "phase_code", code)

    @property
    def chirp_rate(self) -> float:
        """LFM chirp rate mu = B/Tp (Hz/s)."""
        return self.bandwidth / self.pulse_width

    @property
    def num_bits(self) -> int:
        """Number of code bits M_b = round(Tp*B) for phase-coded pulses."""
        nb = self.pulse_width * self.bandwidth
        if abs(nb - round(nb)) > 1e-6:
            raise ValueError(f"Tp*B = {nb} is not an integer bit count")
        return int(round(nb))

    @property
    def bit_width(self) -> float:
        """Bit duration T_b = 1/B."""
        return 1.0 / self.bandwidth

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind.value,
            "pulse_width": self.pulse_width,
            "bandwidth": self.bandwidth,
            "zc_root": self.zc_root,
        }
        if self.kind is WaveformKind.PHASE_CODED and self.phase_code is not None:
            d["phase_code"] = [float(p) for p in self.phase_code]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "WaveformSpec":
        code = d.get("phase_code")
        return cls(
            kind=WaveformKind(d["kind"]),
            pulse_width=float(d["pulse_width"]),
            bandwidth=float(d["bandwidth"]),
            zc_root=int(d.get("zc_root", 1)),
            phase_code=None if code is None else np.asarray(code, dtype=float),
        )


def baseband_waveform(spec: WaveformSpec, t: np.ndarray) -> np.ndarray:
    """Complex baseband pulse evaluated at times ``t`` (seconds).

    Zero outside ``[0, Tp)``; unit modulus inside.  LFM carries the quadratic
    phase ``pi*mu*(t - Tp/2)^2``; phase-coded pulses hold ``exp(j*phi_m)``
    over bit m occupying ``[m*T_b, (m+1)*T_b)``.
    """
    t = np.asarray(t, dtype=float)
    tp = spec.pulse_width
    inside = (t >= 0.0) & (t < tp)
    out = np.zeros(t.shape, dtype=complex)
    if spec.kind is WaveformKind.LFM:
        tt = t[inside] - tp / 2.0
        out[inside] = np.exp(1j * np.pi * spec.chirp_rate * tt * tt)
    else:
        bits = np.floor(t[inside] / spec.bit_width).astype(int)
        bits = np.clip(bits, 0, spec.num_bits - 1)
        out[inside] = np.exp(1j * spec.phase_code[bits])
    return out


@dataclass(frozen=True)
class NyquistGrid:
    """Delay grid of the waveform-matched dictionary on the circular axis.

    ``tau0 = 1/B`` is the delay resolution, ``n_delays`` the dictionary size
    (``floor(B*(T - Tp))``) and ``T`` the observation interval.  ``n_cells =
    B*T`` is the number of Nyquist cells in one period; it must be an even
    integer so the frequency-domain factorisation is well defined.
    """

    tau0: float
    n_delays: int
    T: float

    def __post_init__(self):
        if self.n_delays < 1:
            raise ValueError(f"need at least one delay cell, got {self.n_delays}")
        cells = self.T / self.tau0
        if abs(cells - round(cells)) > 1e-6:
            raise ValueError(f"T/tau0 = {cells} is not an integer")
        if round(cells) % 2 != 0:
            raise ValueError(f"T/tau0 = {round(cells)} must be even")
        if self.n_delays * self.tau0 > self.T + 1e-12 * self.T:
            raise ValueError("n_delays*tau0 exceeds the observation interval")

    @property
    def n_cells(self) -> int:
        """Nyquist cells per observation interval (B*T)."""
        return int(round(self.T / self.tau0))

    @property
    def bandwidth(self) -> float:
        return 1.0 / self.tau0

    @classmethod
    def for_radar(cls, bandwidth: float, T: float, pulse_width: float) -> "NyquistGrid":
        """Grid with n_delays = floor(B*(T - Tp)), the simulated configuration."""
        tau0 = 1.0 / bandwidth
        n = int(math.floor(bandwidth * (T - pulse_width) + 1e-9))
        return cls(tau0=tau0, n_delays=n, T=T)

    def delay_of(self, index: int) -> float:
        return index * self.tau0

    def times(self, oversample: int = 1) -> np.ndarray:
        """Sample instants covering one period at ``oversample * B``."""
        n = self.n_cells * oversample
        return np.arange(n) * (self.T / n)


@dataclass(frozen=True)
class TargetScene:
    """K point targets: delays (s), gains in (0, 1] and phases in (0, 2*pi]."""

    delays: np.ndarray
    gains: np.ndarray
    phases: np.ndarray
    on_grid: bool = True

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.delays, dtype=float))
        g = np.atleast_1d(np.asarray(self.gains, dtype=float))
        p = np.atleast_1d(np.asarray(self.phases, dtype=float))
        if not (len(d) == len(g) == len(p)):
            raise ValueError("delays, gains and phases must have equal length")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "gains", g)
        object.__setattr__(self, "phases", p)

    @property
    def sparsity(self) -> int:
        return len(self.delays)

    def validate(self, grid: NyquistGrid, spec: WaveformSpec) -> None:
        """Targets must lie in (0, T - Tp] so no pulse wraps past T."""
        hi = grid.T - spec.pulse_width
        if self.sparsity and (
            np.any(self.delays <= 0) or np.any(self.delays > hi + 1e-12)
        ):
            raise ValueError(f"target delays must lie in (0, {hi:.6g}] seconds")


@dataclass(frozen=True)
class SparseCoefficients:
    """Coefficient vector of the scene in the waveform-matched dictionary."""

    values: np.ndarray
    support: np.ndarray

    @property
    def sparsity(self) -> int:
        return len(self.support)


def random_scene(
    grid: NyquistGrid,
    spec: WaveformSpec,
    sparsity: int,
    rng: np.random.Generator,
    on_grid: bool = True,
    fine_step: float | None = None,
) -> TargetScene:
    """Draw a scene: gains uniform(0,1], phases uniform(0,2*pi], delays uniform.

    On-grid delays are distinct multiples of tau0 in (0, (N-1)*tau0].
    Off-grid delays are uniform over (0, T - Tp] quantised to ``fine_step``
    (default tau0/16), reproducing the basis-mismatch setup.
    """
    if on_grid:
        cells = rng.choice(np.arange(1, grid.n_delays), size=sparsity, replace=False)
        delays = cells * grid.tau0
    else:
        step = fine_step if fine_step is not None else grid.tau0 / 16.0
        hi = grid.T - spec.pulse_width
        lo = grid.tau0  # keep clear of the excluded zero delay
        raw = rng.uniform(lo, hi, size=sparsity)
        delays = np.round(raw / step) * step
        delays = np.clip(delays, step, hi)
    gains = 1.0 - rng.uniform(0.0, 1.0, size=sparsity)  # uniform over (0, 1]
    phases = 2.0 * np.pi * (1.0 - rng.uniform(0.0, 1.0, size=sparsity))
    return TargetScene(delays=delays, gains=gains, phases=phases, on_grid=on_grid)


def complex_envelope(
    scene: TargetScene,
    spec: WaveformSpec,
    grid: NyquistGrid,
    f0: float = 0.0,
    oversample: int = 1,
) -> np.ndarray:
    """Complex envelope s(t) = sum_k v_k exp(j*phi'_k) s0(t - t_k) on the circle.

    ``phi'_k = phi_k - 2*pi*f0*t_k`` folds the carrier phase at delay t_k into
    the coefficient, so Re{s(t) exp(j*2*pi*f0*t)} is the received IF signal.
    Evaluated exactly at ``oversample * B`` instants; shifts wrap at T.
    """
    scene.validate(grid, spec)
    t = grid.times(oversample)
    out = np.zeros(len(t), dtype=complex)
    for tk, vk, pk in zip(scene.delays, scene.gains, scene.phases):
        phase = pk - 2.0 * np.pi * f0 * tk
        out += vk * np.exp(1j * phase) * baseband_waveform(spec, (t - tk) % grid.T)
    return out


def if_signal(
    scene: TargetScene,
    spec: WaveformSpec,
    f0: float,
    grid: NyquistGrid,
    oversample: int,
) -> np.ndarray:
    """Real IF signal r(t) = Re{s(t) exp(j*2*pi*f0*t)} on the fine grid.

    The fine rate ``oversample * B`` must exceed ``2*(f0 + B/2)``.  The
    modulated envelope is the bandlimited interpolation of its Nyquist-rate
    samples: an IF stage only carries content inside its passband, and this
    makes ideal demodulation an exact inverse on the circle.
    """
    fine_rate = oversample * grid.bandwidth
    if fine_rate <= 2.0 * (f0 + grid.bandwidth / 2.0):
        raise ValueError(
            f"fine rate {fine_rate:.4g} Hz must exceed 2*(f0 + B/2) = "
            f"{2.0 * (f0 + grid.bandwidth / 2.0):.4g} Hz"
        )
    env = complex_envelope(scene, spec, grid, f0=f0, oversample=1)
    fine = bandlimited_upsample(env, oversample)
    t = grid.times(oversample)
    return np.real(fine * np.exp(2j * np.pi * f0 * t))


def bandlimited_upsample(x: np.ndarray, factor: int) -> np.ndarray:
    """Circular bandlimited interpolation by an integer factor (FFT zero-pad).

    The Nyquist bin of an even-length input is split half/half between the
    +/- band edges so real inputs stay real.
    """
    if factor == 1:
        return np.asarray(x, dtype=complex)
    n = len(x)
    spec = np.fft.fft(x)
    out = np.zeros(n * factor, dtype=complex)
    h = n // 2
    if n % 2 == 0:
        out[:h] = spec[:h]
        out[h] = 0.5 * spec[h]
        out[-h] = 0.5 * spec[h]
        out[-h + 1 :] = spec[h + 1 :]
    else:
        out[: h + 1] = spec[: h + 1]
        out[-h:] = spec[h + 1 :]
    return np.fft.ifft(out) * factor


def scene_to_coefficients(
    scene: TargetScene,
    grid: NyquistGrid,
    f0: float = 0.0,
) -> SparseCoefficients:
    """Exact dictionary coefficients of an on-grid scene.

    Entry n (delay ``n*tau0``) holds ``v_k exp(j(phi_k - 2*pi*f0*t_k))`` for
    the target at ``t_k = n*tau0``.  Off-grid scenes have no exact expansion;
    they are handled by measuring the synthesised envelope directly
    (basis-mismatch experiment path).
    """
    if not scene.on_grid:
        raise ValueError(
            "off-grid scene has no exact coefficient vector; measure its "
            "envelope through the frontend instead"
        )
    values = np.zeros(grid.n_delays, dtype=complex)
    cells = []
    for tk, vk, pk in zip(scene.delays, scene.gains, scene.phases):
        cell = tk / grid.tau0
        if abs(cell - round(cell)) > 1e-6:
            raise ValueError(f"delay {tk} is not a multiple of tau0 = {grid.tau0}")
        cell = int(round(cell))
        if not 1 <= cell < grid.n_delays:
            raise ValueError(
                f"delay cell {cell} outside the dictionary range "
                f"[1, {grid.n_delays - 1}]"
            )
        values[cell] = vk * np.exp(1j * (pk - 2.0 * np.pi * f0 * tk))
        cells.append(cell)
    return SparseCoefficients(values=values, support=np.asarray(sorted(cells)))


def synthesize_envelope(
    coeffs: np.ndarray,
    spec: WaveformSpec,
    grid: NyquistGrid,
    oversample: int = 1,
) -> np.ndarray:
    """Envelope sum_n v_n s0(t - n*tau0) from a coefficient vector."""
    t = grid.times(oversample)
    out = np.zeros(len(t), dtype=complex)
    for n in np.flatnonzero(coeffs):
        out += coeffs[n] * baseband_waveform(spec, (t - n * grid.tau0) % grid.T)
    return out
