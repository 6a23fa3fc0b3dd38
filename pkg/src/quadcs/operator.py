"""The compressive measurement operator in both of its representations.

The frequency-domain operator factors as ``row-selector @ chip-circulant @
dictionary-spectrum`` and is applied matrix-free with FFTs in O(Nc log Nc);
a dense realisation built entry-by-entry from the defining formulas serves
as the oracle for it, and a dense time-domain operator (columns = the
acquisition chain applied to each atom) cross-checks the whole pipeline.

Indexing: frequencies live on the shifted grid ``w_l = -pi + 2*pi*l/Nc``
(``l = 0..Nc-1`` over the ``Nc = B*T`` Nyquist cells of one period);
dictionary column ``n`` carries delay ``n*tau0``.  The published formulas
are 1-based; the dense oracle pins this package's 0-based realisation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .waveforms import NyquistGrid, WaveformSpec, baseband_waveform

DENSE_GUARD = 4096


@dataclass(frozen=True)
class ChippingSequence:
    """Pseudo-random +/-1 sequence, one chip per Nyquist cell, period n_cells.

    Drawn from a seeded counter-based Philox generator so experiments are
    bit-reproducible across platforms.
    """

    values: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.abs(v) == 1.0):
            raise ValueError("chipping sequence entries must be +1 or -1")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)


def chipping_sequence(seed: int, n: int) -> ChippingSequence:
    """i.i.d. uniform +/-1 chips from Philox keyed by ``seed``."""
    if n < 1:
        raise ValueError(f"need at least one chip, got n = {n}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    values = rng.integers(0, 2, size=n) * 2.0 - 1.0
    return ChippingSequence(values=values, seed=seed)


@dataclass(frozen=True)
class ChippingSpectrum:
    """Discrete Fourier series coefficients of the chip sequence."""

    coefficients: np.ndarray

    def __len__(self) -> int:
        return len(self.coefficients)


def dfs_spectrum(chip: ChippingSequence) -> ChippingSpectrum:
    """c_p[k] = sum_l p[l] exp(-j*2*pi*k*l/N); Parseval gives sum|c_p|^2 = N^2."""
    return ChippingSpectrum(coefficients=np.fft.fft(chip.values))


@dataclass(frozen=True)
class FrequencyDictionary:
    """Diagonal waveform spectrum and shifted-DFT map of the dictionary.

    ``spectrum[l]`` samples the DTFT of the unit-energy Nyquist-rate pulse at
    ``w_l``; with a flat spectrum the dictionary columns are orthonormal.
    ``atom_scale`` is the l2 norm of the raw unit-modulus pulse samples
    (sqrt(B*Tp)): physical envelopes are ``atom_scale`` times the unit-energy
    synthesis.
    """

    grid: NyquistGrid
    spectrum: np.ndarray
    atom_scale: float

    @property
    def n_cells(self) -> int:
        return self.grid.n_cells

    @property
    def n_delays(self) -> int:
        return self.grid.n_delays

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Y @ x for a coefficient vector x of length n_delays."""
        nc = self.n_cells
        xx = np.zeros(nc, dtype=complex)
        xx[: self.n_delays] = x
        alt = _alternating(nc)
        return self.spectrum * np.fft.fft(xx * alt) / np.sqrt(nc)

    def adjoint(self, u: np.ndarray) -> np.ndarray:
        """Y^H @ u for a spectral vector u of length n_cells."""
        nc = self.n_cells
        z = np.fft.ifft(np.conj(self.spectrum) * u) * np.sqrt(nc)
        return (_alternating(nc) * z)[: self.n_delays]

    def dense(self) -> np.ndarray:
        if self.n_cells > DENSE_GUARD:
            raise ValueError(f"dense dictionary guarded at n_cells <= {DENSE_GUARD}")
        nc = self.n_cells
        w = -np.pi + 2.0 * np.pi * np.arange(nc) / nc
        n = np.arange(self.n_delays)
        return (
            self.spectrum[:, None]
            * np.exp(-1j * np.outer(w, n))
            / np.sqrt(nc)
        )


def frequency_dictionary(spec: WaveformSpec, grid: NyquistGrid) -> FrequencyDictionary:
    """Sample the unit-energy pulse spectrum on the shifted frequency grid."""
    nc = grid.n_cells
    samples = baseband_waveform(spec, np.arange(nc) * grid.tau0)
    scale = float(np.linalg.norm(samples))
    if scale == 0.0:
        raise ValueError("waveform has no support on the Nyquist grid")
    spectrum = np.fft.fft(samples / scale * _alternating(nc))
    return FrequencyDictionary(grid=grid, spectrum=spectrum, atom_scale=scale)


@dataclass(frozen=True)
class MeasurementOperator:
    """Matrix-free frequency-domain operator of shape (m, n_delays).

    ``apply`` evaluates scaled middle-band samples of the spectrum of the
    chipped unit-energy synthesis; ``adjoint`` is its exact conjugate
    transpose.  Rows select spectral cells ``(n_cells - m)/2 .. (n_cells +
    m)/2 - 1`` with weight ``m**-0.5``.
    """

    dictionary: FrequencyDictionary
    chip: ChippingSequence
    m: int
    _chip_rev: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nc = self.dictionary.n_cells
        if len(self.chip) != nc:
            raise ValueError(
                f"chip length {len(self.chip)} != Nyquist cells {nc}"
            )
        if not 1 <= self.m <= nc:
            raise ValueError(f"measurement count {self.m} outside [1, {nc}]")
        if (nc - self.m) % 2 != 0:
            raise ValueError(
                f"n_cells - m = {nc - self.m} must be even; adjust m"
            )
        rev = self.chip.values[(-np.arange(nc)) % nc]
        object.__setattr__(self, "_chip_rev", rev)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.dictionary.n_delays)

    @property
    def band(self) -> np.ndarray:
        """Spectral cell indices selected by the row selector."""
        nc = self.dictionary.n_cells
        return np.arange((nc - self.m) // 2, (nc + self.m) // 2)

    def chip_convolve(self, u: np.ndarray) -> np.ndarray:
        """Circular convolution with the chip DFS, scaled by n_cells**-0.5.

        Hermitian: the chip sequence is real, so this map is its own adjoint.
        """
        nc = self.dictionary.n_cells
        return np.sqrt(nc) * np.fft.ifft(self._chip_rev * np.fft.fft(u))

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dictionary.n_delays,):
            raise ValueError(
                f"expected coefficient vector of length "
                f"{self.dictionary.n_delays}, got {x.shape}"
            )
        u = self.dictionary.apply(x)
        v = self.chip_convolve(u)
        return v[self.band] / np.sqrt(self.m)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=complex)
        if y.shape != (self.m,):
            raise ValueError(f"expected measurement vector of length {self.m}")
        u = np.zeros(self.dictionary.n_cells, dtype=complex)
        u[self.band] = y / np.sqrt(self.m)
        v = self.chip_convolve(u)
        return self.dictionary.adjoint(v)

    def dense(self) -> np.ndarray:
        """Dense realisation via apply on the canonical basis (fast path)."""
        n = self.dictionary.n_delays
        out = np.zeros((self.m, n), dtype=complex)
        e = np.zeros(n, dtype=complex)
        for j in range(n):
            e[j] = 1.0
            out[:, j] = self.apply(e)
            e[j] = 0.0
        return out

    def to_dict(self) -> dict:
        """Provenance dump: dimensions, chip seed, waveform-free grid data."""
        g = self.dictionary.grid
        return {
            "m": self.m,
            "n_delays": g.n_delays,
            "n_cells": g.n_cells,
            "tau0": g.tau0,
            "T": g.T,
            "chip_seed": self.chip.seed,
            "atom_scale": self.dictionary.atom_scale,
        }


def build_fd_operator(
    spec: WaveformSpec,
    grid: NyquistGrid,
    chip: ChippingSequence,
    m: int,
) -> MeasurementOperator:
    return MeasurementOperator(
        dictionary=frequency_dictionary(spec, grid), chip=chip, m=m
    )


def measurement_count(grid: NyquistGrid, compressive_bandwidth: float) -> int:
    """m = floor(B_cs * T), decremented once if n_cells - m is odd."""
    m = int(np.floor(compressive_bandwidth * grid.T + 1e-9))
    if (grid.n_cells - m) % 2 != 0:
        m -= 1
    if m < 1:
        raise ValueError(
            f"compressive bandwidth {compressive_bandwidth} Hz leaves no "
            "measurements in the observation interval"
        )
    return m


def dense_fd_operator(
    spec: WaveformSpec,
    grid: NyquistGrid,
    chip: ChippingSequence,
    m: int,
) -> np.ndarray:
    """Dense operator built entrywise from the defining formulas (oracle).

    Row selector, chip circulant and dictionary spectrum are materialised as
    explicit matrices and multiplied; no FFT shortcuts are shared with the
    fast path apart from the chip DFS itself.
    """
    nc = grid.n_cells
    if nc > DENSE_GUARD:
        raise ValueError(f"dense oracle guarded at n_cells <= {DENSE_GUARD}")
    if (nc - m) % 2 != 0:
        raise ValueError(f"n_cells - m = {nc - m} must be even")
    samples = baseband_waveform(spec, np.arange(nc) * grid.tau0)
    samples = samples / np.linalg.norm(samples)
    w = -np.pi + 2.0 * np.pi * np.arange(nc) / nc
    # direct DTFT sums, independent of the fft-based fast path
    dtft = np.exp(-1j * np.outer(w, np.arange(nc))) @ samples
    Y = dtft[:, None] * np.exp(-1j * np.outer(w, np.arange(grid.n_delays)))
    Y /= np.sqrt(nc)
    cp = dfs_spectrum(chip).coefficients
    l = np.arange(nc)
    P = cp[(l[:, None] - l[None, :]) % nc] / np.sqrt(nc)
    R = np.zeros((m, nc))
    R[np.arange(m), (nc - m) // 2 + np.arange(m)] = 1.0 / np.sqrt(m)
    return R @ P @ Y


@dataclass(frozen=True)
class TimeDomainOperator:
    """Dense operator whose columns are acquisition-chain measurements of atoms.

    ``matrix[:, n]`` holds the time-domain compressive samples of the
    unit-energy atom at delay ``n*tau0``; `spectral_measurements` maps its
    outputs into the frequency-domain convention for comparison.
    """

    matrix: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return self.matrix.conj().T @ y


def spectral_measurements(time_samples: np.ndarray) -> np.ndarray:
    """Shifted m-point DFT of time-domain measurements, scaled by m**-0.5.

    Unitary; maps the time-domain compressive samples onto the frequency
    domain measurement vector of the factored operator.
    """
    m = len(time_samples)
    return np.fft.fft(time_samples * _alternating(m)) / np.sqrt(m)


def td_operator(
    spec: WaveformSpec,
    grid: NyquistGrid,
    chip: ChippingSequence,
    m: int,
    oversample: int = 1,
) -> TimeDomainOperator:
    """Columns = baseband acquisition of each unit-energy dictionary atom.

    Realises the time-domain entry integrals by circular convolution on the
    (optionally oversampled) grid.  Guarded to small dictionaries.
    """
    from .frontend import FrontendConfig, baseband_measure
    from .waveforms import bandlimited_upsample

    if grid.n_delays > DENSE_GUARD:
        raise ValueError(f"time-domain operator guarded at n <= {DENSE_GUARD}")
    cfg = FrontendConfig.for_grid(grid, m, oversample=oversample)
    samples = baseband_waveform(spec, np.arange(grid.n_cells) * grid.tau0)
    atom = samples / np.linalg.norm(samples)
    cols = np.zeros((m, grid.n_delays), dtype=complex)
    base = atom if oversample == 1 else bandlimited_upsample(atom, oversample)
    for n in range(grid.n_delays):
        shifted = np.roll(base, n * oversample)
        cols[:, n] = baseband_measure(shifted, chip, cfg).samples
    return TimeDomainOperator(matrix=cols)


def gram(dictionary: FrequencyDictionary) -> tuple[np.ndarray, float]:
    """Gram matrix Y^H Y and its maximum off-diagonal magnitude.

    Hermitian Toeplitz: entry (n, n') depends only on n - n', computed from
    the power spectrum of the unit-energy pulse.  Diagonal is exactly 1.
    """
    n = dictionary.n_delays
    if n > DENSE_GUARD:
        raise ValueError(f"gram guarded at n <= {DENSE_GUARD}")
    nc = dictionary.n_cells
    power = np.abs(dictionary.spectrum) ** 2
    # g[d] = (1/nc) sum_l power[l] exp(+j w_l d)
    d = np.arange(n)
    g = np.exp(-1j * np.pi * d) * np.fft.ifft(power)[:n]
    G = np.empty((n, n), dtype=complex)
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    G[:] = g[idx]  # correct on and below the diagonal (row - col >= 0)
    upper = np.triu_indices(n, 1)
    G[upper] = np.conj(g)[idx[upper]]
    off = np.abs(G - np.diag(np.diag(G)))
    return G, float(off.max())


def _alternating(n: int) -> np.ndarray:
    out = np.ones(n)
    out[1::2] = -1.0
    return out
