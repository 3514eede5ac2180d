"""Codebooks, sparse rank-1 mmWave channels, and noisy beam-pair sounding.

All randomness flows through explicit ``numpy.random.Generator`` handles.
Trial-level reproducibility uses :func:`child_rng`, which derives an
independent stream from a master seed and an integer path, so results do
not depend on execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-12
RANK_TOL = 1e-9


def child_rng(master_seed, *path):
    """Independent generator for (master_seed, path...), e.g. one per trial."""
    return np.random.default_rng([int(master_seed)] + [int(p) for p in path])


def to_db(x):
    """Linear power ratio to dB (-inf for zero)."""
    with np.errstate(divide="ignore"):
        return float(10.0 * np.log10(x))


def ula_response(n_antennas, angle):
    """Half-wavelength uniform-linear-array response, unit norm.

    a(phi) = (1/sqrt(N)) [1, e^{i pi sin phi}, ..., e^{i pi (N-1) sin phi}]
    """
    k = np.pi * np.sin(angle)
    return np.exp(1j * k * np.arange(n_antennas)) / np.sqrt(n_antennas)


@dataclass(frozen=True)
class Codebook:
    """Indexed set of unit-norm beamforming vectors for one link side.

    beams has shape (size, n_antennas); beam indices are 0-based contiguous.
    """

    side: str
    beams: np.ndarray

    def __post_init__(self):
        if self.side not in ("transmit", "receive"):
            raise ValueError(f"side must be 'transmit' or 'receive', got {self.side!r}")
        beams = np.asarray(self.beams, dtype=np.complex128)
        if beams.ndim != 2 or beams.shape[0] < 1 or beams.shape[1] < 1:
            raise ValueError("beams must be a nonempty 2-d array (size, n_antennas)")
        norms = np.linalg.norm(beams, axis=1)
        if np.any(np.abs(norms - 1.0) > NORM_TOL):
            raise ValueError("every beam must have unit Euclidean norm")
        object.__setattr__(self, "beams", beams)

    @property
    def size(self):
        return self.beams.shape[0]

    @property
    def n_antennas(self):
        return self.beams.shape[1]


def make_dft_codebook(n_antennas, size, side="transmit"):
    """DFT codebook: beam k has entries exp(i 2 pi n k / size) / sqrt(N).

    Every beam is unit norm by construction (entries of modulus 1/sqrt(N)).
    """
    if n_antennas < 1 or size < 1:
        raise ValueError("n_antennas and size must be positive")
    n = np.arange(n_antennas)[None, :]
    k = np.arange(size)[:, None]
    beams = np.exp(2j * np.pi * n * k / size) / np.sqrt(n_antennas)
    return Codebook(side=side, beams=beams)


@dataclass(frozen=True)
class ChannelInstance:
    """One rank-1 channel draw with its path parameters and noise level.

    SNR is 1/noise_var by definition (unit-power training symbol).
    """

    h: np.ndarray
    path_gain: complex
    aod: float
    aoa: float
    noise_var: float

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.complex128)
        if h.ndim != 2:
            raise ValueError("h must be a 2-d complex matrix (n_rx, n_tx)")
        if not self.noise_var > 0.0:
            raise ValueError("noise_var must be positive")
        s = np.linalg.svd(h, compute_uv=False)
        if len(s) > 1 and s[0] > 0.0 and s[1] >= RANK_TOL * s[0]:
            raise ValueError("channel matrix must have numeric rank <= 1")
        object.__setattr__(self, "h", h)

    @property
    def n_rx(self):
        return self.h.shape[0]

    @property
    def n_tx(self):
        return self.h.shape[1]

    @property
    def snr(self):
        return 1.0 / self.noise_var


@dataclass(frozen=True)
class SoundingOutcome:
    """Received sample y for one beam pair and its power |y|^2."""

    y: complex
    power: float = field(default=None)

    def __post_init__(self):
        y = complex(self.y)
        p = y.real * y.real + y.imag * y.imag
        if self.power is None:
            object.__setattr__(self, "power", p)
        elif abs(self.power - p) > NORM_TOL * max(1.0, p):
            raise ValueError("power must equal |y|^2")


def sample_channel(n_tx, n_rx, noise_var, rng):
    """Draw one sparse single-path channel.

    H = sqrt(Nt*Nr) * alpha * a_r(aoa) a_t(aod)^H with alpha ~ CN(0,1) and
    angles uniform on [0, 2pi). Deterministic given the rng state.
    """
    if n_tx < 1 or n_rx < 1:
        raise ValueError("antenna counts must be positive")
    if not noise_var > 0.0:
        raise ValueError("noise_var must be positive")
    g = rng.standard_normal(2)
    alpha = complex(g[0], g[1]) / np.sqrt(2.0)
    aod = float(rng.uniform(0.0, 2.0 * np.pi))
    aoa = float(rng.uniform(0.0, 2.0 * np.pi))
    a_t = ula_response(n_tx, aod)
    a_r = ula_response(n_rx, aoa)
    h = np.sqrt(n_tx * n_rx) * alpha * np.outer(a_r, a_t.conj())
    return ChannelInstance(h=h, path_gain=alpha, aod=aod, aoa=aoa, noise_var=noise_var)


def _check_pair(ch, f, w):
    f = np.asarray(f)
    w = np.asarray(w)
    if f.shape != (ch.n_tx,) or w.shape != (ch.n_rx,):
        raise ValueError(
            f"beam dimensions {f.shape}/{w.shape} do not match channel "
            f"({ch.n_rx} x {ch.n_tx})")
    return f, w


def sound_beam_pair(ch, f, w, rng):
    """One noisy sounding y = w^H H f + n with n ~ CN(0, noise_var).

    The unit-magnitude training symbol is fixed to 1. Consumes two standard
    normals from rng (real/imag noise parts).
    """
    f, w = _check_pair(ch, f, w)
    sig = complex(w.conj() @ (ch.h @ f))
    g = rng.standard_normal(2)
    n = np.sqrt(ch.noise_var / 2.0) * complex(g[0], g[1])
    return SoundingOutcome(y=sig + n)


def sound_powers(ch, f, w, count, rng):
    """Powers of `count` consecutive soundings of one pair (vectorized).

    Bit-identical to `count` sequential sound_beam_pair calls on the same rng.
    """
    f, w = _check_pair(ch, f, w)
    sig = complex(w.conj() @ (ch.h @ f))
    g = rng.standard_normal(2 * count).reshape(count, 2)
    scale = np.sqrt(ch.noise_var / 2.0)
    re = sig.real + scale * g[:, 0]
    im = sig.imag + scale * g[:, 1]
    return re * re + im * im


def pair_signal_grid(ch, tx_codebook, rx_codebook):
    """Noiseless responses m[t, r] = w_r^H H f_t over the full pair grid."""
    m = rx_codebook.beams.conj() @ (ch.h @ tx_codebook.beams.T)
    return m.T


def genie_best_pair(ch, tx_codebook, rx_codebook):
    """Noiseless-optimal pair and its beamforming gain (per-trial upper bound).

    Ties break to the lexicographically smallest (t, r).
    """
    if tx_codebook.size < 1 or rx_codebook.size < 1:
        raise ValueError("codebooks must be nonempty")
    powers = np.abs(pair_signal_grid(ch, tx_codebook, rx_codebook)) ** 2
    flat = int(np.argmax(powers))
    t, r = divmod(flat, rx_codebook.size)
    return (t, r), float(powers[t, r] / ch.noise_var)


def exhaustive_search(ch, tx_codebook, rx_codebook, rng):
    """Sound every pair once (t-major order) and return the noisy argmax.

    Consumes |I_F x I_W| soundings; ties break lexicographically.
    """
    if tx_codebook.size < 1 or rx_codebook.size < 1:
        raise ValueError("codebooks must be nonempty")
    sig = pair_signal_grid(ch, tx_codebook, rx_codebook)
    count = sig.size
    g = rng.standard_normal(2 * count).reshape(count, 2)
    n = np.sqrt(ch.noise_var / 2.0) * (g[:, 0] + 1j * g[:, 1])
    powers = np.abs(sig.ravel() + n) ** 2
    flat = int(np.argmax(powers))
    t, r = divmod(flat, rx_codebook.size)
    return (t, r)


def beamforming_gain(ch, f, w):
    """Post-combining SNR |w^H H f|^2 / noise_var of one beam pair (linear)."""
    f, w = _check_pair(ch, f, w)
    return float(np.abs(w.conj() @ (ch.h @ f)) ** 2 / ch.noise_var)
