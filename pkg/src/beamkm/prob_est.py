"""Empirical "good SNR" probabilities for training beam pairs.

Two estimators build the training table: threshold-count frequency
estimation (FE) over an interval, and a Kolmogorov-Smirnov detector that
tests each slot's power samples against the noise-only exponential null,
so no subjective power threshold is needed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .channel import sound_powers


def h0_cdf(x, noise_var):
    """Noise-only CDF of the sounding power: 1 - exp(-x / noise_var).

    Under the null the received sample is CN(0, noise_var), so its power is
    exponential with mean noise_var.
    """
    if not noise_var > 0.0:
        raise ValueError("noise_var must be positive")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("power values must be nonnegative")
    out = 1.0 - np.exp(-arr / noise_var)
    return float(out) if np.isscalar(x) else out


def ks_statistic(samples, noise_var):
    """Exact sup-distance between the empirical CDF and the null CDF.

    Uses the sorted-sample jump formula
    Z = max_i max(i/L - F(x_(i)), F(x_(i)) - (i-1)/L), which attains the
    supremum exactly in O(L log L).
    """
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    if n == 0:
        raise ValueError("samples must be nonempty")
    cdf = h0_cdf(xs, noise_var)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def ks_threshold(alpha, l_samples):
    """KS threshold eps = sqrt(-ln(alpha/2) / (2 L)) for false-alarm rate alpha.

    Decreasing in both arguments (Kolmogorov tail approximation).
    """
    if not 0.0 < alpha < 2.0:
        raise ValueError("alpha must lie in (0, 2)")
    if l_samples < 1:
        raise ValueError("l_samples must be >= 1")
    return float(np.sqrt(-np.log(alpha / 2.0) / (2.0 * l_samples)))


@dataclass(frozen=True)
class FeConfig:
    """Frequency-estimation settings: power threshold (dB over the noise
    floor) and estimation interval length."""

    tau_db: float
    t_fe: int

    def __post_init__(self):
        if self.t_fe < 1:
            raise ValueError("t_fe must be >= 1")

    def tau_linear(self, noise_var):
        return noise_var * 10.0 ** (self.tau_db / 10.0)


@dataclass(frozen=True)
class KsDetector:
    """KS detector settings; epsilon is derived from (alpha, l_samples)."""

    l_samples: int
    alpha: float
    t_ks: int
    noise_var: float
    epsilon: float = field(init=False)

    def __post_init__(self):
        if self.l_samples < 1:
            raise ValueError("l_samples must be >= 1")
        if self.t_ks < 1:
            raise ValueError("t_ks must be >= 1")
        if not self.noise_var > 0.0:
            raise ValueError("noise_var must be positive")
        object.__setattr__(self, "epsilon", ks_threshold(self.alpha, self.l_samples))


def ks_estimate_pair(ch, f, w, detector, rng):
    """Fraction of KS slots flagging the pair as signal-bearing.

    Each of the t_ks slots draws l_samples fresh soundings, computes the KS
    statistic against the null CDF, and counts Z >= epsilon (closed
    comparison). Consumes t_ks * l_samples soundings; the result lies on
    {0, 1/t_ks, ..., 1}.
    """
    hits = 0
    for _ in range(detector.t_ks):
        powers = sound_powers(ch, f, w, detector.l_samples, rng)
        if ks_statistic(powers, detector.noise_var) >= detector.epsilon:
            hits += 1
    return hits / detector.t_ks


def fe_estimate_pair(ch, f, w, config, rng):
    """Fraction of t_fe soundings whose power reaches the FE threshold.

    The threshold is taken relative to the channel's noise floor:
    tau_linear = noise_var * 10^(tau_db/10). Consumes t_fe soundings.
    """
    powers = sound_powers(ch, f, w, config.t_fe, rng)
    return float(np.count_nonzero(powers >= config.tau_linear(ch.noise_var))) / config.t_fe


@dataclass(frozen=True)
class EmpiricalProbTable:
    """Per-pair empirical probabilities over the training index grid."""

    train_tx: tuple
    train_rx: tuple
    probs: dict
    soundings_used: int

    def __post_init__(self):
        object.__setattr__(self, "train_tx", tuple(self.train_tx))
        object.__setattr__(self, "train_rx", tuple(self.train_rx))
        expected = {(t, r) for t in self.train_tx for r in self.train_rx}
        if set(self.probs) != expected:
            raise ValueError("probs must cover exactly train_tx x train_rx")
        for key, p in self.probs.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} at {key} outside [0, 1]")

    @property
    def soundings_per_pair(self):
        return self.soundings_used // len(self.probs)

    def to_csv(self, path):
        """Write rows t,r,p,soundings (per-pair sounding count)."""
        per_pair = self.soundings_per_pair
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "r", "p", "soundings"])
            for t in self.train_tx:
                for r in self.train_rx:
                    writer.writerow([t, r, float(self.probs[(t, r)]), per_pair])

    @classmethod
    def from_csv(cls, path):
        probs = {}
        per_pair = 0
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                probs[(int(row["t"]), int(row["r"]))] = float(row["p"])
                per_pair = int(row["soundings"])
        train_tx = sorted({t for t, _ in probs})
        train_rx = sorted({r for _, r in probs})
        return cls(train_tx=train_tx, train_rx=train_rx, probs=probs,
                   soundings_used=per_pair * len(probs))


def build_training_table(ch, tx_codebook, rx_codebook, train_tx, train_rx,
                         estimator, rng):
    """Estimate probabilities for every training pair, in t-major order.

    `estimator` is either an FeConfig or a KsDetector. The exact sounding
    budget is recorded: |pairs| * t_fe for FE, |pairs| * t_ks * l_samples
    for KS.
    """
    train_tx = [int(t) for t in train_tx]
    train_rx = [int(r) for r in train_rx]
    for t in train_tx:
        if not 0 <= t < tx_codebook.size:
            raise ValueError(f"transmit index {t} outside codebook")
    for r in train_rx:
        if not 0 <= r < rx_codebook.size:
            raise ValueError(f"receive index {r} outside codebook")
    if len(set(train_tx)) != len(train_tx) or len(set(train_rx)) != len(train_rx):
        raise ValueError("training index lists must not contain duplicates")
    if isinstance(estimator, KsDetector):
        per_pair = estimator.t_ks * estimator.l_samples
        estimate = lambda f, w: ks_estimate_pair(ch, f, w, estimator, rng)
    elif isinstance(estimator, FeConfig):
        per_pair = estimator.t_fe
        estimate = lambda f, w: fe_estimate_pair(ch, f, w, estimator, rng)
    else:
        raise ValueError("estimator must be FeConfig or KsDetector")
    probs = {}
    for t in train_tx:
        for r in train_rx:
            probs[(t, r)] = estimate(tx_codebook.beams[t], rx_codebook.beams[r])
    return EmpiricalProbTable(train_tx=train_tx, train_rx=train_rx, probs=probs,
                              soundings_used=per_pair * len(probs))
