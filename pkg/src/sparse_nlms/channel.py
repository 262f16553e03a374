"""Sparse channel realizations, PN training streams, and noisy observations.

The observation model is the usual FIR probing setup: the scalar training
signal x(t) slides through a length-N window, the unknown sparse tap
vector h produces y(t) = h'x(t) + z(t) with white Gaussian noise z.

Randomness is fully seeded. Each :class:`SampleStream` spawns disjoint
substreams for the training scalars and the noise draws, so changing the
filter length never perturbs the noise sequence of a given seed.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Union

import numpy as np

from .errors import ConfigError, DimensionMismatchError

__all__ = [
    "ChannelRealization",
    "SampleStream",
    "generate_channel",
    "regressor_at",
    "observe",
    "training_pairs",
]

SeedLike = Union[int, np.random.SeedSequence]

# Lazy sequence growth quantum for SampleStream caches.
_CHUNK = 1024


class ChannelRealization:
    """A unit-norm sparse tap vector with its support set.

    Exactly ``sparsity`` entries of ``taps`` are nonzero, all of them on
    ``support``, and the vector is scaled to unit l2 norm.
    """

    def __init__(self, taps: np.ndarray, support: np.ndarray) -> None:
        taps = np.asarray(taps, dtype=float)
        support = np.asarray(support, dtype=int)
        if taps.ndim != 1 or taps.size < 1:
            raise DimensionMismatchError("taps must be a nonempty 1-d vector")
        nonzero = np.flatnonzero(taps)
        if sorted(nonzero.tolist()) != sorted(support.tolist()):
            raise ConfigError("support must list exactly the nonzero tap indices")
        self.taps = taps
        self.support = support
        self.n_taps = taps.size
        self.sparsity = support.size

    def __repr__(self) -> str:
        return (
            f"ChannelRealization(n_taps={self.n_taps}, sparsity={self.sparsity})"
        )


def generate_channel(
    n_taps: int, sparsity: int, seed: SeedLike
) -> ChannelRealization:
    """Draw a sparse channel: uniform random support, Gaussian gains,
    scaled to unit l2 norm.

    The support is chosen without replacement among the ``n_taps``
    positions; the nonzero gains are i.i.d. standard normal before the
    final normalization.
    """
    if not 1 <= sparsity <= n_taps:
        raise ConfigError(
            f"sparsity must lie in [1, n_taps], got K={sparsity}, N={n_taps}"
        )
    rng = np.random.default_rng(seed)
    support = np.sort(rng.choice(n_taps, size=sparsity, replace=False))
    gains = rng.standard_normal(sparsity)
    taps = np.zeros(n_taps)
    taps[support] = gains
    norm = np.linalg.norm(taps)
    if norm == 0.0:
        # Probability-zero redraw guard: standard normals are never all zero,
        # but dividing by zero would corrupt the realization silently.
        raise RuntimeError("degenerate all-zero gain draw")
    taps /= norm
    return ChannelRealization(taps=taps, support=support)


class SampleStream:
    """Deterministic training/noise source for one run.

    The training scalars are i.i.d. equiprobable +/- sqrt(signal_power)
    (a Bernoulli PN sequence); the noise draws are i.i.d. standard normal,
    scaled by sqrt(noise_power) at observation time. Both sequences are
    materialized lazily and are reproducible functions of ``seed`` alone.
    """

    def __init__(
        self,
        seed: int,
        n_taps: int,
        noise_power: float,
        signal_power: float = 1.0,
    ) -> None:
        if n_taps < 1:
            raise ConfigError(f"n_taps must be >= 1, got {n_taps}")
        if noise_power < 0.0:
            raise ConfigError(f"noise_power must be >= 0, got {noise_power}")
        if signal_power <= 0.0:
            raise ConfigError(f"signal_power must be > 0, got {signal_power}")
        self.seed = seed
        self.n_taps = n_taps
        self.noise_power = noise_power
        self.signal_power = signal_power
        train_ss, noise_ss = np.random.SeedSequence(seed).spawn(2)
        self._train_rng = np.random.default_rng(train_ss)
        self._noise_rng = np.random.default_rng(noise_ss)
        # Scalars are stored left-padded with N-1 zeros so that the window
        # at time t is a single contiguous reversed slice.
        self._padded = np.zeros(n_taps - 1)
        self._n_scalars = 0
        self._noise = np.zeros(0)

    def _ensure_scalars(self, t: int) -> None:
        if t < self._n_scalars:
            return
        grow = max(_CHUNK, t + 1 - self._n_scalars)
        bits = self._train_rng.integers(0, 2, size=grow)
        amplitude = float(np.sqrt(self.signal_power))
        fresh = (2.0 * bits - 1.0) * amplitude
        self._padded = np.concatenate((self._padded, fresh))
        self._n_scalars += grow

    def _ensure_noise(self, t: int) -> None:
        if t < self._noise.size:
            return
        grow = max(_CHUNK, t + 1 - self._noise.size)
        fresh = self._noise_rng.standard_normal(grow)
        self._noise = np.concatenate((self._noise, fresh))

    def scalar_at(self, t: int) -> float:
        """Training scalar x(t); zero for negative t."""
        if t < 0:
            return 0.0
        self._ensure_scalars(t)
        return float(self._padded[t + self.n_taps - 1])

    def noise_at(self, t: int) -> float:
        """Standard-normal noise draw for time t (unit variance, unscaled)."""
        if t < 0:
            raise ValueError(f"t must be >= 0, got {t}")
        self._ensure_noise(t)
        return float(self._noise[t])

    def scalars_upto(self, t: int) -> np.ndarray:
        """Zero-padded scalar buffer covering times -(N-1) .. t, in order."""
        self._ensure_scalars(max(t, 0))
        return self._padded[: t + self.n_taps].copy()

    def noise_upto(self, t: int) -> np.ndarray:
        """Noise draws for times 0 .. t."""
        self._ensure_noise(max(t, 0))
        return self._noise[: t + 1].copy()


def regressor_at(stream: SampleStream, t: int) -> np.ndarray:
    """Length-N window [x(t), x(t-1), ..., x(t-N+1)] of the training signal.

    Entries at negative time indices are zero, so early windows are only
    partially filled and the window energy ramps up over the first N
    samples.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    stream._ensure_scalars(t)
    n = stream.n_taps
    # padded index of x(t) is t + n - 1; the window reads backward from it.
    window = stream._padded[t : t + n][::-1]
    return window.copy()


def observe(
    channel: ChannelRealization,
    regressor: np.ndarray,
    noise_power: float,
    noise_draw: float,
) -> float:
    """Noisy linear observation y = h'x + sqrt(noise_power) * noise_draw.

    ``noise_draw`` is a standard-normal variate supplied by the caller's
    seeded generator, keeping this function pure.
    """
    x = np.asarray(regressor, dtype=float)
    if x.shape != channel.taps.shape:
        raise DimensionMismatchError(
            f"regressor length {x.size} != channel length {channel.n_taps}"
        )
    if noise_power < 0.0:
        raise ConfigError(f"noise_power must be >= 0, got {noise_power}")
    return float(channel.taps @ x) + float(np.sqrt(noise_power)) * float(noise_draw)


def training_pairs(
    stream: SampleStream, channel: ChannelRealization
) -> Iterator[tuple[np.ndarray, float]]:
    """Endless (regressor, observation) pairs for t = 0, 1, 2, ..."""
    if channel.n_taps != stream.n_taps:
        raise DimensionMismatchError(
            f"channel length {channel.n_taps} != stream window {stream.n_taps}"
        )
    for t in itertools.count():
        x = regressor_at(stream, t)
        y = observe(channel, x, stream.noise_power, stream.noise_at(t))
        yield x, y
