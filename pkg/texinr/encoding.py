"""Input mappings applied to (u, v[, t]) before the first layer."""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from texinr.autodiff import gather_forward
from texinr.errors import ConfigError, ShapeError

IDENTITY = "identity"
FOURIER = "fourier"
HASH = "hash"

DEFAULT_N_FREQUENCIES = 8

# per-dimension multipliers of the spatial hash
HASH_PRIMES = (1, 2654435761, 805459861)
HASH_INIT_RANGE = 1e-4


@dataclass(frozen=True)
class HashConfig:
    levels: int = 8
    table_size: int = 2**14
    features_per_entry: int = 2
    base_resolution: int = 16
    growth: float = 1.5

    def validate(self):
        if self.levels < 1 or self.features_per_entry < 1 or self.base_resolution < 1:
            raise ConfigError(f"hash encoder needs positive sizes, got {self}")
        if self.table_size < 1 or self.table_size & (self.table_size - 1):
            raise ConfigError(f"hash table_size must be a power of two, got {self.table_size}")
        if self.growth < 1.0:
            raise ConfigError(f"hash growth factor must be >= 1, got {self.growth}")

    def resolutions(self):
        return [int(math.floor(self.base_resolution * self.growth**l)) for l in range(self.levels)]

    @property
    def entries(self):
        return self.levels * self.table_size * self.features_per_entry


@dataclass(frozen=True)
class EncoderConfig:
    variant: str = IDENTITY
    frequencies: tuple = ()
    hash: HashConfig = field(default=None)

    @classmethod
    def identity(cls):
        return cls(IDENTITY)

    @classmethod
    def fourier(cls, n_f=DEFAULT_N_FREQUENCIES, frequencies=None):
        """Octave bands f_i = 2^(i-1) unless explicit frequencies are given."""
        if frequencies is None:
            frequencies = tuple(float(2**i) for i in range(n_f))
        return cls(FOURIER, tuple(float(f) for f in frequencies))

    @classmethod
    def hash_grid(cls, **kwargs):
        return cls(HASH, hash=HashConfig(**kwargs))

    @property
    def n_frequencies(self):
        return len(self.frequencies)

    def validate(self):
        if self.variant == IDENTITY:
            return self
        if self.variant == FOURIER:
            if not self.frequencies:
                raise ConfigError("fourier encoder needs at least one frequency")
            f = np.asarray(self.frequencies)
            if np.any(f <= 0) or np.any(np.diff(f) <= 0):
                raise ConfigError(
                    f"fourier frequencies must be positive and strictly increasing: {self.frequencies}"
                )
            return self
        if self.variant == HASH:
            if self.hash is None:
                raise ConfigError("hash encoder needs a HashConfig")
            self.hash.validate()
            return self
        raise ConfigError(f"unknown encoder variant {self.variant!r}")

    def output_dim(self, input_dim):
        if self.variant == FOURIER:
            return input_dim + 2 * input_dim * self.n_frequencies
        if self.variant == HASH:
            return input_dim + self.hash.levels * self.hash.features_per_entry
        return input_dim


# ============================================================
# Encoders
# ============================================================
def fourier_features(coords, frequencies):
    """[v, sin(2 pi f_i v)..., cos(2 pi f_i v)...], frequency-major within each block."""
    f = np.asarray(frequencies, dtype=np.float64)
    # (batch, n_f, d) -> (batch, n_f * d)
    phase = 2.0 * np.pi * f[None, :, None] * coords[:, None, :]
    phase = phase.reshape(coords.shape[0], -1)
    return np.concatenate([coords, np.sin(phase), np.cos(phase)], axis=1)


def hash_indices(cfg, coords):
    """Per level, the hashed corner rows and d-linear weights for each coordinate."""
    n, d = coords.shape
    if d > len(HASH_PRIMES):
        raise ShapeError(f"hash encoder supports at most {len(HASH_PRIMES)} input dims, got {d}")

    primes = np.asarray(HASH_PRIMES[:d], dtype=np.uint64)
    mask = np.uint64(cfg.table_size - 1)
    corners = list(itertools.product((0, 1), repeat=d))

    per_level = []
    for level, res in enumerate(cfg.resolutions()):
        scaled = coords * res
        base = np.floor(scaled)
        frac = scaled - base
        base = base.astype(np.uint64)

        indices, weights = [], []
        for offset in corners:
            off = np.asarray(offset, dtype=np.uint64)
            corner = (base + off) * primes
            h = corner[:, 0]
            for i in range(1, d):
                h = h ^ corner[:, i]
            rows = (h & mask).astype(np.intp)

            w = np.ones(n)
            for i, o in enumerate(offset):
                w = w * (frac[:, i] if o else 1.0 - frac[:, i])

            indices.append((level, rows))
            weights.append(w)
        per_level.append((indices, weights))
    return per_level


def init_hash_table(cfg, rng):
    shape = (cfg.levels, cfg.table_size, cfg.features_per_entry)
    return rng.uniform(-HASH_INIT_RANGE, HASH_INIT_RANGE, size=shape)


def encode(cfg, coords, hash_table=None, tape=None):
    """Map a batch of coordinates in [0,1]^d to the network input matrix."""
    coords = np.clip(np.asarray(coords, dtype=np.float64), 0.0, 1.0)
    if coords.ndim != 2:
        raise ShapeError(f"coords must be a (batch, d) matrix, got shape {coords.shape}")
    cfg.validate()

    if cfg.variant == IDENTITY:
        return coords
    if cfg.variant == FOURIER:
        return fourier_features(coords, cfg.frequencies)

    if hash_table is None:
        raise ConfigError("hash encoder needs its feature table")
    d = coords.shape[1]
    f = cfg.hash.features_per_entry
    parts = [coords]
    for level, (indices, weights) in enumerate(hash_indices(cfg.hash, coords)):
        columns = slice(d + level * f, d + (level + 1) * f)
        parts.append(
            gather_forward(hash_table, indices, weights, name="hash_table", tape=tape, columns=columns)
        )
    return np.concatenate(parts, axis=1)
