"""Two-cell geometry and Rayleigh channel generation.

BS 1 sits at (-D, 0) and BS 2 at (D, 0). The CoMP user is dropped uniformly in
the lens where both coverage discs of radius R0 overlap; NOMA user i is dropped
uniformly in a small disc of radius R_i around BS i.
"""

import json
from dataclasses import asdict, dataclass, field, fields

import numpy as np

MAX_REJECTION_DRAWS = 1_000_000


class ConfigError(ValueError):
    """Raised for invalid scenario configurations."""


@dataclass(frozen=True)
class ScenarioConfig:
    bs_separation_half: float = 300.0
    coverage_radius: float = 400.0
    noma_radius_1: float = 50.0
    noma_radius_2: float = 50.0
    path_loss_exp: float = 2.0
    antennas: int = 4
    noise_power: float = 1e-9
    p_max: float = 2.0
    target_rates: tuple = (0.5, 1.0, 1.0)
    group_count: int = 2
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "target_rates", tuple(float(r) for r in self.target_rates))
        if len(self.target_rates) != 3:
            raise ConfigError("target_rates must hold exactly three rates (r0, r1, r2)")
        if not self.coverage_radius > self.bs_separation_half:
            raise ConfigError("coverage_radius must exceed bs_separation_half")
        if self.bs_separation_half < 0:
            raise ConfigError("bs_separation_half must be non-negative")
        if not (self.noma_radius_1 > 0 and self.noma_radius_2 > 0):
            raise ConfigError("NOMA radii must be positive")
        if not self.path_loss_exp > 0:
            raise ConfigError("path_loss_exp must be positive")
        if not self.noise_power > 0:
            raise ConfigError("noise_power must be positive")
        if int(self.antennas) != self.antennas or self.antennas < 1:
            raise ConfigError("antennas must be a positive integer")
        if int(self.group_count) != self.group_count or self.group_count < 1:
            raise ConfigError("group_count must be a positive integer")
        if any(r < 0 for r in self.target_rates):
            raise ConfigError("target rates must be non-negative")
        if self.p_max < 0:
            raise ConfigError("p_max must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return cls.from_dict(data)

    def to_dict(self):
        d = asdict(self)
        d["target_rates"] = list(self.target_rates)
        return d

    def replace(self, **changes):
        d = asdict(self)
        d.update(changes)
        return ScenarioConfig(**d)

    @property
    def bs_positions(self):
        D = self.bs_separation_half
        return np.array([-D, 0.0]), np.array([D, 0.0])


@dataclass
class ChannelSet:
    """Channel vectors of one group plus the link distances they came from."""

    h10: np.ndarray
    h20: np.ndarray
    h11: np.ndarray
    h22: np.ndarray
    d10: float = 1.0
    d20: float = 1.0
    d11: float = 1.0
    d22: float = 1.0
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for name in ("h10", "h20", "h11", "h22"):
            v = np.asarray(getattr(self, name), dtype=complex).reshape(-1)
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} has non-finite entries")
            setattr(self, name, v)
        n = {len(self.h10), len(self.h20), len(self.h11), len(self.h22)}
        if len(n) != 1:
            raise ValueError("all channel vectors must have the same length")

    @property
    def antennas(self):
        return len(self.h10)

    def swapped(self):
        """Same channels with the roles of BS 1 and BS 2 exchanged."""
        return ChannelSet(self.h20, self.h10, self.h22, self.h11,
                          self.d20, self.d10, self.d22, self.d11)


def _uniform_in_disc(rng, center, radius, size=None):
    r = radius * np.sqrt(rng.random(size))
    theta = 2.0 * np.pi * rng.random(size)
    pts = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
    return pts + center


def sample_lens_point(config, rng):
    """Uniform point in the intersection of the two coverage discs."""
    D, R0 = config.bs_separation_half, config.coverage_radius
    bs1, bs2 = config.bs_positions
    # bounding box of the lens: |x| <= R0 - D, |y| <= sqrt(R0^2 - D^2)
    half_w = R0 - D
    half_h = np.sqrt(R0 * R0 - D * D)
    for _ in range(MAX_REJECTION_DRAWS):
        p = np.array([(2.0 * rng.random() - 1.0) * half_w,
                      (2.0 * rng.random() - 1.0) * half_h])
        if np.hypot(*(p - bs1)) <= R0 and np.hypot(*(p - bs2)) <= R0:
            return p
    raise ConfigError("lens rejection sampling exceeded its iteration cap")


def sample_positions(config, rng):
    """Return (pos0, pos1, pos2): CoMP user, NOMA user of BS 1, NOMA user of BS 2."""
    bs1, bs2 = config.bs_positions
    pos0 = sample_lens_point(config, rng)
    pos1 = _uniform_in_disc(rng, bs1, config.noma_radius_1)
    pos2 = _uniform_in_disc(rng, bs2, config.noma_radius_2)
    return pos0, pos1, pos2


def rayleigh(rng, n, size=None):
    """CN(0, 1) entries: unit variance, circularly symmetric."""
    shape = (n,) if size is None else (size, n)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def path_loss_channel(g, d, alpha):
    return g / d ** alpha


def gen_channel_set(config, positions, rng):
    pos0, pos1, pos2 = positions
    bs1, bs2 = config.bs_positions
    N, alpha = config.antennas, config.path_loss_exp
    d10 = float(np.hypot(*(pos0 - bs1)))
    d20 = float(np.hypot(*(pos0 - bs2)))
    d11 = float(np.hypot(*(pos1 - bs1)))
    d22 = float(np.hypot(*(pos2 - bs2)))
    g = rayleigh(rng, N, 4)
    return ChannelSet(
        h10=path_loss_channel(g[0], d10, alpha),
        h20=path_loss_channel(g[1], d20, alpha),
        h11=path_loss_channel(g[2], d11, alpha),
        h22=path_loss_channel(g[3], d22, alpha),
        d10=d10, d20=d20, d11=d11, d22=d22,
        meta={"g": g},
    )


def trial_rng(seed, trial):
    """Independent stream for one Monte Carlo trial; order-independent."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def random_channel_set(config, rng):
    return gen_channel_set(config, sample_positions(config, rng), rng)
