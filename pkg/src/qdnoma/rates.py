"""SINR, achievable-rate and feasibility evaluation for a set of beamformers.

This is the referee used by every solver: it only looks at channels and beams.

Three receiver models are supported:

``"noma"``
    CoMP-NOMA with superposition coding. NOMA user j first decodes the CoMP
    signal (whenever w_j0 != 0) and removes it by SIC, so R0 is capped by
    both NOMA users' cross SINRs.
``"dpc"``
    Dirty paper coding: the CoMP signal is pre-cancelled at the transmitter,
    so only SINR_{0->0} limits R0.
``"zf"``
    Linear reception without SIC: user j treats its BS's CoMP beam as noise.
    Zero-forcing beams null it, which makes the cross constraint unnecessary.
"""

from dataclasses import dataclass, field

import numpy as np

RATE_MODELS = ("noma", "dpc", "zf")
ZERO_BEAM_RTOL = 1e-12
DEFAULT_TOL = 1e-9


def eps_from_rate(r):
    """SINR threshold equivalent to a rate target of ``r`` bits/channel use."""
    if r < 0:
        raise ValueError("rate must be non-negative")
    return 2.0 ** r - 1.0


@dataclass(frozen=True)
class SinrTargets:
    eps0: float
    eps1: float
    eps2: float

    def __post_init__(self):
        if min(self.eps0, self.eps1, self.eps2) < 0:
            raise ValueError("SINR thresholds must be non-negative")

    @classmethod
    def from_rates(cls, rates):
        r0, r1, r2 = rates
        return cls(eps_from_rate(r0), eps_from_rate(r1), eps_from_rate(r2))

    def swapped(self):
        return SinrTargets(self.eps0, self.eps2, self.eps1)

    @property
    def rates(self):
        return tuple(float(np.log2(1.0 + e)) for e in (self.eps0, self.eps1, self.eps2))


@dataclass
class BeamformerSet:
    w10: np.ndarray
    w20: np.ndarray
    w11: np.ndarray
    w22: np.ndarray

    def __post_init__(self):
        for name in ("w10", "w20", "w11", "w22"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=complex).reshape(-1))
        if len({len(self.w10), len(self.w20), len(self.w11), len(self.w22)}) != 1:
            raise ValueError("all beamformers must have the same length")

    @classmethod
    def zeros(cls, n):
        z = np.zeros(n, dtype=complex)
        return cls(z, z.copy(), z.copy(), z.copy())

    def swapped(self):
        return BeamformerSet(self.w20, self.w10, self.w22, self.w11)

    def scaled(self, **factors):
        """Copy with selected beams multiplied by scalars, e.g. ``scaled(w11=0.99)``."""
        vals = {k: getattr(self, k) * factors.get(k, 1.0) for k in ("w10", "w20", "w11", "w22")}
        return BeamformerSet(**vals)

    @property
    def bs1_power(self):
        return _sq(self.w10) + _sq(self.w11)

    @property
    def bs2_power(self):
        return _sq(self.w20) + _sq(self.w22)

    @property
    def total_power(self):
        return self.bs1_power + self.bs2_power


def _sq(v):
    return float(np.vdot(v, v).real)


def _gain(h, w):
    """|h^H w|^2"""
    return float(abs(np.vdot(h, w)) ** 2)


def _own_pair(beams, channels, j):
    if j == 1:
        return channels.h11, beams.w10, beams.w11
    if j == 2:
        return channels.h22, beams.w20, beams.w22
    raise ValueError("NOMA user index must be 1 or 2")


def is_zero_beam(w, beams):
    ref = max(np.linalg.norm(beams.w10), np.linalg.norm(beams.w20),
              np.linalg.norm(beams.w11), np.linalg.norm(beams.w22))
    return np.linalg.norm(w) <= ZERO_BEAM_RTOL * ref


def sinr_comp_user(beams, channels, sigma2):
    sig = _gain(channels.h10, beams.w10) + _gain(channels.h20, beams.w20)
    intf = _gain(channels.h10, beams.w11) + _gain(channels.h20, beams.w22)
    return sig / (intf + sigma2)


def sinr_cross(beams, channels, j, sigma2):
    """SINR at NOMA user j when it decodes the CoMP user's signal."""
    h, w0, wj = _own_pair(beams, channels, j)
    return _gain(h, w0) / (_gain(h, wj) + sigma2)


def sinr_own(beams, channels, j, sigma2):
    """SINR at NOMA user j for its own signal after SIC."""
    h, _, wj = _own_pair(beams, channels, j)
    return _gain(h, wj) / sigma2


def sinr_own_no_sic(beams, channels, j, sigma2):
    h, w0, wj = _own_pair(beams, channels, j)
    return _gain(h, wj) / (_gain(h, w0) + sigma2)


def achievable_rates(beams, channels, sigma2, model="noma"):
    """Return (R0, R1, R2) in bits per channel use."""
    if model not in RATE_MODELS:
        raise ValueError(f"unknown rate model {model!r}")
    r0 = np.log2(1.0 + sinr_comp_user(beams, channels, sigma2))
    if model == "noma":
        for j, w0 in ((1, beams.w10), (2, beams.w20)):
            if not is_zero_beam(w0, beams):
                r0 = min(r0, np.log2(1.0 + sinr_cross(beams, channels, j, sigma2)))
    own = sinr_own_no_sic if model == "zf" else sinr_own
    r1 = np.log2(1.0 + own(beams, channels, 1, sigma2))
    r2 = np.log2(1.0 + own(beams, channels, 2, sigma2))
    return float(r0), float(r1), float(r2)


@dataclass
class FeasibilityReport:
    feasible: bool
    rate_residuals: tuple
    power_residuals: tuple
    total_power: float
    rates: tuple = field(default=())

    @property
    def min_residual(self):
        return min(self.rate_residuals + self.power_residuals)


def check_feasible(beams, channels, targets, p_max, sigma2, tol=DEFAULT_TOL, model="noma"):
    """Check rate targets and per-BS budgets; residuals are ``achieved - required``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    rates = achievable_rates(beams, channels, sigma2, model=model)
    rate_res = tuple(r - t for r, t in zip(rates, targets.rates))
    pow_res = (p_max - beams.bs1_power, p_max - beams.bs2_power)
    ok = all(r >= -tol for r in rate_res + pow_res)
    return FeasibilityReport(ok, rate_res, pow_res, beams.total_power, rates)
