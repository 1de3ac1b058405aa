"""Brute-force reference for the DPC power minimisation.

The NOMA beams are scanned over the deflation parameters (x, y). The beam
directions are built explicitly and their powers come from a direct
inner-product scaling. For every grid point the CoMP powers (P10, P20) come
from an exact two-variable LP. No closed form or case analysis is used.
"""

from dataclasses import dataclass

import numpy as np

from .rates import check_feasible


class UnachievableError(ValueError):
    """The direction has no component along the channel."""


def min_power_scaling(direction, channel, rhs):
    """Smallest ||w||^2 with w parallel to ``direction`` and |channel^H w|^2 = rhs."""
    direction = np.asarray(direction, dtype=complex)
    g = abs(np.vdot(channel, direction)) ** 2
    if g == 0.0:
        raise UnachievableError("direction is orthogonal to the channel")
    return rhs * np.vdot(direction, direction).real / g


def _deflated_family(h_comp, h_noma, ts):
    """Unnormalised u(t) = h_noma - t h_comp (h_comp^H h_noma)/||h_comp||^2 for each t."""
    proj = h_comp * (np.vdot(h_comp, h_noma) / np.vdot(h_comp, h_comp).real)
    return h_noma[None, :] - ts[:, None] * proj[None, :]


def _family_terms(h_comp, h_noma, ts, sigma2, eps):
    """Power of each NOMA beam and the interference it leaks onto the CoMP user."""
    U = _deflated_family(h_comp, h_noma, ts)
    unorm2 = np.sum(np.abs(U) ** 2, axis=1)
    gain = np.abs(U.conj() @ h_noma) ** 2
    leak = np.abs(U.conj() @ h_comp) ** 2
    # vectorised min_power_scaling for rhs = sigma2 * eps
    power = sigma2 * eps * unorm2 / gain
    return power, power * leak / unorm2


def _lp_two_bs(req, n1, n2, cap1, cap2):
    """min P1 + P2 s.t. n1 P1 + n2 P2 = req, 0 <= Pi <= capi (arrays broadcast).

    Returns (P1, P2, feasible). The stronger channel is loaded first.
    """
    req, cap1, cap2 = np.broadcast_arrays(req, cap1, cap2)
    if n2 >= n1:
        p2 = np.minimum(req / n2, np.maximum(cap2, 0.0))
        p1 = (req - n2 * p2) / n1
    else:
        p1 = np.minimum(req / n1, np.maximum(cap1, 0.0))
        p2 = (req - n1 * p1) / n2
    p1 = np.maximum(p1, 0.0)
    p2 = np.maximum(p2, 0.0)
    ok = (cap1 >= 0.0) & (cap2 >= 0.0) & (p1 <= cap1) & (p2 <= cap2)
    return p1, p2, ok


@dataclass
class OracleResult:
    total_power: float
    x: float
    y: float
    P10: float
    P20: float
    feasible: bool = True

    def __bool__(self):
        return self.feasible


INFEASIBLE = OracleResult(np.inf, np.nan, np.nan, np.nan, np.nan, feasible=False)


def _axis(lo, hi, step, include_zero):
    n = max(int(np.floor((hi - lo) / step + 1e-9)), 0)
    pts = lo + step * np.arange(1, n + 1)
    pts = pts[pts < hi]
    parts = [[lo]] if include_zero else []
    parts += [pts, [hi]]
    return np.unique(np.concatenate(parts))


def _scan(channels, targets, sigma2, p_max, xs, ys, restrict):
    h10, h20, h11, h22 = channels.h10, channels.h20, channels.h11, channels.h22
    e0 = targets.eps0
    n10 = np.vdot(h10, h10).real
    n20 = np.vdot(h20, h20).real
    p11, leak10 = _family_terms(h10, h11, xs, sigma2, targets.eps1)
    p22, leak20 = _family_terms(h20, h22, ys, sigma2, targets.eps2)
    req = e0 * (sigma2 + leak10[:, None] + leak20[None, :])
    cap1 = (p_max - p11)[:, None]
    cap2 = (p_max - p22)[None, :]
    if restrict == "p10_zero":
        p10 = np.zeros_like(req)
        p20 = req / n20
        ok = (cap1 >= 0) & (p20 <= cap2)
    elif restrict == "p20_zero":
        p20 = np.zeros_like(req)
        p10 = req / n10
        ok = (p10 <= cap1) & (cap2 >= 0)
    else:
        p10, p20, ok = _lp_two_bs(req, n10, n20, cap1, cap2)
    total = np.where(ok, p10 + p20 + p11[:, None] + p22[None, :], np.inf)
    k = np.argmin(total)  # first minimum in C order: deterministic
    i, j = np.unravel_index(k, total.shape)
    if not np.isfinite(total[i, j]):
        return INFEASIBLE
    return OracleResult(float(total[i, j]), float(xs[i]), float(ys[j]),
                        float(p10[i, j]), float(p20[i, j]))


def grid_oracle_dpc(channels, targets, sigma2, p_max, grid_step=1e-3, refine=True,
                    restrict=None):
    """Exhaustive minimum over the (x, y) family with an exact LP for (P10, P20).

    ``restrict`` may force ``"p10_zero"`` or ``"p20_zero"`` to search a single
    boundary family only.
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    hi = targets.eps0 / (1.0 + targets.eps0)
    xs = _axis(0.0, hi, grid_step, include_zero=True)
    best = _scan(channels, targets, sigma2, p_max, xs, xs, restrict)
    if not best or not refine or hi == 0.0:
        return best
    fine = grid_step / 100.0
    xlo, xhi = max(best.x - 2 * grid_step, 0.0), min(best.x + 2 * grid_step, hi)
    ylo, yhi = max(best.y - 2 * grid_step, 0.0), min(best.y + 2 * grid_step, hi)
    fx = _axis(xlo, xhi, fine, include_zero=True)
    fy = _axis(ylo, yhi, fine, include_zero=True)
    refined = _scan(channels, targets, sigma2, p_max, fx, fy, restrict)
    if refined and refined.total_power < best.total_power:
        return refined
    return best


def lp_feasible_at(channels, targets, sigma2, p_max, x, y):
    """Whether a single (x, y) admits a feasible (P10, P20)."""
    r = _scan(channels, targets, sigma2, p_max, np.array([x]), np.array([y]), None)
    return bool(r)


@dataclass
class ResidualReport:
    rate_residuals: tuple
    power_residuals: tuple
    total_power: float

    @property
    def min_residual(self):
        return min(self.rate_residuals + self.power_residuals)

    def ok(self, tol=1e-9):
        return self.min_residual >= -tol


def verify_solution(beams, channels, targets, sigma2, p_max, model="dpc"):
    """Signed residuals (achieved minus required) from first principles."""
    rep = check_feasible(beams, channels, targets, p_max, sigma2, tol=0.0, model=model)
    return ResidualReport(rep.rate_residuals, rep.power_residuals, rep.total_power)
