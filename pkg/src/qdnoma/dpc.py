"""Closed-form minimum-power DPC solution for the two-cell CoMP-NOMA downlink.

The optimal beams form a two-parameter family. The CoMP beams are matched
filters with powers P10 and P20. The NOMA beam of BS 1 is::

    w11(x) = sqrt(P11(x)) * u(x) / ||u(x)||,  u(x) = (I - x h10 h10^H / ||h10||^2) h11

and w22(y) is built the same way from h20 and h22. Both parameters range over
(0, e0/(1+e0)].

The solver works in "oriented" coordinates where ||h20|| >= ||h10||, i.e. BS 2
has the stronger link to the CoMP user. If the input has it the other way
round, the two BSs are swapped before solving and the result is mapped back.
The three cases are then

* Case I:   P10 = 0, P20 > 0
* Case II:  P10 > 0, P20 > 0
* Case III: P10 > 0, P20 = 0
"""

import math
from dataclasses import dataclass

import numpy as np

from .rates import BeamformerSet, SinrTargets

PMAX_ATOL = 1e-12  # W, absolute slack on every budget comparison

CASE_I = "CaseI"
CASE_II = "CaseII"
CASE_III = "CaseIII"


class SolverConsistencyError(RuntimeError):
    """The case-selection rules disagree with the direct comparison of cases."""


class DegenerateChannelError(ValueError):
    pass


def deflated_direction(h_comp, h_noma, t):
    """Unit vector along (I - t h_comp h_comp^H / ||h_comp||^2) h_noma."""
    n = np.vdot(h_comp, h_comp).real
    u = h_noma - t * h_comp * (np.vdot(h_comp, h_noma) / n)
    nu = np.linalg.norm(u)
    if nu == 0.0:
        return u
    return u / nu


@dataclass(frozen=True)
class SolverCache:
    """Scalars shared by all case solvers, in oriented coordinates."""

    h10: np.ndarray
    h20: np.ndarray
    h11: np.ndarray
    h22: np.ndarray
    n10: float
    n20: float
    A: float
    B: float
    C: float
    D: float
    cross10: float
    cross20: float
    targets: SinrTargets
    sigma2: float
    swapped: bool
    w11_hat: np.ndarray
    w22_hat: np.ndarray
    p11_hat: float
    p22_hat: float

    @property
    def x_max(self):
        e0 = self.targets.eps0
        return e0 / (1.0 + e0)

    @property
    def ratio(self):
        """||h20||^2 / ||h10||^2, at least 1 after orientation."""
        return self.n20 / self.n10

    @property
    def leak20_hat(self):
        """|h20^H w22_hat|^2"""
        return abs(np.vdot(self.h20, self.w22_hat)) ** 2

    @property
    def leak10_hat(self):
        """|h10^H w11_hat|^2"""
        return abs(np.vdot(self.h10, self.w11_hat)) ** 2


def _noma_power(t, sigma2, eps, A, B):
    denom = A - t * B
    assert denom > 0.0, "A - tB must stay positive for t < 1"
    return sigma2 * eps * (A - (2.0 * t - t * t) * B) / (denom * denom)


def build_cache(channels, targets, sigma2, orient=True):
    h10, h20, h11, h22 = channels.h10, channels.h20, channels.h11, channels.h22
    norms = [np.vdot(h, h).real for h in (h10, h20, h11, h22)]
    if min(norms) <= 0.0:
        raise DegenerateChannelError("all channel vectors need a positive norm")
    swapped = bool(orient and norms[1] < norms[0])
    if swapped:
        h10, h20, h11, h22 = h20, h10, h22, h11
        targets = targets.swapped()
    n10, n20 = np.vdot(h10, h10).real, np.vdot(h20, h20).real
    A, C = np.vdot(h11, h11).real, np.vdot(h22, h22).real
    cross10 = abs(np.vdot(h10, h11)) ** 2
    cross20 = abs(np.vdot(h20, h22)) ** 2
    # Cauchy-Schwarz holds exactly in theory; clip rounding noise
    B = min(cross10 / n10, A)
    D = min(cross20 / n20, C)
    e0 = targets.eps0
    xm = e0 / (1.0 + e0)
    p11_hat = _noma_power(xm, sigma2, targets.eps1, A, B)
    p22_hat = _noma_power(xm, sigma2, targets.eps2, C, D)
    w11_hat = math.sqrt(p11_hat) * deflated_direction(h10, h11, xm)
    w22_hat = math.sqrt(p22_hat) * deflated_direction(h20, h22, xm)
    return SolverCache(h10, h20, h11, h22, n10, n20, A, B, C, D, cross10, cross20,
                       targets, sigma2, swapped, w11_hat, w22_hat, p11_hat, p22_hat)


def p11_of_x(x, cache):
    return _noma_power(x, cache.sigma2, cache.targets.eps1, cache.A, cache.B)


def p22_of_y(y, cache):
    return _noma_power(y, cache.sigma2, cache.targets.eps2, cache.C, cache.D)


def f20_of_x(x, cache):
    """P20 needed to meet the CoMP SINR alone (P10 = 0), given w11(x) and w22_hat."""
    c = cache
    e0, e1 = c.targets.eps0, c.targets.eps1
    base = (c.sigma2 * e0 + e0 * c.leak20_hat) / c.n20
    d = c.A - c.B * x
    return base + c.sigma2 * e0 * e1 * c.cross10 * (1.0 - x) ** 2 / (c.n20 * d * d)


def f10_of_y(y, cache):
    """P10 needed to meet the CoMP SINR alone (P20 = 0), given w22(y) and w11_hat."""
    c = cache
    e0, e2 = c.targets.eps0, c.targets.eps2
    base = (c.sigma2 * e0 + e0 * c.leak10_hat) / c.n10
    d = c.C - c.D * y
    return base + c.sigma2 * e0 * e2 * c.cross20 * (1.0 - y) ** 2 / (c.n10 * d * d)


def x_ext(cache):
    """Stationary point of F20(x) + P11(x)."""
    e0 = cache.targets.eps0
    return e0 / (e0 + cache.ratio)


def _largest_under_budget(p_of, x_max, sigma2, eps, A, B, p_max):
    """Largest t in (0, x_max] with P(t) <= p_max, or None.

    P(t) is nondecreasing on [0, 1), so the admissible set is an interval
    starting at 0. Away from the first branch the crossing solves
    (B - kB^2) t^2 - 2B(1 - kA) t + A(1 - kA) = 0 with k = p_max/(sigma2 eps).
    """
    if eps == 0.0:
        return x_max
    if p_of(0.0) >= p_max:
        return None
    if p_of(x_max) <= p_max + PMAX_ATOL:
        return x_max
    k = p_max / (sigma2 * eps)
    if B * k == 1.0:
        return A / (2.0 * B)
    # "+" root of the quadratic, rationalised so that B -> 1/k is not 0/0:
    # t = A sqrt(kA-1) / (B sqrt(kA-1) + sqrt(B(A-B)))
    s = math.sqrt(max(k * A - 1.0, 0.0))
    denom = B * s + math.sqrt(max(B * (A - B), 0.0))
    if denom <= 0.0:
        return x_max
    return min(A * s / denom, x_max)


def x_tilde_b(cache, p_max):
    c = cache
    return _largest_under_budget(lambda t: p11_of_x(t, c), c.x_max, c.sigma2,
                                 c.targets.eps1, c.A, c.B, p_max)


def y_tilde_b(cache, p_max):
    c = cache
    return _largest_under_budget(lambda t: p22_of_y(t, c), c.x_max, c.sigma2,
                                 c.targets.eps2, c.C, c.D, p_max)


def _p_a(cache, p_max):
    c = cache
    e0, e1 = c.targets.eps0, c.targets.eps1
    f20_at_one = (c.sigma2 * e0 + e0 * c.leak20_hat) / c.n20
    slope = c.sigma2 * e0 * e1 * c.cross10
    if slope == 0.0:
        return math.inf
    return (p_max - c.p22_hat - f20_at_one) * c.n20 / slope


def x_tilde_a(cache, p_max):
    """Smallest x > 0 with F20(x) <= p_max - P22_hat (0 if it already holds at 0+)."""
    c = cache
    pa = _p_a(cache, p_max)
    if pa == math.inf:
        return 0.0
    if pa < 0.0:
        # F20 never drops low enough; x = 1 is the only (excluded) limit
        return 1.0
    s = math.sqrt(pa)
    if c.A * s < 1.0:
        return (c.A * s - 1.0) / (c.B * s - 1.0)
    return 0.0


@dataclass
class CaseSolution:
    case_label: str
    P10: float
    P20: float
    x: float
    y: float
    p11: float
    p22: float

    @property
    def total_power(self):
        return self.P10 + self.P20 + self.p11 + self.p22


def solve_case1(cache, p_max):
    c = cache
    xm = c.x_max
    xb = x_tilde_b(c, p_max)
    if xb is None:
        return None
    budget2 = p_max - c.p22_hat
    if f20_of_x(xb, c) > budget2 + PMAX_ATOL:
        return None
    xa = min(x_tilde_a(c, p_max), xb)
    xe = x_ext(c)
    # evaluation order and inequalities as in the closed-form case split
    if xb < xe:
        x = xb
    elif xa >= xe:
        x = xa
    else:
        x = xe
    if xm == 0.0:
        x = 0.0
    return CaseSolution(CASE_I, 0.0, f20_of_x(x, c), x, xm, p11_of_x(x, c), c.p22_hat)


def solve_case2(cache, p_max):
    c = cache
    xm = c.x_max
    room1 = p_max - c.p11_hat
    room2 = p_max - c.p22_hat
    if room1 <= 0.0 or room2 <= 0.0:
        return None
    f20m = f20_of_x(xm, c)
    if c.n10 * room1 + c.n20 * room2 < f20m * c.n20 - PMAX_ATOL * c.n20:
        return None
    p20 = room2
    p10 = c.ratio * (f20m - room2)
    if p10 <= 0.0:
        return None
    return CaseSolution(CASE_II, p10, p20, xm, xm, c.p11_hat, c.p22_hat)


def solve_case3(cache, p_max):
    c = cache
    xm = c.x_max
    yb = y_tilde_b(c, p_max)
    if yb is None:
        return None
    if f10_of_y(yb, c) > p_max - c.p11_hat + PMAX_ATOL:
        return None
    return CaseSolution(CASE_III, f10_of_y(yb, c), 0.0, xm, yb, c.p11_hat, p22_of_y(yb, c))


@dataclass
class DpcSolution:
    case_label: str
    P10: float
    P20: float
    x: float
    y: float
    beams: BeamformerSet
    total_power: float
    swapped: bool = False

    @property
    def feasible(self):
        return True


class _Infeasible:
    """Normal outcome when no case meets the budgets."""

    feasible = False
    case_label = None
    beams = None
    total_power = math.inf

    def __repr__(self):
        return "Infeasible"

    def __bool__(self):
        return False


Infeasible = _Infeasible()


def assemble_beams(cache, sol):
    c = cache
    w10 = math.sqrt(sol.P10) * c.h10 / math.sqrt(c.n10)
    w20 = math.sqrt(sol.P20) * c.h20 / math.sqrt(c.n20)
    w11 = math.sqrt(sol.p11) * deflated_direction(c.h10, c.h11, sol.x)
    w22 = math.sqrt(sol.p22) * deflated_direction(c.h20, c.h22, sol.y)
    return BeamformerSet(w10, w20, w11, w22)


def solve_cases(cache, p_max):
    return {CASE_I: solve_case1(cache, p_max),
            CASE_II: solve_case2(cache, p_max),
            CASE_III: solve_case3(cache, p_max)}


def _select(cache, cases, p_max):
    if cases[CASE_I] is not None:
        return cases[CASE_I]
    if cases[CASE_II] is not None:
        return cases[CASE_II]
    # Case III can only win if BS 2 cannot host its NOMA user at x_max.
    # The condition is written F22 in the source, which must mean P22.
    if cache.p22_hat < p_max:
        return None
    return cases[CASE_III]


def solve_dpc(channels, targets, sigma2, p_max, check=True):
    """Minimum-power DPC beams, or ``Infeasible``."""
    cache = build_cache(channels, targets, sigma2)
    cases = solve_cases(cache, p_max)
    chosen = _select(cache, cases, p_max)
    if check:
        feasible = [s for s in cases.values() if s is not None]
        if chosen is None and feasible:
            best = min(feasible, key=lambda s: s.total_power)
            raise SolverConsistencyError(
                f"selection rules declared infeasible but {best.case_label} is feasible")
        if chosen is not None:
            best = min(s.total_power for s in feasible)
            if chosen.total_power > best * (1.0 + 1e-9) + PMAX_ATOL:
                raise SolverConsistencyError(
                    f"{chosen.case_label} chosen with power {chosen.total_power!r}, "
                    f"but another case reaches {best!r}")
    if chosen is None:
        return Infeasible
    beams = assemble_beams(cache, chosen)
    P10, P20, x, y = chosen.P10, chosen.P20, chosen.x, chosen.y
    if cache.swapped:
        beams = beams.swapped()
        P10, P20, x, y = P20, P10, y, x
    return DpcSolution(chosen.case_label, P10, P20, x, y, beams,
                       beams.total_power, cache.swapped)
