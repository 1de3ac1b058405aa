"""Quasi-degradation test, zero-forcing baseline and the hybrid selector."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dpc import solve_dpc
from .rates import BeamformerSet, check_feasible, is_zero_beam

COMP_NOMA = "CompNoma"
ZFBF = "Zfbf"
QD_RTOL = 1e-9
ZF_NULL_RTOL = 1e-10


@dataclass
class SchemeDecision:
    scheme: str
    quasi_degraded: bool
    beams: Optional[BeamformerSet]
    total_power: Optional[float]
    feasible: bool

    @property
    def rate_model(self):
        return "noma" if self.scheme == COMP_NOMA else "zf"


def _sic_margin(h, w0, wj, eps0, sigma2):
    """-|h^H w0|^2 + eps0 |h^H wj|^2 + eps0 sigma2; <= 0 means user j can decode s0."""
    return -abs(np.vdot(h, w0)) ** 2 + eps0 * abs(np.vdot(h, wj)) ** 2 + eps0 * sigma2


def qd_check(solution, channels, targets, sigma2):
    """True when the DPC optimum is also feasible for superposition coding with SIC."""
    if not solution:
        raise ValueError("qd_check needs a feasible DPC solution")
    b = solution.beams
    e0 = targets.eps0
    slack = QD_RTOL * sigma2 * e0
    for h, w0, wj in ((channels.h11, b.w10, b.w11), (channels.h22, b.w20, b.w22)):
        if is_zero_beam(w0, b):
            continue
        if _sic_margin(h, w0, wj, e0, sigma2) > slack:
            return False
    return True


def _null_direction(h_null, h_target):
    """Unit vector along the part of h_target orthogonal to h_null, or None."""
    proj = h_target - h_null * (np.vdot(h_null, h_target) / np.vdot(h_null, h_null).real)
    nrm = np.linalg.norm(proj)
    if nrm <= ZF_NULL_RTOL * np.linalg.norm(h_target):
        return None
    return proj / nrm


def _infeasible_zf():
    return SchemeDecision(ZFBF, False, None, None, False)


def zfbf_solve(channels, targets, sigma2, p_max):
    """Per-cell mutual zero-forcing with a greedy two-BS split of the CoMP power."""
    c = channels
    n = c.antennas
    e0, e1, e2 = targets.eps0, targets.eps1, targets.eps2
    zero = np.zeros(n, dtype=complex)

    noma = []
    for h_comp, h_noma, eps in ((c.h10, c.h11, e1), (c.h20, c.h22, e2)):
        if eps == 0.0:
            noma.append(zero)
            continue
        d = _null_direction(h_comp, h_noma)
        if d is None:
            return _infeasible_zf()
        p = sigma2 * eps / abs(np.vdot(h_noma, d)) ** 2
        noma.append(np.sqrt(p) * d)
    w11, w22 = noma

    # CoMP beams: BS i nulls its own NOMA user
    dirs, gains = [], []
    for h_comp, h_noma in ((c.h10, c.h11), (c.h20, c.h22)):
        d = _null_direction(h_noma, h_comp)
        dirs.append(zero if d is None else d)
        gains.append(0.0 if d is None else abs(np.vdot(h_comp, d)) ** 2)
    caps = [p_max - np.vdot(w11, w11).real, p_max - np.vdot(w22, w22).real]
    if min(caps) < -1e-12:
        return _infeasible_zf()
    interference = abs(np.vdot(c.h10, w11)) ** 2 + abs(np.vdot(c.h20, w22)) ** 2
    need = e0 * (interference + sigma2) if e0 > 0 else 0.0

    powers = [0.0, 0.0]
    # load the BS with the larger effective gain first; ties go to BS 1
    order = sorted((0, 1), key=lambda i: -gains[i])
    for i in order:
        if need <= 0.0 or gains[i] == 0.0:
            continue
        p = min(need / gains[i], max(caps[i], 0.0))
        powers[i] = p
        need -= p * gains[i]
    if need > 1e-12 * e0 * sigma2:
        return _infeasible_zf()

    beams = BeamformerSet(np.sqrt(powers[0]) * dirs[0], np.sqrt(powers[1]) * dirs[1], w11, w22)
    return SchemeDecision(ZFBF, False, beams, beams.total_power, True)


def h_comp_noma(channels, targets, sigma2, p_max, dpc=None):
    """CoMP-NOMA when the channel is quasi-degraded, ZFBF otherwise.

    ``dpc`` may carry an already computed ``solve_dpc`` result.
    """
    if dpc is None:
        dpc = solve_dpc(channels, targets, sigma2, p_max)
    if dpc and qd_check(dpc, channels, targets, sigma2):
        return SchemeDecision(COMP_NOMA, True, dpc.beams, dpc.total_power, True)
    return zfbf_solve(channels, targets, sigma2, p_max)


def decision_report(decision, channels, targets, sigma2, p_max, tol=1e-9):
    return check_feasible(decision.beams, channels, targets, p_max, sigma2, tol=tol,
                          model=decision.rate_model)
