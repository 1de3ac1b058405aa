import numpy as np
import pytest

from conftest import random_targets, scale_free_instance
from qdnoma.channel import ChannelSet, rayleigh
from qdnoma.dpc import solve_dpc
from qdnoma.rates import BeamformerSet, SinrTargets, check_feasible
from qdnoma.schemes import (COMP_NOMA, ZFBF, decision_report, h_comp_noma, qd_check,
                            zfbf_solve)


class _Sol:
    """Minimal stand-in for a DPC solution with hand-set beams."""

    def __init__(self, beams):
        self.beams = beams

    def __bool__(self):
        return True


def test_qd_vacuous_branch():
    ch = ChannelSet([1, 0], [1, 0], [1, 0], [0, 1])
    tg = SinrTargets(1, 1, 1)
    # w10 = 0; user 2 sees a strong w20 and a weak w22: only that inequality decides
    b = BeamformerSet([0, 0], [0, 10], [1, 0], [0, 1])
    assert qd_check(_Sol(b), ch, tg, 1.0)
    b = BeamformerSet([0, 0], [0, 0.1], [1, 0], [0, 1])
    assert not qd_check(_Sol(b), ch, tg, 1.0)


def test_orthogonal_in_cell_not_qd():
    rng = np.random.default_rng(0)
    h10 = np.array([1, 0], dtype=complex)
    ch = ChannelSet(h10, 3 * rayleigh(rng, 2), [0, 1], [0, 1])
    tg = SinrTargets.from_rates((1, 1, 1))
    b = BeamformerSet([1, 0], [0, 1], [0, 1], [0, 1])
    assert not qd_check(_Sol(b), ch, tg, 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_aligned_strong_channels_are_qd(seed):
    rng = np.random.default_rng(seed)
    h10, h20 = rayleigh(rng, 3, 2)
    ch = ChannelSet(h10, h20, 20 * h10, 20 * h20)
    tg = SinrTargets.from_rates((0.5, 1, 1))
    sol = solve_dpc(ch, tg, 1.0, 1e3)
    assert qd_check(sol, ch, tg, 1.0)
    dec = h_comp_noma(ch, tg, 1.0, 1e3)
    assert dec.scheme == COMP_NOMA and dec.quasi_degraded
    assert dec.total_power == sol.total_power
    assert decision_report(dec, ch, tg, 1.0, 1e3).feasible


def test_qd_needs_feasible_solution():
    from qdnoma.dpc import Infeasible
    with pytest.raises(ValueError):
        qd_check(Infeasible, ChannelSet([1], [1], [1], [1]), SinrTargets(1, 1, 1), 1.0)


def test_zfbf_orthogonal_is_matched_filter():
    ch = ChannelSet([1, 0], [2, 0], [0, 3], [0, 1])
    tg = SinrTargets(1, 1, 3)
    d = zfbf_solve(ch, tg, 1.0, 100.0)
    assert d.feasible and d.scheme == ZFBF
    assert np.vdot(d.beams.w11, d.beams.w11).real == pytest.approx(1 / 9)
    assert np.vdot(d.beams.w22, d.beams.w22).real == pytest.approx(3.0)
    # CoMP demand eps0 sigma2 = 1 goes to BS 2 (gain 4)
    assert np.vdot(d.beams.w20, d.beams.w20).real == pytest.approx(0.25)
    assert np.linalg.norm(d.beams.w10) == 0


def test_zfbf_parallel_in_cell_infeasible():
    ch = ChannelSet([1, 0], [0, 1], [2, 0], [1, 1])
    d = zfbf_solve(ch, SinrTargets(1, 1, 1), 1.0, 100.0)
    assert not d.feasible and d.beams is None


def _zf_grid(d, ch, tg, pm, n=2001):
    """Best (P10, P20) on a fine grid for the fixed ZF directions of ``d``."""
    b = d.beams
    dirs = []
    for w, h_noma, h_comp in ((b.w10, ch.h11, ch.h10), (b.w20, ch.h22, ch.h20)):
        v = h_comp - h_noma * np.vdot(h_noma, h_comp) / np.vdot(h_noma, h_noma).real
        dirs.append(v / np.linalg.norm(v))
    a = [abs(np.vdot(ch.h10, dirs[0])) ** 2, abs(np.vdot(ch.h20, dirs[1])) ** 2]
    caps = [pm - np.vdot(b.w11, b.w11).real, pm - np.vdot(b.w22, b.w22).real]
    need = tg.eps0 * (abs(np.vdot(ch.h10, b.w11)) ** 2 + abs(np.vdot(ch.h20, b.w22)) ** 2 + 1.0)
    P1, P2 = np.meshgrid(np.linspace(0, caps[0], n), np.linspace(0, caps[1], n), indexing="ij")
    ok = a[0] * P1 + a[1] * P2 >= need
    # grid points rarely land on the constraint line; snap the free variable onto it
    P2s = np.maximum((need - a[0] * P1[:, 0]) / a[1], 0)
    P1s = np.maximum((need - a[1] * P2[0, :]) / a[0], 0)
    cand = [np.min(np.where(ok, P1 + P2, np.inf))]
    cand.append(np.min(np.where(P2s <= caps[1], P1[:, 0] + P2s, np.inf)))
    cand.append(np.min(np.where(P1s <= caps[0], P1s + P2[0, :], np.inf)))
    return min(cand)


@pytest.mark.parametrize("seed", range(15))
def test_zfbf_nulling_and_grid_oracle(seed):
    rng = np.random.default_rng(seed)
    ch = scale_free_instance(rng)
    tg = random_targets(rng, 0.1, 1.0)
    pm = float(10 ** rng.uniform(0, 2))
    d = zfbf_solve(ch, tg, 1.0, pm)
    if not d.feasible:
        return
    b = d.beams
    for h, w in ((ch.h10, b.w11), (ch.h11, b.w10), (ch.h20, b.w22), (ch.h22, b.w20)):
        assert abs(np.vdot(h, w)) <= 1e-10 * np.linalg.norm(h) * max(np.linalg.norm(w), 1e-300)
    assert check_feasible(b, ch, tg, pm, 1.0, tol=1e-9, model="zf").feasible
    comp = np.vdot(b.w10, b.w10).real + np.vdot(b.w20, b.w20).real
    ref = _zf_grid(d, ch, tg, pm)
    assert comp == pytest.approx(ref, rel=1e-3)
    assert comp <= ref * (1 + 1e-9)


@pytest.mark.parametrize("seed", range(30))
def test_dpc_lower_bounds_zfbf(seed):
    rng = np.random.default_rng(seed)
    ch = scale_free_instance(rng)
    tg = random_targets(rng, 0.1, 1.0)
    pm = float(10 ** rng.uniform(0, 2))
    dpc = solve_dpc(ch, tg, 1.0, pm)
    zf = zfbf_solve(ch, tg, 1.0, pm)
    if dpc and zf.feasible:
        assert zf.total_power >= dpc.total_power - 1e-9
    if zf.feasible:
        assert dpc  # any ZF point is DPC-feasible


def test_fallback_chain():
    # parallel in-cell channels kill ZFBF; zero budget kills DPC
    ch = ChannelSet([1, 0], [0, 1], [2, 0], [0, 2])
    d = h_comp_noma(ch, SinrTargets(1, 1, 1), 1.0, 0.0)
    assert not d.feasible and d.scheme == ZFBF
