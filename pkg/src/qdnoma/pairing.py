"""User grouping for the multi-group (TDMA) scenario.

K CoMP users, K NOMA users near BS 1 and K near BS 2 are split into K groups
of one user each. Every group gets its own time slot and a per-BS budget of
p_max / K. Indices are 0-based throughout.
"""

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, _uniform_in_disc, path_loss_channel, rayleigh, sample_lens_point
from .dpc import solve_dpc
from .schemes import COMP_NOMA, ZFBF, qd_check, zfbf_solve

ZFBF_ONLY = "ZfbfOnly"
HCOMP_NOMA = "HCompNoma"
AS_FLAGGED = "AsFlagged"
POLICIES = (ZFBF_ONLY, HCOMP_NOMA, AS_FLAGGED)
DEFAULT_ORTH_THRESHOLD = 0.01


@dataclass
class UserPopulation:
    comp_channels: list  # (h10^k, h20^k) per CoMP user k
    noma1_channels: list  # h11^i per NOMA user i of BS 1
    noma2_channels: list  # h22^j per NOMA user j of BS 2

    def __post_init__(self):
        K = len(self.comp_channels)
        if len(self.noma1_channels) != K or len(self.noma2_channels) != K:
            raise ValueError("population lists must all have length K")
        vecs = [v for pair in self.comp_channels for v in pair]
        vecs += list(self.noma1_channels) + list(self.noma2_channels)
        if any(np.linalg.norm(v) <= 0 for v in vecs):
            raise ValueError("all channel norms must be positive")

    @property
    def K(self):
        return len(self.comp_channels)

    def group(self, k, i, j):
        h10, h20 = self.comp_channels[k]
        return ChannelSet(h10, h20, self.noma1_channels[i], self.noma2_channels[j])

    def corr1(self, i, k):
        """Normalised correlation |h11^iH h10^k|^2 / (||h11^i||^2 ||h10^k||^2)."""
        return _ncorr(self.noma1_channels[i], self.comp_channels[k][0])

    def corr2(self, j, k):
        return _ncorr(self.noma2_channels[j], self.comp_channels[k][1])


def _ncorr(a, b):
    return float(abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


def sample_population(config, rng, K=None):
    """Drop 3K users and draw their channels."""
    K = config.group_count if K is None else K
    bs1, bs2 = config.bs_positions
    N, alpha = config.antennas, config.path_loss_exp
    comp = []
    for _ in range(K):
        p = sample_lens_point(config, rng)
        g = rayleigh(rng, N, 2)
        comp.append((path_loss_channel(g[0], np.hypot(*(p - bs1)), alpha),
                     path_loss_channel(g[1], np.hypot(*(p - bs2)), alpha)))
    p1 = _uniform_in_disc(rng, bs1, config.noma_radius_1, K)
    p2 = _uniform_in_disc(rng, bs2, config.noma_radius_2, K)
    g1 = rayleigh(rng, N, K)
    g2 = rayleigh(rng, N, K)
    d1 = np.hypot(*(p1 - bs1).T)
    d2 = np.hypot(*(p2 - bs2).T)
    noma1 = [path_loss_channel(g1[i], d1[i], alpha) for i in range(K)]
    noma2 = [path_loss_channel(g2[j], d2[j], alpha) for j in range(K)]
    return UserPopulation(comp, noma1, noma2)


@dataclass
class GroupAssignment:
    pi1: list
    pi2: list
    S: list

    def __post_init__(self):
        K = len(self.pi1)
        if sorted(self.pi1) != list(range(K)) or sorted(self.pi2) != list(range(K)):
            raise ValueError("pi1 and pi2 must be permutations of range(K)")
        if len(self.S) != K or any(s not in (0, 1) for s in self.S):
            raise ValueError("S must hold K flags in {0, 1}")

    def groups(self):
        return [(k, self.pi1[k], self.pi2[k]) for k in range(len(self.pi1))]

    def to_dict(self):
        return {"pi1": list(self.pi1), "pi2": list(self.pi2), "S": list(self.S)}


@dataclass
class GroupResult:
    k: int
    i: int
    j: int
    feasible: bool
    total_power: float
    scheme: str


class GroupEvaluator:
    """Memoised per-triple solver calls for one population and per-group budget."""

    def __init__(self, pop, targets, sigma2, group_budget):
        self.pop = pop
        self.targets = targets
        self.sigma2 = sigma2
        self.budget = group_budget
        self._dpc = {}
        self._qd = {}
        self._zf = {}

    def dpc(self, k, i, j):
        key = (k, i, j)
        if key not in self._dpc:
            self._dpc[key] = solve_dpc(self.pop.group(k, i, j), self.targets,
                                       self.sigma2, self.budget)
        return self._dpc[key]

    def quasi_degraded(self, k, i, j):
        """DPC-feasible under the group budget and passing the QD test."""
        key = (k, i, j)
        if key not in self._qd:
            sol = self.dpc(k, i, j)
            self._qd[key] = bool(sol) and qd_check(sol, self.pop.group(k, i, j),
                                                   self.targets, self.sigma2)
        return self._qd[key]

    def zfbf(self, k, i, j):
        key = (k, i, j)
        if key not in self._zf:
            self._zf[key] = zfbf_solve(self.pop.group(k, i, j), self.targets,
                                       self.sigma2, self.budget)
        return self._zf[key]

    def hcn(self, k, i, j):
        if self.quasi_degraded(k, i, j):
            sol = self.dpc(k, i, j)
            return True, sol.total_power, COMP_NOMA
        zf = self.zfbf(k, i, j)
        return zf.feasible, zf.total_power if zf.feasible else np.inf, ZFBF

    def evaluate(self, k, i, j, policy, flag=0):
        if policy == HCOMP_NOMA:
            ok, p, scheme = self.hcn(k, i, j)
        elif policy == ZFBF_ONLY or (policy == AS_FLAGGED and flag == 0):
            zf = self.zfbf(k, i, j)
            ok, p, scheme = zf.feasible, zf.total_power if zf.feasible else np.inf, ZFBF
        elif policy == AS_FLAGGED:
            ok = self.quasi_degraded(k, i, j)
            p = self.dpc(k, i, j).total_power if ok else np.inf
            scheme = COMP_NOMA
        else:
            raise ValueError(f"unknown scheme policy {policy!r}")
        return GroupResult(k, i, j, bool(ok), float(p), scheme)


def _evaluator(pop, targets, sigma2, p_max, evaluator):
    if evaluator is not None:
        return evaluator
    return GroupEvaluator(pop, targets, sigma2, p_max / pop.K)


def qdup(pop, targets, sigma2, p_max, orth_threshold=DEFAULT_ORTH_THRESHOLD, evaluator=None):
    """Greedy quasi-degradation based pairing; ``p_max`` is split equally over K groups."""
    ev = _evaluator(pop, targets, sigma2, p_max, evaluator)
    K = pop.K
    free1, free2 = list(range(K)), list(range(K))
    pi1, pi2, S = [None] * K, [None] * K, [0] * K
    for k in range(K):
        match = None
        for i in free1:
            for j in free2:
                if ev.quasi_degraded(k, i, j):
                    match = (i, j, 1)
                elif pop.corr1(i, k) <= orth_threshold and pop.corr2(j, k) <= orth_threshold:
                    match = (i, j, 0)
                if match:
                    break
            if match:
                break
        if match is None:
            i = min(free1, key=lambda i: pop.corr1(i, k))
            j = min(free2, key=lambda j: pop.corr2(j, k))
            match = (i, j, 0)
        i, j, s = match
        pi1[k], pi2[k], S[k] = i, j, s
        free1.remove(i)
        free2.remove(j)
    return GroupAssignment(pi1, pi2, S)


def random_pairing(pop, rng):
    K = pop if isinstance(pop, int) else pop.K
    return GroupAssignment([int(v) for v in rng.permutation(K)],
                           [int(v) for v in rng.permutation(K)], [0] * K)


def corr_pairing(pop):
    """Each CoMP user in turn takes the free NOMA users best aligned with it."""
    K = pop.K
    free1, free2 = list(range(K)), list(range(K))
    pi1, pi2 = [None] * K, [None] * K
    for k in range(K):
        i = max(free1, key=lambda i: pop.corr1(i, k))
        j = max(free2, key=lambda j: pop.corr2(j, k))
        pi1[k], pi2[k] = i, j
        free1.remove(i)
        free2.remove(j)
    return GroupAssignment(pi1, pi2, [0] * K)


def evaluate_assignment(pop, assignment, targets, sigma2, p_max, scheme_policy=HCOMP_NOMA,
                        evaluator=None):
    """Per-group outcome under budget p_max / K; infeasible groups are in outage."""
    if scheme_policy not in POLICIES:
        raise ValueError(f"unknown scheme policy {scheme_policy!r}")
    ev = _evaluator(pop, targets, sigma2, p_max, evaluator)
    return [ev.evaluate(k, i, j, scheme_policy, assignment.S[k])
            for k, i, j in assignment.groups()]
