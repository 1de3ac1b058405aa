"""Monte Carlo outage experiments comparing pairing pipelines.

Each trial draws a fresh population of 3K users from its own random stream
(seed, trial index), so results do not depend on how trials are scheduled.
"""

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .channel import trial_rng
from .pairing import (AS_FLAGGED, HCOMP_NOMA, ZFBF_ONLY, GroupEvaluator, corr_pairing,
                      evaluate_assignment, qdup, random_pairing, sample_population)
from .rates import SinrTargets

QDUP = "QDUP"
HCN_RAN = "HCN-Ran"
HCN_CORR = "HCN-Corr"
ZFBF_RAN = "ZFBF-Ran"
SCHEMES = (QDUP, HCN_RAN, HCN_CORR, ZFBF_RAN)
CSV_COLUMNS = ("scheme", "K", "p_max", "trials", "outage_prob", "ci95", "mean_power_w", "seed")


@dataclass
class OutageStats:
    scheme: str
    K: int
    p_max: float
    trials: int
    group_outage_prob: float
    mean_total_power: float
    confidence_halfwidth_95: float
    seed: int

    def row(self):
        return {"scheme": self.scheme, "K": self.K, "p_max": self.p_max, "trials": self.trials,
                "outage_prob": self.group_outage_prob, "ci95": self.confidence_halfwidth_95,
                "mean_power_w": self.mean_total_power, "seed": self.seed}


@dataclass
class TrialTable:
    """Raw per-trial results: outage counts and summed power of served groups."""

    schemes: tuple
    K: int
    outages: np.ndarray  # (trials, schemes) int
    power: np.ndarray  # (trials, schemes) float
    served: np.ndarray  # (trials, schemes) int

    def outage_fraction(self, scheme):
        return self.outages[:, self.schemes.index(scheme)] / self.K


def run_trial(config, trial, schemes=SCHEMES, orth_threshold=0.01):
    """Outage count, served-group power and served count per scheme for one trial."""
    rng = trial_rng(config.seed, trial)
    pop = sample_population(config, rng)
    targets = SinrTargets.from_rates(config.target_rates)
    sigma2, p_max = config.noise_power, config.p_max
    ev = GroupEvaluator(pop, targets, sigma2, p_max / pop.K)
    ran = random_pairing(pop, rng)
    out = []
    for name in schemes:
        if name == QDUP:
            assign, policy = qdup(pop, targets, sigma2, p_max, orth_threshold, evaluator=ev), AS_FLAGGED
        elif name == HCN_RAN:
            assign, policy = ran, HCOMP_NOMA
        elif name == HCN_CORR:
            assign, policy = corr_pairing(pop), HCOMP_NOMA
        elif name == ZFBF_RAN:
            assign, policy = ran, ZFBF_ONLY
        else:
            raise ValueError(f"unknown scheme {name!r}")
        res = evaluate_assignment(pop, assign, targets, sigma2, p_max, policy, evaluator=ev)
        served = [r.total_power for r in res if r.feasible]
        out.append((len(res) - len(served), math.fsum(served), len(served)))
    return out


def _run_chunk(args):
    config, trials, schemes = args
    return [run_trial(config, t, schemes) for t in trials]


def simulate(config, schemes=SCHEMES, trials=1000, workers=1):
    if trials < 1:
        raise ValueError("trials must be at least 1")
    schemes = tuple(schemes)
    for s in schemes:
        if s not in SCHEMES:
            raise ValueError(f"unknown scheme {s!r}; choose from {', '.join(SCHEMES)}")
    idx = list(range(trials))
    if workers <= 1:
        rows = _run_chunk((config, idx, schemes))
    else:
        n_chunks = min(trials, 4 * workers)
        chunks = [idx[c::n_chunks] for c in range(n_chunks)]
        rows = [None] * trials
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for chunk, res in zip(chunks, pool.map(_run_chunk, [(config, c, schemes) for c in chunks])):
                for t, r in zip(chunk, res):
                    rows[t] = r
    arr = np.array(rows, dtype=float)  # (trials, schemes, 3)
    return TrialTable(schemes, config.group_count, arr[:, :, 0].astype(int), arr[:, :, 1],
                      arr[:, :, 2].astype(int))


def summarize(table, config, trials):
    stats = []
    n_groups = trials * table.K
    for c, name in enumerate(table.schemes):
        p = table.outages[:, c].sum() / n_groups
        served = table.served[:, c].sum()
        mean_p = math.fsum(table.power[:, c]) / served if served else math.nan
        ci = 1.96 * math.sqrt(p * (1.0 - p) / n_groups)
        stats.append(OutageStats(name, table.K, config.p_max, trials, float(p), float(mean_p),
                                 float(ci), config.seed))
    return stats


def run_montecarlo(config, schemes=SCHEMES, trials=1000, workers=1):
    table = simulate(config, schemes, trials, workers)
    return summarize(table, config, trials)


def emit_results(stats, path, fmt="csv", config=None):
    """Write stats as CSV (fixed columns) or JSON (same fields plus config provenance)."""
    try:
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
                w.writeheader()
                for s in stats:
                    w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in s.row().items()})
        elif fmt == "json":
            doc = {"results": [_json_safe(s.row()) for s in stats]}
            if config is not None:
                doc["config"] = config.to_dict()
            with open(path, "w") as fh:
                json.dump(doc, fh, indent=2, sort_keys=False)
                fh.write("\n")
        else:
            raise ValueError(f"unknown format {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write results to {os.fspath(path)}: {exc.strerror or exc}") from exc


def _json_safe(row):
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in row.items()}


def read_results(path, fmt="csv"):
    """Parse a file written by :func:`emit_results` back into OutageStats."""
    if fmt == "csv":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    else:
        with open(path) as fh:
            rows = json.load(fh)["results"]
    out = []
    for r in rows:
        def num(v):
            return math.nan if v is None else float(v)
        out.append(OutageStats(r["scheme"], int(r["K"]), num(r["p_max"]), int(r["trials"]),
                               num(r["outage_prob"]), num(r["mean_power_w"]), num(r["ci95"]),
                               int(r["seed"])))
    return out


def stats_as_dicts(stats):
    return [asdict(s) for s in stats]
