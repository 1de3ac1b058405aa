"""Command-line entry point: ``qdnoma {solve,oracle,pair,montecarlo,dump}``."""

import argparse
import json
import math
import sys

import numpy as np

from .channel import ChannelSet, ConfigError, ScenarioConfig, random_channel_set, trial_rng
from .dpc import solve_dpc
from .montecarlo import SCHEMES, emit_results, run_montecarlo
from .oracle import grid_oracle_dpc, verify_solution
from .pairing import (AS_FLAGGED, HCOMP_NOMA, corr_pairing, evaluate_assignment, qdup,
                      random_pairing, sample_population)
from .rates import SinrTargets
from .schemes import h_comp_noma, qd_check


class DumpError(ValueError):
    pass


def _vec_to_json(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def _vec_from_json(name, data):
    try:
        return np.array([complex(re, im) for re, im in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise DumpError(f"{name}: expected a list of [re, im] pairs") from exc


def channel_dump(channels, sigma2, rates, p_max):
    return {"N": channels.antennas, "sigma2": sigma2, "rates": list(rates), "p_max": p_max,
            "h10": _vec_to_json(channels.h10), "h20": _vec_to_json(channels.h20),
            "h11": _vec_to_json(channels.h11), "h22": _vec_to_json(channels.h22)}


def load_channel_dump(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DumpError(f"{path}: invalid JSON ({exc})") from exc
    required = {"N", "sigma2", "rates", "p_max", "h10", "h20", "h11", "h22"}
    missing = required - set(doc)
    if missing:
        raise DumpError(f"{path}: missing fields {sorted(missing)}")
    unknown = set(doc) - required
    if unknown:
        raise DumpError(f"{path}: unknown fields {sorted(unknown)}")
    vecs = {k: _vec_from_json(k, doc[k]) for k in ("h10", "h20", "h11", "h22")}
    if any(len(v) != doc["N"] for v in vecs.values()):
        raise DumpError(f"{path}: channel lengths do not match N={doc['N']}")
    return ChannelSet(**vecs), float(doc["sigma2"]), tuple(doc["rates"]), float(doc["p_max"])


def _instance(args):
    if args.channels:
        ch, sigma2, rates, p_max = load_channel_dump(args.channels)
        if args.p_max is not None:
            p_max = args.p_max
        return ch, sigma2, rates, p_max
    cfg = _config(args)
    ch = random_channel_set(cfg, trial_rng(cfg.seed, 0))
    return ch, cfg.noise_power, cfg.target_rates, cfg.p_max


def _config(args):
    cfg = ScenarioConfig.from_json(args.config) if args.config else ScenarioConfig()
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "k", None):
        changes["group_count"] = args.k[0]
    if getattr(args, "p_max", None) is not None:
        changes["p_max"] = args.p_max
    return cfg.replace(**changes) if changes else cfg


def _num(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _beams_json(beams):
    return {k: _vec_to_json(getattr(beams, k)) for k in ("w10", "w20", "w11", "w22")}


def _write(doc, out):
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        try:
            with open(out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {out}: {exc.strerror or exc}") from exc
    else:
        sys.stdout.write(text)


def cmd_solve(args):
    ch, sigma2, rates, p_max = _instance(args)
    targets = SinrTargets.from_rates(rates)
    sol = solve_dpc(ch, targets, sigma2, p_max)
    doc = {"p_max": p_max, "sigma2": sigma2, "rates": list(rates)}
    if sol:
        res = verify_solution(sol.beams, ch, targets, sigma2, p_max, model="dpc")
        doc["dpc"] = {"case": sol.case_label, "P10": sol.P10, "P20": sol.P20, "x": sol.x,
                      "y": sol.y, "total_power": sol.total_power, "swapped": sol.swapped,
                      "min_residual": res.min_residual, "beams": _beams_json(sol.beams)}
        doc["quasi_degraded"] = qd_check(sol, ch, targets, sigma2)
    else:
        doc["dpc"] = None
        doc["quasi_degraded"] = None
    dec = h_comp_noma(ch, targets, sigma2, p_max, dpc=sol)
    doc["scheme"] = {"scheme": dec.scheme, "feasible": dec.feasible,
                     "total_power": _num(dec.total_power)}
    _write(doc, args.out)


def cmd_oracle(args):
    ch, sigma2, rates, p_max = _instance(args)
    targets = SinrTargets.from_rates(rates)
    o = grid_oracle_dpc(ch, targets, sigma2, p_max, grid_step=args.grid_step)
    doc = {"p_max": p_max, "grid_step": args.grid_step, "feasible": o.feasible}
    if o:
        doc.update(total_power=o.total_power, x=o.x, y=o.y, P10=o.P10, P20=o.P20)
    _write(doc, args.out)


def cmd_pair(args):
    cfg = _config(args)
    rng = trial_rng(cfg.seed, 0)
    pop = sample_population(cfg, rng)
    targets = SinrTargets.from_rates(cfg.target_rates)
    if args.strategy == "qdup":
        assign = qdup(pop, targets, cfg.noise_power, cfg.p_max, args.orth_threshold)
        policy = AS_FLAGGED
    elif args.strategy == "random":
        assign, policy = random_pairing(pop, rng), HCOMP_NOMA
    else:
        assign, policy = corr_pairing(pop), HCOMP_NOMA
    res = evaluate_assignment(pop, assign, targets, cfg.noise_power, cfg.p_max, policy)
    doc = {"strategy": args.strategy, "K": pop.K, "p_max": cfg.p_max, "seed": cfg.seed,
           "assignment": assign.to_dict(),
           "groups": [{"k": r.k, "i": r.i, "j": r.j, "feasible": r.feasible,
                       "scheme": r.scheme, "total_power": _num(r.total_power)} for r in res]}
    _write(doc, args.out)


def cmd_montecarlo(args):
    base = _config(args)
    ks = args.k or [base.group_count]
    schemes = args.schemes.split(",") if args.schemes else list(SCHEMES)
    stats = []
    for K in ks:
        p_max = args.pmax_per_group * K if args.pmax_per_group is not None else base.p_max
        cfg = base.replace(group_count=K, p_max=p_max)
        stats += run_montecarlo(cfg, schemes, args.trials, workers=args.workers)
    if args.out:
        emit_results(stats, args.out, args.format, config=base)
    else:
        for s in stats:
            print(f"{s.scheme:10s} K={s.K:<3d} p_max={s.p_max:<8.4g} "
                  f"outage={s.group_outage_prob:.4f} +/- {s.confidence_halfwidth_95:.4f}")


def cmd_dump(args):
    ch, sigma2, rates, p_max = _instance(args)
    _write(channel_dump(ch, sigma2, rates, p_max), args.out)


def _k_list(text):
    try:
        ks = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or comma-separated integers")
    if any(k < 1 for k in ks):
        raise argparse.ArgumentTypeError("K must be positive")
    return ks


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="qdnoma", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, instance=False):
        sp.add_argument("--config", help="scenario JSON file")
        sp.add_argument("--seed", type=_u64)
        sp.add_argument("--p-max", type=float, dest="p_max", help="override per-BS budget (W)")
        sp.add_argument("--out", help="output path (stdout when omitted)")
        if instance:
            sp.add_argument("--channels", help="channel dump JSON; sampled from --config when omitted")

    sp = sub.add_parser("solve", help="closed-form DPC solve, QD verdict and scheme decision")
    common(sp, instance=True)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("oracle", help="brute-force grid oracle on one instance")
    common(sp, instance=True)
    sp.add_argument("--grid-step", type=float, default=1e-3)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("dump", help="write a channel dump for solve/oracle")
    common(sp, instance=True)
    sp.set_defaults(func=cmd_dump)

    sp = sub.add_parser("pair", help="group one random population")
    common(sp)
    sp.add_argument("--k", type=_k_list)
    sp.add_argument("--strategy", choices=("qdup", "random", "corr"), default="qdup")
    sp.add_argument("--orth-threshold", type=float, default=0.01)
    sp.set_defaults(func=cmd_pair)

    sp = sub.add_parser("montecarlo", help="outage comparison of pairing pipelines")
    common(sp)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--k", type=_k_list, help="group count(s), e.g. 2,4,8")
    sp.add_argument("--schemes", help=f"comma list from {','.join(SCHEMES)}")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--pmax-per-group", type=float,
                    help="set p_max = value * K for each K")
    sp.set_defaults(func=cmd_montecarlo)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ConfigError, DumpError, OSError, ValueError) as exc:
        print(f"qdnoma: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
