"""``ppsim`` command line: one job per process, results as JSON or CSV.

Exit codes: 0 success, 2 configuration error, 3 budget exceeded,
4 verification failure.
"""
import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time

import numpy as np

from . import circuits as C
from . import gates as G
from .contract import (
    DEFAULT_BUDGET,
    BudgetExceededError,
    adaptive_order,
    contract_truncated,
    cutoff_order,
    eval_sweep,
    pfsum_table,
    retarget,
    warmup,
)
from .fermionize import UnsupportedGateError, build_network

SCHEMA = "ppsim-result"
SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_VERIFY = 0, 2, 3, 4

# Column order is part of the output schema: append only.
RECORD_COLUMNS = [
    "schema_version", "command", "config_fingerprint", "seed", "c_re", "c_im",
    "k_used", "terms_evaluated", "elapsed", "runtime_estimate", "mode", "proxy",
    "target_rel_err", "k_c", "m", "s",
]
SWEEP_COLUMNS = [
    "schema_version", "config_fingerprint", "seed", "point", "param", "gamma_re",
    "gamma_im", "c_re", "c_im",
]


class ConfigError(ValueError):
    pass


def _pair(z):
    return [float(np.real(z)), float(np.imag(z))]


def _fingerprint(cfg):
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def parse_grid(text):
    try:
        start, stop, points = text.split(":")
        start, stop, points = float(start), float(stop), int(points)
    except ValueError:
        raise ConfigError(f"grid must be START:STOP:POINTS, got {text!r}") from None
    if points < 1:
        raise ConfigError("grid needs at least one point")
    return list(np.linspace(start, stop, points))


def parse_kt(text):
    if text in ("adaptive", "exact"):
        return text
    try:
        k = int(text)
    except ValueError:
        raise ConfigError(f"--kt must be an integer, 'adaptive' or 'exact', got {text!r}") from None
    if k < 0:
        raise ConfigError("--kt must be non-negative")
    return k


def boundary(text, L):
    """Boundary from a bitstring or one of the names ``zero``, ``h``, ``e``."""
    if text is None or text == "zero":
        return "0" * L
    if text in ("h", "e"):
        try:
            return C.half_filling_states(L, text)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return text


def accuracy_target(args):
    if args.digits is not None and args.target_rel_err is not None:
        raise ConfigError("give --digits or --target-rel-err, not both")
    target = 10.0 ** -args.digits if args.digits is not None else args.target_rel_err
    if target is not None and args.kt != "adaptive":
        raise ConfigError("an accuracy target needs --kt adaptive")
    if args.kt == "adaptive":
        target = 0.01 if target is None else target
        if not target > 0:
            raise ConfigError("accuracy target must be positive")
    return target


# -- circuit construction --------------------------------------------------------

def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ConfigError("missing required option(s): " + ", ".join("--" + n.replace("_", "-")
                                                                      for n in missing))


def build_circuit(args, phi=None):
    cmd = args.family if args.command == "sweep" else args.command
    if cmd == "simulate":
        _need(args, "circuit")
        return C.load_circuit(args.circuit)
    _need(args, "L")
    psi_i = boundary(args.psi, args.L)
    psi_f = boundary(args.psi_f, args.L) if args.psi_f else psi_i
    if cmd == "trotter":
        _need(args, "steps")
        U = args.U if phi is None else phi / args.dt
        return C.trotter_circuit(args.L, args.steps, args.t, U, args.dt, psi_i, psi_f)
    if cmd == "floquet":
        _need(args, "depth", "theta")
        phi = args.phi if phi is None else phi
        _need_value(phi, "phi")
        return C.floquet_circuit(args.L, args.depth, args.theta, phi, psi_i, psi_f)
    if cmd == "random":
        _need(args, "depth", "m")
        phi = args.phi if phi is None else phi
        kind = "ppu" if args.kind == "ppu" else "cphase"
        if kind == "cphase":
            _need_value(phi, "phi")
        return C.random_circuit(args.L, args.depth, args.m, kind=kind, phi=phi,
                                gamma_cutoff=args.gamma_cutoff, seed=args.seed,
                                psi_i=psi_i, psi_f=psi_f)
    raise ConfigError(f"unknown circuit family {cmd!r}")


def _need_value(v, name):
    if v is None:
        raise ConfigError(f"missing required option --{name}")


# -- jobs ------------------------------------------------------------------------

def job_config(args):
    skip = {"func", "out", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run_simulate(args):
    target = accuracy_target(args)
    circ = build_circuit(args)
    net = build_network(circ)
    proxy = False
    if args.kt == "adaptive":
        k, ref, proxy = adaptive_order(net, target, args.mode, args.budget)
        res = contract_truncated(net, k, args.mode, args.budget)
    else:
        k = net.m if args.kt == "exact" else min(args.kt, net.m)
        res = contract_truncated(net, k, args.mode, args.budget)
    cfg = job_config(args)
    return {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "config": cfg,
        "config_fingerprint": _fingerprint(cfg),
        "seed": args.seed,
        "c": _pair(res.c),
        "k_used": res.k_used,
        "terms_evaluated": res.terms_evaluated,
        "order_sums": [_pair(z) for z in res.order_sums],
        "elapsed": res.elapsed,
        "runtime_estimate": res.estimate,
        "mode": res.mode,
        "proxy": proxy,
        "target_rel_err": target,
        "k_c": cutoff_order(circ, method="analytic"),
        "m": net.m,
        "s": net.s,
        "network_fingerprint": net.fingerprint(),
    }


def _swept_sites(circ, args):
    family = args.family
    if family == "random" and args.kind == "ppu":
        raise ConfigError("sweeps need uniform gates; use simulate for random PPUs")
    sites = []
    for g, (li, q, gate) in enumerate(circ.placements()):
        if family == "random" and gate.name == "cphase":
            sites.append(g)
        elif family in ("floquet", "trotter") and li % 2 == 1:
            sites.append(g)
    return sites


def _swept_gate(args, p):
    if args.family == "random":
        return G.cphase(p)
    if args.family == "floquet":
        return G.fsim(args.theta, p)
    return G.fsim(args.t * args.dt, p)


def run_sweep(args):
    if args.phi_grid is None and args.U_grid is None:
        raise ConfigError("sweep needs --phi-grid (or --U-grid for trotter)")
    if args.U_grid is not None:
        if args.family != "trotter":
            raise ConfigError("--U-grid only applies to the trotter family")
        params = [u * args.dt for u in parse_grid(args.U_grid)]
        shown = parse_grid(args.U_grid)
    else:
        params = shown = parse_grid(args.phi_grid)
    if args.kt == "adaptive":
        raise ConfigError("sweeps take a fixed --kt or exact")

    warmup()
    ref = build_circuit(args, phi=1.0)
    sites = _swept_sites(ref, args)
    t0 = time.perf_counter()
    ref_net = build_network(ref, expansion_sites=sites)
    k = ref_net.m if args.kt == "exact" else min(args.kt, ref_net.m)
    table = pfsum_table(ref_net, k, args.budget)
    t_table = time.perf_counter() - t0

    t1 = time.perf_counter()
    gammas, norms = [], []
    for p in params:
        gate = _swept_gate(args, p)
        if gate is None:
            g, nrm = 0j, ref_net.norm
        else:
            try:
                g, nrm = retarget(ref_net, gate)
            except ValueError as exc:
                raise ConfigError(f"{exc}; use simulate per point") from None
        gammas.append(g)
        norms.append(nrm)
    values = eval_sweep(table, gammas, norms)
    t_eval = time.perf_counter() - t1

    cfg = job_config(args)
    fp = _fingerprint(cfg)
    rows = [
        {"schema_version": SCHEMA_VERSION, "config_fingerprint": fp, "seed": args.seed,
         "point": i, "param": float(x), "gamma_re": g.real, "gamma_im": g.imag,
         "c_re": c.real, "c_im": c.imag}
        for i, (x, g, c) in enumerate(zip(shown, gammas, values))
    ]
    timing = {"table_build": t_table, "evaluation": t_eval,
              "per_point": t_eval / len(params)}
    if args.direct_check:
        t2 = time.perf_counter()
        worst = 0.0
        for p, c in zip(params, values):
            net = build_network(build_circuit(args, phi=p), expansion_sites=sites)
            d = contract_truncated(net, k, "gamma", args.budget).c
            worst = max(worst, abs(d - c) / max(abs(d), 1e-300))
        timing["direct_total"] = time.perf_counter() - t2
        timing["speedup"] = timing["direct_total"] / (t_table + t_eval)
        timing["direct_max_rel_diff"] = worst
    return {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "command": "sweep",
        "config": cfg,
        "config_fingerprint": fp,
        "seed": args.seed,
        "k_max": k,
        "m": ref_net.m,
        "pfsum": [_pair(z) for z in table.values],
        "points": rows,
        "timing": timing,
    }


def run_verify(args):
    from .verify import run_all

    results = run_all()
    return {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "config": job_config(args),
        "suites": [{"name": n, "passed": ok, "detail": d} for n, ok, d in results],
        "passed": all(ok for _, ok, _ in results),
    }


# -- output ----------------------------------------------------------------------

def render(record, fmt):
    if fmt == "json":
        return json.dumps(record, indent=1, default=str) + "\n"
    buf = io.StringIO()
    if record["command"] == "sweep":
        w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(record["points"])
    elif record["command"] == "verify":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "passed", "detail"])
        for s in record["suites"]:
            w.writerow([s["name"], s["passed"], s["detail"]])
    else:
        row = dict(record, c_re=record["c"][0], c_im=record["c"][1])
        w = csv.DictWriter(buf, fieldnames=RECORD_COLUMNS, extrasaction="ignore",
                           lineterminator="\n")
        w.writeheader()
        w.writerow(row)
    return buf.getvalue()


def _positive(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive finite number")
    return v


def make_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=["gamma", "xi"], default="gamma")
    common.add_argument("--kt", default="exact", help="N, 'adaptive' or 'exact'")
    common.add_argument("--target-rel-err", type=float)
    common.add_argument("--digits", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    common.add_argument("--out")
    common.add_argument("--format", choices=["csv", "json"], default="json")

    family = argparse.ArgumentParser(add_help=False)
    family.add_argument("--L", type=int)
    family.add_argument("--depth", type=int)
    family.add_argument("--steps", type=int)
    family.add_argument("--t", type=float, default=1.0)
    family.add_argument("--U", type=float, default=0.0)
    family.add_argument("--dt", type=float, default=0.1)
    family.add_argument("--theta", type=float)
    family.add_argument("--phi", type=float)
    family.add_argument("--m", type=int)
    family.add_argument("--kind", choices=["cphase", "ppu"], default="cphase")
    family.add_argument("--gamma-cutoff", type=float)
    family.add_argument("--psi", help="initial state: bitstring, zero, h or e")
    family.add_argument("--psi-f", help="final state (defaults to --psi)")

    p = argparse.ArgumentParser(prog="ppsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", parents=[common, family], help="expand a circuit file")
    s.add_argument("--circuit")
    s.set_defaults(func=run_simulate)
    for name in ("trotter", "floquet", "random"):
        sub.add_parser(name, parents=[common, family]).set_defaults(func=run_simulate)
    sw = sub.add_parser("sweep", parents=[common, family], help="parameter sweep via PfSum table")
    sw.add_argument("--family", choices=["random", "floquet", "trotter"], default="random")
    sw.add_argument("--phi-grid")
    sw.add_argument("--U-grid")
    sw.add_argument("--direct-check", action="store_true",
                    help="also run every point directly and report the speedup")
    sw.set_defaults(func=run_sweep)
    v = sub.add_parser("verify", parents=[common], help="run the self-check suites")
    v.set_defaults(func=run_verify)
    return p


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        args.kt = parse_kt(args.kt)
        record = args.func(args)
    except BudgetExceededError as exc:
        print(f"ppsim: budget exceeded: estimate {exc.estimate:.3e} > {exc.budget:.3e}",
              file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, C.LayoutError, C.InvalidBoundaryError, G.GateValidationError,
            UnsupportedGateError, ValueError, OSError, KeyError) as exc:
        print(f"ppsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(record, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if record["command"] == "verify" and not record["passed"]:
        for s in record["suites"]:
            if not s["passed"]:
                print(f"ppsim: suite {s['name']} failed: {s['detail']}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
