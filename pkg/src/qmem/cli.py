"""Command-line interface: ``qmem <subcommand> ...``; results are JSON on stdout.

Channel, game and matrix arguments are JSON files. As a convenience a channel
may also be given as ``family(p)`` (e.g. ``dephasing(0.75)``, ``identity(3)``)
and a game as a canned name (``dephasing``, ``erasure``, ``damping(0.5)``)
when no file of that name exists.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import io
from .channels import ChoiState, family
from .dynamics import DEFAULT_DD_RATE, NO_PULSES, PulseSequence, qubit_bath_model, trajectory
from .errors import InvalidInputError, QmemError
from .games import canned_game, payoff
from .linalg import max_entangled
from .robustness import dmax, log_robustness, reconstruction_error, robustness_ppt, synthesis_cost
from .sdp import SdpOptions, write_history_csv
from .simulation import decompose, sample_estimate, synthesis_superchannel

_SPEC = re.compile(r"^\s*([a-z_]+)\s*\(\s*([^)]*)\)\s*$")


def _parse_spec(text: str):
    m = _SPEC.match(text)
    if not m:
        return None
    name, args = m.group(1), m.group(2)
    try:
        params = [float(a) for a in args.split(",") if a.strip()]
    except ValueError:
        raise InvalidInputError(f"bad parameters in {text!r}") from None
    return name, params


def _channel(arg: str):
    if Path(arg).exists():
        return io.load_channel(arg)
    spec = _parse_spec(arg)
    if spec is None:
        raise InvalidInputError(f"--channel: no such file and not a family(p) spec: {arg!r}")
    name, params = spec
    if name == "identity":
        params = [int(params[0])] if params else [2]
    return family(name, *params)


def _game(arg: str):
    if Path(arg).exists():
        return io.load_game(arg)
    spec = _parse_spec(arg)
    if spec is not None:
        name, params = spec
        return canned_game(name, params[0] if params else None)
    return canned_game(arg)


def _num(x):
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, default=_num, indent=1)
    sys.stdout.write("\n")


def _result_json(res) -> dict:
    out = {
        "value": res.value,
        "method": res.method,
        "is_exact": res.is_exact,
        "tolerance": res.tolerance,
        "log_robustness": log_robustness(res),
        "synthesis_cost": synthesis_cost(res),
    }
    try:
        out["dmax"] = dmax(res)
    except QmemError:
        pass
    if res.witness is not None:
        out["witness"] = io.matrix_to_json(res.witness)
    return out


# --- subcommands ----------------------------------------------------------


def cmd_robustness(args) -> int:
    ch = _channel(args.channel)
    method = args.method
    res = io.compute(ch, method, args.k, SdpOptions.from_env())
    if args.sdp_trace:
        if res.solution is None:
            raise InvalidInputError("--sdp-trace needs an SDP method")
        write_history_csv(res.solution, args.sdp_trace)
    _emit(_result_json(res))
    return 0


def cmd_game(args) -> int:
    g = _game(args.game)
    ch = _channel(args.channel)
    r = payoff(g, ch)
    _emit({
        "game": g.label,
        "payoff": r.payoff,
        "robustness_lower_bound": r.robustness_lower_bound,
        "normalized": r.normalized,
    })
    return 0


def cmd_sweep(args) -> int:
    if args.steps < 1:
        raise InvalidInputError(f"--steps must be >= 1, got {args.steps}")
    grid = np.linspace(args.p_from, args.p_to, args.steps + 1)
    methods = [m for m in args.methods.split(",") if m.strip()]
    rows = io.sweep(args.family, grid, methods, workers=args.workers)
    if args.out == "-":
        io.write_rows_csv(rows, io.SWEEP_COLUMNS, sys.stdout)
    else:
        io.write_rows_csv(rows, io.SWEEP_COLUMNS, args.out)
        _emit({"rows": len(rows), "out": args.out})
    return 0


def cmd_decompose(args) -> int:
    ch = _channel(args.channel)
    dec = decompose(ch)
    _emit({
        "s": dec.s,
        "one_norm": dec.one_norm,
        "overhead": dec.overhead,
        "relaxed": dec.relaxed,
        "reconstruction_error": reconstruction_error(dec.result, ch),
        "m_plus_choi": io.matrix_to_json(dec.m_plus.choi.matrix),
        "m_minus_choi": io.matrix_to_json(dec.m_minus.choi.matrix),
    })
    return 0


def cmd_sample(args) -> int:
    ch = _channel(args.channel)
    rho = io.load_matrix(args.state)
    obs = io.load_matrix(args.observable)
    dec = decompose(ch)
    est, err = sample_estimate(dec, rho, obs, args.shots, args.seed)
    _emit({"estimate": est, "std_error": err, "shots": args.shots, "overhead": dec.overhead})
    return 0


def cmd_synthesize(args) -> int:
    ch = _channel(args.channel)
    res = robustness_ppt(ch, "standard", SdpOptions.from_env())
    sc = synthesis_superchannel(ch, res)
    dc = sc.probe_dimension
    built = sc(ChoiState(dc, dc, max_entangled(dc)))
    _emit({
        "robustness": res.value,
        "synthesis_cost": synthesis_cost(res),
        "probe_dimension": sc.probe_dimension,
        "target_error": float(np.max(np.abs(built.matrix - ch.choi.matrix))),
        "filler_choi": io.matrix_to_json(sc.filler.matrix),
    })
    return 0


def cmd_dd(args) -> int:
    model = qubit_bath_model()
    pulses = NO_PULSES if args.no_pulses else PulseSequence(rate=args.rate)
    traj = trajectory(model, pulses, args.t_max, args.steps, label="free" if args.no_pulses else "dd")
    rows = io.trajectory_rows(traj, traj.label)
    if args.out:
        io.write_rows_csv(rows, io.TRAJECTORY_COLUMNS, args.out)
    _emit({
        "variant": traj.label,
        "rate": None if args.no_pulses else args.rate,
        "steps": args.steps,
        "t_max": args.t_max,
        "final_robustness": traj.robustness[-1],
        "non_markovianity": traj.non_markovianity[-1],
        "out": args.out,
    })
    return 0


def cmd_ingest(args) -> int:
    if Path(args.counts).exists():
        records = io.load_counts(args.counts)
    else:
        records = io.shipped_counts(args.counts)
    out = []
    for r in records:
        score, std, bound = io.ingest_counts(r)
        out.append({"game": r.game_label, "meta": {k: v for k, v in r.meta.items() if k in ("source", "p")},
                    "score": score, "std": std, "robustness_lower_bound": bound})
    _emit(out[0] if len(out) == 1 else out)
    return 0


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qmem", description="Robustness of quantum memories.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("robustness", help="robustness of a channel")
    p.add_argument("--channel", required=True, help="channel JSON file or family(p)")
    p.add_argument("--method", choices=["eig", "moment", "sdp", "sdp-gen", "ent", "ent-gen"], default="sdp")
    p.add_argument("--k", type=int, default=None, help="moment order (default 2)")
    p.add_argument("--sdp-trace", metavar="CSV", default=None, help="dump solver iterates as CSV")
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("game", help="payoff of a game on a channel")
    p.add_argument("--game", required=True, help="game JSON file or canned name")
    p.add_argument("--channel", required=True)
    p.set_defaults(func=cmd_game)

    p = sub.add_parser("sweep", help="robustness over a family parameter grid, CSV output")
    p.add_argument("--family", required=True)
    p.add_argument("--from", dest="p_from", type=float, default=0.0)
    p.add_argument("--to", dest="p_to", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=10, help="grid intervals; steps+1 points")
    p.add_argument("--methods", default="eig", help="comma list, e.g. eig,moment:3,sdp")
    p.add_argument("--out", default="-")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("decompose", help="optimal quasi-probability decomposition")
    p.add_argument("--channel", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("sample", help="Monte Carlo estimate of Tr[O N(rho)] from classical memories")
    p.add_argument("--channel", required=True)
    p.add_argument("--state", required=True, help="density matrix JSON")
    p.add_argument("--observable", required=True, help="observable JSON, operator norm <= 1")
    p.add_argument("--shots", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("synthesize", help="synthesis super-channel from ideal memories")
    p.add_argument("--channel", required=True)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("dd", help="bath-model trajectory with optional dynamical decoupling")
    p.add_argument("--rate", type=float, default=DEFAULT_DD_RATE)
    p.add_argument("--t-max", type=float, default=math.pi)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--no-pulses", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_dd)

    p = sub.add_parser("ingest", help="score experiment counts")
    p.add_argument("--counts", required=True, help="counts JSON file or shipped name")
    p.set_defaults(func=cmd_ingest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except QmemError as exc:
        print(f"qmem: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
