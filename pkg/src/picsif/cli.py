"""Command-line front door.

Subcommands: check, run, explore, replay, prove, audit. Traces and verdicts
go to standard output; witnesses go to files. Exit codes: 0 success (or
violation found when that was the target), 1 verdict mismatch / unexpected
violation, 2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

from . import scenarios
from .auditor import audit, render_verdict, render_verdict_kv
from .congruence import proof_lines
from .errors import PicsifError
from .explorer import SearchConfig, Witness, explore, parse_witness, replay, witness_lines
from .semantics import make_state, run, to_trace_data, trace_kv, trace_text
from .surface import ParseError, parse_file, pretty_process


def _load_bundle(path_or_name: str, fuel: Optional[int] = None) -> scenarios.ScenarioBundle:
    if path_or_name == "signalgate":
        return scenarios.signalgate_scenario(fuel=fuel or 3)
    if path_or_name.startswith("honest") and path_or_name[6:].isdigit():
        return scenarios.honest_scenario(int(path_or_name[6:]), fuel=fuel or 3)
    sf = parse_file(path_or_name)
    from .semantics import ActorState, AuthorizationRegistry, Clause
    from .vclock import init_clock

    actors = []
    for decl in sf.actors:
        clauses = tuple(Clause(c.term, vc=not c.app) for c in decl.clauses)
        clock = init_clock(1, decl.identity, 0) if decl.has_clock else None
        actors.append(ActorState(decl.name, decl.identity, clauses,
                                 clock=clock, forwards=decl.forwards))
    registry = AuthorizationRegistry(frozenset(sf.authenticated), sf.authorized)
    depth, file_fuel = sf.explore or (12, 3)
    state = make_state(actors, registry, fuel=fuel or file_fuel)
    name = os.path.splitext(os.path.basename(path_or_name))[0]
    return scenarios.ScenarioBundle(name, state, registry, "accountable",
                                    scif="", depth=depth, fuel=fuel or file_fuel)


def _policy(args) -> tuple:
    spec = args.policy
    if spec == "first":
        return ("first",)
    if spec == "random":
        return ("random", args.seed)
    if spec.startswith("script="):
        with open(spec.split("=", 1)[1], encoding="utf-8") as f:
            picks = [ln.strip() for ln in f if ln.strip() and not ln.startswith("#")]
        return ("script", picks)
    raise SystemExit(f"unknown policy {spec!r} (use first, random, script=<file>)")


def cmd_check(args) -> int:
    sf = parse_file(args.scenario)
    print(f"{args.scenario}: ok ({len(sf.actors)} actors, "
          f"{len(sf.authorized)} authorized channels)")
    return 0


def cmd_run(args) -> int:
    bundle = _load_bundle(args.scenario)
    final = run(bundle.state, _policy(args), args.steps)
    sys.stdout.write(trace_kv(final) if args.format == "kv" else trace_text(final))
    return 0


def cmd_explore(args) -> int:
    bundle = _load_bundle(args.scenario, fuel=args.fuel)
    cfg = SearchConfig(max_depth=args.depth or bundle.depth,
                       replication_fuel=args.fuel or bundle.fuel,
                       strategy=args.strategy,
                       target=args.target, state_cap=args.state_cap)
    result = explore(bundle, cfg)
    if result.outcome == "found":
        out = args.out or f"{bundle.name}-{args.target}.witness"
        with open(out, "w", encoding="utf-8") as f:
            f.write(witness_lines(result.witness))
        print(f"found at depth {result.witness.depth} "
              f"({result.states_visited} states); witness written to {out}")
        print(f"verdict {result.witness.verdict_summary}")
        return 0 if args.expect in (None, "found") else 1
    if result.outcome == "exhausted":
        print(f"exhausted: no {args.target} state within depth "
              f"{cfg.max_depth} ({result.states_visited} states visited)")
        return 0 if args.expect in (None, "exhausted") else 1
    print(f"capped at {result.states_visited} states; raise --state-cap or lower --depth")
    return 1


def cmd_replay(args) -> int:
    bundle = _load_bundle(args.scenario)
    with open(args.witness, encoding="utf-8") as f:
        witness = parse_witness(f.read())
    verdict = replay(bundle, witness)
    sys.stdout.write(render_verdict(verdict))
    return 0


def cmd_prove(args) -> int:
    proofs = {
        "signalgate-authz": scenarios.authz_insertion_proof,
        "signalgate-authn": scenarios.authn_insertion_proof,
    }
    if args.builtin not in proofs:
        print(f"unknown builtin proof {args.builtin!r}; have: {', '.join(sorted(proofs))}",
              file=sys.stderr)
        return 2
    proof = proofs[args.builtin]()
    for line in proof_lines(proof, pretty_process):
        print(line)
    proof.replay()
    print("replay ok")
    return 0


def cmd_audit(args) -> int:
    from .semantics import parse_trace_kv

    with open(args.trace, encoding="utf-8") as f:
        data = parse_trace_kv(f.read())
    verdict = audit(data, cap=args.cap)
    sys.stdout.write(render_verdict_kv(verdict) if args.format == "kv"
                     else render_verdict(verdict))
    if args.expect:
        return 0 if verdict.summary == args.expect else 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="picsif",
                                description="process-algebra accountability checker")
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("check", help="parse a scenario and report diagnostics")
    c.add_argument("scenario")
    c.set_defaults(fn=cmd_check)

    r = sub.add_parser("run", help="execute a scenario and print the trace")
    r.add_argument("scenario")
    r.add_argument("--policy", default="first",
                   help="first | random | script=<file>")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--steps", type=int, default=100)
    r.add_argument("--format", choices=("text", "kv"), default="text")
    r.set_defaults(fn=cmd_run)

    e = sub.add_parser("explore", help="search for a violating trace")
    e.add_argument("scenario")
    e.add_argument("--target", default="any",
                   choices=("auth-n", "auth-z", "unrecorded", "non-reconstructable", "any"))
    e.add_argument("--depth", type=int, default=None)
    e.add_argument("--fuel", type=int, default=None)
    e.add_argument("--strategy", choices=("breadth-first", "depth-first"),
                   default="breadth-first")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--state-cap", type=int, default=500_000)
    e.add_argument("--workers", type=int, default=1,
                   help="accepted for the explorer contract; execution is sequential")
    e.add_argument("--out", default=None, help="witness output path")
    e.add_argument("--expect", choices=("found", "exhausted"), default=None)
    e.set_defaults(fn=cmd_explore)

    rp = sub.add_parser("replay", help="re-verify a witness file")
    rp.add_argument("scenario")
    rp.add_argument("witness")
    rp.set_defaults(fn=cmd_replay)

    pr = sub.add_parser("prove", help="replay a bundled congruence proof")
    pr.add_argument("--builtin", required=True)
    pr.set_defaults(fn=cmd_prove)

    a = sub.add_parser("audit", help="run the auditor on a trace file")
    a.add_argument("trace")
    a.add_argument("--cap", type=int, default=12)
    a.add_argument("--format", choices=("text", "kv"), default="text")
    a.add_argument("--expect", default=None)
    a.set_defaults(fn=cmd_audit)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except ParseError as e:
        print(e, file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"{e.filename}: no such file", file=sys.stderr)
        return 2
    except PicsifError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
