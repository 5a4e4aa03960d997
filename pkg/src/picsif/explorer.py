"""Bounded search over the reduction graph.

Breadth-first by default, so a found witness is depth-minimal and results are
monotone in depth. Visited states are deduplicated by canonical key
(normalized soup + clocks + fuel + summary digest); congruent interleavings
therefore collapse, which is what makes the replicated soups tractable.
Targets are evaluated from the monotone violation flags each step maintains,
so no trace history is kept in the search keys.

The frontier could be partitioned across workers against a linearizable
visited set; this implementation is sequential, so results are trivially
independent of the requested worker count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .auditor import Verdict, audit
from .errors import ReplayDivergence, ScriptMismatch
from .scenarios import ScenarioBundle
from .semantics import ScenarioState, enabled_redexes, run, state_key, step, to_trace_data

TARGETS = ("auth-n", "auth-z", "unrecorded", "non-reconstructable", "any")

_TARGET_FLAGS = {
    "auth-n": frozenset({"auth-n"}),
    "auth-z": frozenset({"auth-z"}),
    "unrecorded": frozenset({"unrecorded"}),
    "non-reconstructable": frozenset({"unplaceable"}),
    "any": frozenset({"auth-n", "auth-z", "unrecorded", "unplaceable", "authz-hazard"}),
}


@dataclass(frozen=True)
class SearchConfig:
    max_depth: int = 12
    replication_fuel: int = 3
    strategy: str = "breadth-first"  # or depth-first
    target: str = "any"
    state_cap: int = 500_000
    collect_collisions: int = 0  # keep states for this many dedup hits (soundness checks)

    def __post_init__(self):
        if self.max_depth < 1 or self.replication_fuel < 1 or self.state_cap < 1:
            raise ValueError("maxDepth, fuel and stateCap must be >= 1")
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        if self.strategy not in ("breadth-first", "depth-first"):
            raise ValueError(f"unknown strategy {self.strategy!r}")


@dataclass(frozen=True)
class Witness:
    bundle: str
    target: str
    picks: tuple[str, ...]
    depth: int
    verdict_summary: str
    final_verdict: Optional[Verdict] = None  # full verdict when produced in-process


@dataclass(frozen=True)
class ExploreResult:
    outcome: str  # found | exhausted | capped
    witness: Optional[Witness] = None
    states_visited: int = 0
    collisions: tuple = ()  # (kept state, colliding state) samples

    @property
    def found(self) -> bool:
        return self.outcome == "found"


def _hit(state: ScenarioState, target: str) -> bool:
    return bool(_TARGET_FLAGS[target] & state.flags)


def explore(bundle: ScenarioBundle, cfg: SearchConfig) -> ExploreResult:
    """Search for a state whose trace satisfies the target; found witnesses
    replay deterministically (verified before returning).

    Breadth-first witnesses are depth-minimal. Depth-first re-expands a state
    whenever it is reached at a shallower depth than before, so `exhausted`
    is a sound bounded-verification result for both strategies."""
    init = bundle.state
    if _hit(init, cfg.target):
        v = audit(to_trace_data(init), cap=64)
        return ExploreResult("found", Witness(bundle.name, cfg.target, (), 0, v.summary, v))
    init_key = state_key(init)
    kept: dict[bytes, ScenarioState] = {init_key: init} if cfg.collect_collisions else {}
    collisions: list = []
    parents: dict[bytes, tuple[Optional[bytes], str]] = {init_key: (None, "")}
    best_depth: dict[bytes, int] = {init_key: 0}
    dfs = cfg.strategy == "depth-first"
    # BFS consumes the worklist as a queue; DFS as a stack.
    from collections import deque

    work = deque([(init, init_key, 0)])

    def expand(state, key, depth):
        out = []
        for redex in enabled_redexes(state):
            s2 = step(state, redex)
            if _hit(s2, cfg.target):
                picks = _path_to(parents, key) + (redex.key,)
                witness = _verify_witness(bundle, cfg.target, picks)
                return witness, None
            k2 = state_key(s2)
            seen = best_depth.get(k2)
            if seen is not None and seen <= depth + 1:
                if kept and len(collisions) < cfg.collect_collisions:
                    old = kept.get(k2)
                    if old is not None:
                        collisions.append((old, s2))
                continue
            best_depth[k2] = depth + 1
            if len(best_depth) > cfg.state_cap:
                return None, None  # capped
            if cfg.collect_collisions:
                kept[k2] = s2
            parents[k2] = (key, redex.key)
            out.append((s2, k2, depth + 1))
        return None, out

    while work:
        state, key, depth = work.pop() if dfs else work.popleft()
        if depth >= cfg.max_depth:
            continue
        witness, successors = expand(state, key, depth)
        if witness is not None:
            return ExploreResult("found", witness, states_visited=len(best_depth),
                                 collisions=tuple(collisions))
        if successors is None:
            return ExploreResult("capped", states_visited=len(best_depth),
                                 collisions=tuple(collisions))
        if dfs:
            work.extend(reversed(successors))
        else:
            work.extend(successors)
    return ExploreResult("exhausted", states_visited=len(best_depth),
                         collisions=tuple(collisions))


def _path_to(parents: dict, key: bytes) -> tuple[str, ...]:
    picks: list[str] = []
    while True:
        parent, pick = parents[key]
        if parent is None:
            break
        picks.append(pick)
        key = parent
    return tuple(reversed(picks))


def _verify_witness(bundle: ScenarioBundle, target: str, picks: tuple[str, ...]) -> Witness:
    final = run(bundle.state, ("script", list(picks)), len(picks))
    verdict = audit(to_trace_data(final), cap=64)
    return Witness(bundle.name, target, picks, len(picks), verdict.summary, verdict)


def replay(bundle: ScenarioBundle, witness: Witness) -> Verdict:
    """Re-verify a witness; divergence names the first differing step."""
    state = bundle.state
    for i, pick in enumerate(witness.picks):
        try:
            state = run(state, ("script", [pick]), 1)
        except ScriptMismatch as e:
            raise ReplayDivergence(i, str(e)) from None
    verdict = audit(to_trace_data(state), cap=64)
    if verdict.summary != witness.verdict_summary:
        raise ReplayDivergence(
            len(witness.picks),
            f"verdict {verdict.summary!r} != recorded {witness.verdict_summary!r}")
    return verdict


# --- witness files -------------------------------------------------------------


def witness_lines(w: Witness) -> str:
    out = ["picsif-witness v1", f"bundle {w.bundle}", f"target {w.target}",
           f"depth {w.depth}"]
    for pick in w.picks:
        out.append(f"pick {pick}")
    out.append(f"verdict {w.verdict_summary}")
    return "\n".join(out) + "\n"


def parse_witness(text: str) -> Witness:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "picsif-witness v1":
        raise ValueError("not a picsif witness file (missing v1 header)")
    bundle = target = verdict = ""
    depth = 0
    picks: list[str] = []
    for ln in lines[1:]:
        head, _, rest = ln.partition(" ")
        if head == "bundle":
            bundle = rest
        elif head == "target":
            target = rest
        elif head == "depth":
            depth = int(rest)
        elif head == "pick":
            picks.append(rest)
        elif head == "verdict":
            verdict = rest
        else:
            raise ValueError(f"bad witness line {ln!r}")
    return Witness(bundle, target, tuple(picks), depth, verdict)
