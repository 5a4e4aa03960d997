"""Accountability checks over completed traces.

The auditor is the only component that reads the omniscient full trace; it
judges what the SO's log can account for against what actually happened.
All checks work on label-level TraceData, so auditing an exported trace file
gives identical results to auditing an in-memory run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import EnumerationCapExceeded
from .semantics import TraceData, TraceEvent

UNAUTH_N = "unauth-n"
UNAUTH_Z = "unauth-z"
UNRECORDED = "unrecorded-event"
NON_RECONSTRUCTABLE = "non-reconstructable"

MESSAGE_KINDS = ("message", "tuple")


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    witness_seqs: tuple[int, ...] = ()
    orders: Optional[tuple[tuple[int, ...], tuple[int, ...]]] = None


@dataclass(frozen=True)
class Verdict:
    violations: tuple[Violation, ...]

    @property
    def accountable(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    @property
    def summary(self) -> str:
        kinds = self.kinds()
        authn = UNAUTH_N in kinds
        authz = UNAUTH_Z in kinds
        if authn and authz:
            return "both"
        if authn:
            return "auth-n-violated"
        if authz:
            return "auth-z-violated"
        if kinds:
            return "violated"
        return "accountable"


def _comm_pairs(data: TraceData) -> list[tuple[TraceEvent, Optional[TraceEvent]]]:
    by_comm: dict[int, dict[str, TraceEvent]] = {}
    for e in data.events:
        if e.comm >= 0 and e.kind in ("send", "receive"):
            by_comm.setdefault(e.comm, {})[e.kind] = e
    out = []
    for comm in sorted(by_comm):
        halves = by_comm[comm]
        out.append((halves.get("send"), halves.get("receive")))
    return [(s, r) for s, r in out if s is not None]


def _chan_authorized(data: TraceData, e: TraceEvent) -> bool:
    if e.chan_base is None:
        return True
    if (e.chan_base,) in data.authorized_keys:
        return True
    if e.chan_from is not None:
        return (e.chan_base, e.chan_from, e.chan_to) in data.authorized_keys
    return False


def check_auth_n(data: TraceData) -> list[Violation]:
    """An unauthenticated actor exchanging messages with someone in the SCIF.

    Channel-name handshakes are auth-z territory; "communicates" here means
    message payloads move."""
    out = []
    auth = data.authenticated
    for send, recv in _comm_pairs(data):
        if recv is None or send.payload_kind not in MESSAGE_KINDS:
            continue
        s_in, r_in = send.actor in auth, recv.actor in auth
        if s_in != r_in:
            outsider = recv.actor if s_in else send.actor
            out.append(Violation(
                UNAUTH_N,
                f"unauthenticated {outsider} exchanged a message with the SCIF "
                f"on {send.channel_str}",
                witness_seqs=(send.seq, recv.seq)))
    return out


def check_auth_z(data: TraceData) -> list[Violation]:
    """Unauthorized channels inside the SCIF: communications between
    authenticated actors on unsanctioned channels, and unsanctioned channel
    mints by SCIF actors."""
    out = []
    auth = data.authenticated
    for send, recv in _comm_pairs(data):
        if recv is None:
            continue
        if send.actor in auth and recv.actor in auth and not _chan_authorized(data, send):
            out.append(Violation(
                UNAUTH_Z,
                f"{send.actor} and {recv.actor} communicated on unauthorized "
                f"{send.channel_str}",
                witness_seqs=(send.seq, recv.seq)))
    for e in data.events:
        if (e.kind == "channel-created" and e.payload_kind == "channel-name"
                and e.actor in auth and not _chan_authorized(data, e)):
            out.append(Violation(
                UNAUTH_Z,
                f"{e.actor} minted unauthorized channel {e.channel_str} inside the SCIF",
                witness_seqs=(e.seq,)))
    return out


def _involves_scif(data: TraceData, e: TraceEvent, peer: Optional[TraceEvent]) -> bool:
    if e.actor in data.authenticated:
        return True
    return peer is not None and peer.actor in data.authenticated


def check_completeness(data: TraceData) -> list[Violation]:
    """One violation per communication event the SO never received, when a
    SCIF actor was involved."""
    peers: dict[int, dict[str, TraceEvent]] = {}
    for e in data.events:
        if e.comm >= 0:
            peers.setdefault(e.comm, {})[e.kind] = e
    out = []
    for e in data.events:
        if e.kind not in ("send", "receive") or e.recorded:
            continue
        other = None
        if e.comm >= 0:
            halves = peers[e.comm]
            other = halves.get("receive" if e.kind == "send" else "send")
        if _involves_scif(data, e, other):
            out.append(Violation(
                UNRECORDED,
                f"{e.kind} by {e.actor} on {e.channel_str} never reached the SO",
                witness_seqs=(e.seq,)))
    return out


def _clock_before(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    return all(x <= y for x, y in zip(a, b)) and a != b


@dataclass(frozen=True)
class Reconstruction:
    reconstructable: bool
    orders: Optional[tuple[tuple[int, ...], tuple[int, ...]]] = None
    detail: str = ""


def _ground_events(data: TraceData) -> list[TraceEvent]:
    peers: dict[int, dict[str, TraceEvent]] = {}
    for e in data.events:
        if e.comm >= 0:
            peers.setdefault(e.comm, {})[e.kind] = e
    out = []
    for e in data.events:
        if e.kind not in ("send", "receive"):
            continue
        other = None
        if e.comm >= 0:
            halves = peers[e.comm]
            other = halves.get("receive" if e.kind == "send" else "send")
        if _involves_scif(data, e, other):
            out.append(e)
    return out


def enumerate_orders(data: TraceData, limit: int = 2, cap: int = 12) -> list[tuple[int, ...]]:
    """Total orders of the ground communication events consistent with the
    SO-log's clock constraints, by exhaustive enumeration with pruning.
    Stops after `limit` distinct orders."""
    ground = _ground_events(data)
    if len(ground) > cap:
        raise EnumerationCapExceeded(
            f"{len(ground)} events exceeds the enumeration cap of {cap}; "
            f"audit a smaller scenario or raise the cap")
    placeable = {e.seq for e in ground if e.seq in data.so_seqs and e.clock is not None}
    clocks = {e.seq: e.clock for e in ground}
    preds: dict[int, set[int]] = {e.seq: set() for e in ground}
    for a in ground:
        for b in ground:
            if (a.seq != b.seq and a.seq in placeable and b.seq in placeable
                    and _clock_before(clocks[a.seq], clocks[b.seq])):
                preds[b.seq].add(a.seq)
    seqs = [e.seq for e in ground]
    orders: list[tuple[int, ...]] = []

    def dfs(placed: tuple[int, ...], remaining: list[int]):
        if len(orders) >= limit:
            return
        if not remaining:
            orders.append(placed)
            return
        for s in remaining:
            if preds[s] <= set(placed):
                dfs(placed + (s,), [x for x in remaining if x != s])
                if len(orders) >= limit:
                    return

    dfs((), seqs)
    return orders


def check_reconstructable(data: TraceData, cap: int = 12) -> Reconstruction:
    """Can the SO uniquely recover the causal order of what actually happened?

    Every ground-truth communication event must be placeable (present in the
    post-deletion SO-log with clock data); the clock data then determines the
    causal partial order exactly. Unplaceable events (never forwarded, or
    deleted) admit multiple consistent total orders, returned as the witness.
    """
    ground = _ground_events(data)
    if len(ground) > cap:
        raise EnumerationCapExceeded(
            f"{len(ground)} events exceeds the enumeration cap of {cap}; "
            f"audit a smaller scenario or raise the cap")
    unplaceable = [e for e in ground
                   if e.seq not in data.so_seqs or e.clock is None]
    if not unplaceable:
        return Reconstruction(True)
    orders = enumerate_orders(data, limit=2, cap=cap)
    if len(orders) < 2:
        orders = orders * 2 if orders else [(), ()]
    labels = ", ".join(f"{e.kind} by {e.actor} on {e.channel_str}" for e in unplaceable[:4])
    return Reconstruction(False, orders=(orders[0], orders[1]),
                          detail=f"SO-log cannot place: {labels}")


def audit(data: TraceData, cap: int = 12) -> Verdict:
    violations = []
    violations += check_auth_n(data)
    violations += check_auth_z(data)
    violations += check_completeness(data)
    rec = check_reconstructable(data, cap=cap)
    if not rec.reconstructable:
        violations.append(Violation(NON_RECONSTRUCTABLE, rec.detail, orders=rec.orders))
    return Verdict(tuple(violations))


def render_verdict(v: Verdict) -> str:
    lines = [f"verdict {v.summary}", f"accountable {str(v.accountable).lower()}"]
    for viol in v.violations:
        lines.append(f"violation {viol.kind}: {viol.detail}")
        if viol.orders is not None:
            a, b = viol.orders
            lines.append(f"  order-a {' '.join(map(str, a))}")
            lines.append(f"  order-b {' '.join(map(str, b))}")
    return "\n".join(lines) + "\n"


def render_verdict_kv(v: Verdict) -> str:
    lines = ["picsif-verdict v1", f"summary={v.summary}",
             f"accountable={str(v.accountable).lower()}"]
    for viol in v.violations:
        parts = [f"kind={viol.kind}", f"witness={','.join(map(str, viol.witness_seqs)) or '-'}"]
        if viol.orders is not None:
            a, b = viol.orders
            parts.append("order_a=" + ",".join(map(str, a)))
            parts.append("order_b=" + ",".join(map(str, b)))
        lines.append("violation " + " ".join(parts))
    return "\n".join(lines) + "\n"
