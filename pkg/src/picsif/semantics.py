"""The reduction engine.

A ScenarioState is an immutable snapshot of a soup of actors, each holding a
tuple of executable clauses. Communications fire between complementary
send/receive prefixes on the same channel (matching on base-name identity;
endpoint annotations, where present on either side, constrain who may send
and receive). Replication is unfolded lazily: a prefix under a fueled
replication site is directly enabled, and firing spawns the copy and spends
one unit of that site's fuel.

Clock machinery runs as actor-local bookkeeping: a vc-tagged clause
increments its actor's clock per fired action (the paper's IncEle) and
attaches the snapshot for receiver-side merging; each clocked action also
emits one auxiliary `internal` record standing for the memory shuttle.
SO-log appends are synchronous with the emitting step and gated on the actor
forwarding to the SO and the channel being authorized. Phone-side clauses
(vc=False) emit snapshot-less events that the SO never sees.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .errors import ScriptMismatch, StaleRedex
from .terms import (
    CHANNEL,
    Atom,
    Call,
    ChannelId,
    Choice,
    Hole,
    Inaction,
    Match,
    Name,
    Parallel,
    Receive,
    Replication,
    Restriction,
    Send,
    Term,
    Variable,
    canonical,
    substitute,
    subterm_at,
)
from .vclock import VectorClockList, inc_ele, init_clock, max_vec
from . import _kernels

SEND = "send"
RECEIVE = "receive"
INTERNAL = "internal"
CHANNEL_CREATED = "channel-created"
DELETED = "deleted"


# --- registry ----------------------------------------------------------------


@dataclass(frozen=True)
class AuthorizationRegistry:
    """The SO's list of authenticated identities and sanctioned channels."""

    authenticated: frozenset[Variable]
    authorized: tuple[ChannelId, ...]

    def keys(self) -> frozenset:
        out = set()
        for ch in self.authorized:
            if ch.endpoints:
                f, t = ch.endpoints
                out.add((ch.base.uid, f.label, t.label))
            else:
                out.add((ch.base.uid, None))
        return frozenset(out)

    def is_authorized(self, ch: Optional[ChannelId]) -> bool:
        if ch is None:
            return True  # non-channel events have nothing to authorize
        if not isinstance(ch.base, Name):
            return False
        keys = self.keys()
        if (ch.base.uid, None) in keys:
            return True
        if ch.endpoints:
            f, t = ch.endpoints
            return (ch.base.uid, f.label, t.label) in keys
        return False

    def is_authenticated(self, v: Variable) -> bool:
        return v in self.authenticated


# --- events ------------------------------------------------------------------


@dataclass(frozen=True)
class EventRecord:
    seq: int
    actor: Variable
    kind: str  # send | receive | internal | channel-created | deleted
    channel: Optional[ChannelId]
    payload_kind: str  # vc-list | message | channel-name | tuple
    payload: tuple[Atom, ...]
    clock: Optional[VectorClockList]
    recorded_by_so: bool
    comm: int = -1  # pairs the two halves of one communication
    note: str = ""


def _chan_str(ch: Optional[ChannelId]) -> str:
    if ch is None:
        return "-"
    base = ch.base.label
    if ch.endpoints:
        f, t = ch.endpoints
        return f"{base}[{f.label}->{t.label}]"
    return base


def event_line(e: EventRecord) -> str:
    """The spec'd line format: seq actor kind channel payload-kind clock recorded."""
    clock = str(e.clock) if e.clock is not None else "-"
    return (f"{e.seq} {e.actor.label} {e.kind} {_chan_str(e.channel)} "
            f"{e.payload_kind} {clock} {'true' if e.recorded_by_so else 'false'}")


# --- actors and states -------------------------------------------------------


@dataclass(frozen=True)
class Clause:
    """One executable top-level component of an actor.

    vc=False marks phone-side (Signal-app) processes: no clock participation,
    never forwarded to the SO.
    """

    term: Term
    vc: bool = True
    tag: str = ""


@dataclass(frozen=True)
class ActorState:
    name: str
    identity: Variable
    clauses: tuple[Clause, ...]
    clock: Optional[VectorClockList] = None
    forwards: bool = False
    store: tuple[EventRecord, ...] = ()  # local message records; Delete's target


@dataclass(frozen=True)
class ScenarioState:
    actors: tuple[ActorState, ...]
    registry: AuthorizationRegistry
    fuel: tuple[tuple[int, int], ...] = ()  # (site id, remaining), sorted
    fresh: int = 0
    seq: int = 0
    comms: int = 0
    so_log: tuple[EventRecord, ...] = ()
    full_trace: tuple[EventRecord, ...] = ()
    flags: frozenset[str] = frozenset()  # monotone violation summary

    def fuel_of(self, site: Optional[int]) -> int:
        if site is None:
            return 1
        for s, f in self.fuel:
            if s == site:
                return f
        return 0

    def actor_by_identity(self, v: Variable) -> Optional[ActorState]:
        for a in self.actors:
            if a.identity == v:
                return a
        return None


def assign_sites(term: Term, counter: list[int]) -> Term:
    """Rebuild a clause term giving every replication node a stable site id."""
    if isinstance(term, Replication):
        body = assign_sites(term.body, counter)
        counter[0] += 1
        return Replication(body, site=counter[0])
    from .terms import children, with_children

    kids = children(term)
    if not kids:
        return term
    return with_children(term, tuple(assign_sites(k, counter) for k in kids))


def make_state(actors: list[ActorState], registry: AuthorizationRegistry,
               fuel: int = 3) -> ScenarioState:
    """Initial state: assigns replication sites, fuel, and zeroed clocks."""
    counter = [0]
    out_actors = []
    sites: list[int] = []
    for a in actors:
        clauses = []
        for c in a.clauses:
            before = counter[0]
            t = assign_sites(c.term, counter)
            sites.extend(range(before + 1, counter[0] + 1))
            clauses.append(Clause(t, vc=c.vc, tag=c.tag))
        out_actors.append(replace(a, clauses=tuple(clauses)))
    # placeholder clocks (length 1) become properly sized zero clocks
    clock_bearers = [i for i, a in enumerate(out_actors) if a.clock is not None]
    k = len(clock_bearers)
    for idx, i in enumerate(clock_bearers):
        a = out_actors[i]
        out_actors[i] = replace(a, clock=init_clock(k, a.identity, idx))
    return ScenarioState(
        actors=tuple(out_actors),
        registry=registry,
        fuel=tuple((s, fuel) for s in sorted(sites)),
    )


def clocked_actor(name: str, identity: Variable, clauses: list[Clause],
                  forwards: bool = True) -> ActorState:
    """An actor that participates in the vector-clock protocol. The clock is
    sized properly by make_state; the placeholder here only marks intent."""
    return ActorState(name, identity, tuple(clauses),
                      clock=init_clock(1, identity, 0), forwards=forwards)


def plain_actor(name: str, identity: Variable, clauses: list[Clause]) -> ActorState:
    return ActorState(name, identity, tuple(clauses), clock=None, forwards=False)


# --- redexes -----------------------------------------------------------------


@dataclass(frozen=True)
class Exposure:
    actor: int
    clause: int
    path: tuple[int, ...]
    head: Term
    sites: tuple[int, ...]  # replication sites traversed to reach the head


@dataclass(frozen=True)
class Redex:
    kind: str  # comm | mint | call
    key: str
    send: Optional[Exposure] = None
    recv: Optional[Exposure] = None
    loc: Optional[Exposure] = None


_exposure_cache: dict[int, tuple[Term, tuple]] = {}


def _exposures(term: Term):
    hit = _exposure_cache.get(id(term))
    if hit is not None and hit[0] is term:
        return hit[1]
    out: list[tuple[tuple[int, ...], Term, tuple[int, ...]]] = []

    def walk(t: Term, path: tuple[int, ...], sites: tuple[int, ...]):
        if isinstance(t, (Send, Receive, Restriction, Call)):
            out.append((path, t, sites))
        elif isinstance(t, (Parallel, Choice)):
            walk(t.left, path + (0,), sites)
            walk(t.right, path + (1,), sites)
        elif isinstance(t, Replication):
            site = t.site if t.site is not None else -1
            walk(t.body, path + (0,), sites + (site,))
        elif isinstance(t, Match):
            if t.lhs == t.rhs:
                walk(t.cont, path + (0,), sites)
        # Inaction, Hole, failed Match: stuck

    walk(term, (), ())
    result = tuple(out)
    _exposure_cache[id(term)] = (term, result)
    return result


def _paths_compatible(term: Term, p1: tuple[int, ...], p2: tuple[int, ...]) -> bool:
    """Two heads of one clause may fire together only if they diverge at a
    Parallel (never across the branches of a Choice)."""
    i = 0
    t = term
    while i < len(p1) and i < len(p2) and p1[i] == p2[i]:
        t = _child(t, p1[i])
        i += 1
    if i >= len(p1) or i >= len(p2):
        return False  # one head nested under the other: impossible anyway
    return isinstance(t, Parallel)


def _child(t: Term, i: int) -> Term:
    from .terms import children

    return children(t)[i]


def _channel_fireable(ch: ChannelId) -> bool:
    if not isinstance(ch.base, Name):
        return False
    if ch.endpoints:
        return all(isinstance(e, Variable) for e in ch.endpoints)
    return True


def _channels_unify(send_ch: ChannelId, recv_ch: ChannelId,
                    sender: Variable, receiver: Variable,
                    identities: frozenset[Variable]) -> bool:
    """Unifiable channels: same base name, agreeing annotations, and the
    direction constraint (only `from` sends, only `to` receives) for endpoint
    variables naming soup identities. Endpoint tags that name no actor
    (device sides like the tunnel's s/p) constrain by agreement only."""
    if not (_channel_fireable(send_ch) and _channel_fireable(recv_ch)):
        return False
    if send_ch.base != recv_ch.base:
        return False
    if send_ch.endpoints and recv_ch.endpoints and send_ch.endpoints != recv_ch.endpoints:
        return False
    eps = send_ch.endpoints or recv_ch.endpoints
    if eps:
        f, t = eps
        if f in identities and f != sender:
            return False
        if t in identities and t != receiver:
            return False
    return True


def _merged_channel(send_ch: ChannelId, recv_ch: ChannelId) -> ChannelId:
    return send_ch if send_ch.endpoints else recv_ch


def enabled_redexes(state: ScenarioState) -> list[Redex]:
    """All fireable redexes, deterministically ordered."""
    sends: list[Exposure] = []
    recvs: list[Exposure] = []
    singles: list[Redex] = []

    for ai, actor in enumerate(state.actors):
        for ci, clause in enumerate(actor.clauses):
            for path, head, sites in _exposures(clause.term):
                if any(state.fuel_of(s) <= 0 for s in sites):
                    continue
                exp = Exposure(ai, ci, path, head, sites)
                if isinstance(head, Send):
                    if _channel_fireable(head.channel):
                        sends.append(exp)
                elif isinstance(head, Receive):
                    if _channel_fireable(head.channel):
                        recvs.append(exp)
                elif isinstance(head, Restriction):
                    kindw = "chan" if head.name.kind == CHANNEL else "msg"
                    singles.append(Redex(
                        "mint", f"mint {kindw} {head.name.label} {actor.name}", loc=exp))
                elif isinstance(head, Call):
                    sym = head.fn.symbol
                    if sym == "IncEle" and actor.clock is not None and clause.vc:
                        singles.append(Redex("call", f"call IncEle {actor.name}", loc=exp))
                    elif sym == "Delete" and isinstance(head.fn.args[0], Name):
                        singles.append(Redex(
                            "call",
                            f"call Delete({head.fn.args[0].label}) {actor.name}", loc=exp))
                    # MaxVec heads (and unresolved Delete slots) are stuck.

    identities = frozenset(a.identity for a in state.actors)
    comms: list[Redex] = []
    for se in sends:
        s_actor = state.actors[se.actor]
        for re_ in recvs:
            r_actor = state.actors[re_.actor]
            head_s: Send = se.head
            head_r: Receive = re_.head
            if len(head_s.payload) != len(head_r.binders):
                continue
            if not _channels_unify(head_s.channel, head_r.channel,
                                   s_actor.identity, r_actor.identity, identities):
                continue
            if se.actor == re_.actor and se.clause == re_.clause:
                if se.path == re_.path:
                    continue
                if not _paths_compatible(s_actor.clauses[se.clause].term, se.path, re_.path):
                    continue
            ch = _merged_channel(head_s.channel, head_r.channel)
            key = f"comm {_chan_str(ch)} {s_actor.name}>{r_actor.name}"
            comms.append(Redex("comm", key, send=se, recv=re_))

    def order(r: Redex):
        rank = {"comm": 0, "mint": 1, "call": 2}[r.kind]
        prim = r.send or r.loc
        sec = r.recv or prim
        chan = ""
        if r.kind == "comm":
            chan = _chan_str(_merged_channel(r.send.head.channel, r.recv.head.channel))
        return (rank, prim.actor, chan, prim.clause, prim.path, sec.actor, sec.clause, sec.path)

    redexes = sorted(comms + singles, key=order)

    # Disambiguate duplicate keys so scripts and witnesses are exact.
    totals: dict[str, int] = {}
    for r in redexes:
        totals[r.key] = totals.get(r.key, 0) + 1
    seen: dict[str, int] = {}
    final: list[Redex] = []
    for r in redexes:
        if totals[r.key] > 1:
            n = seen.get(r.key, 0)
            seen[r.key] = n + 1
            final.append(replace(r, key=f"{r.key} #{n}"))
        else:
            final.append(r)
    return final


# --- firing ------------------------------------------------------------------


def _fire(term: Term, jobs: list[tuple[tuple[int, ...], Callable[[Term], Term]]]
          ) -> tuple[Term, list[int]]:
    """Rewrite all job positions in one pass. Replication nodes traversed by
    at least one job spawn a single copy and report their site; choices along
    the way commit; vacuous match guards are discharged (row 1)."""
    for path, fn in jobs:
        if not path:
            assert len(jobs) == 1
            return fn(term), []
    spent: list[int] = []
    if isinstance(term, (Parallel, Choice)):
        left_jobs = [(p[1:], f) for p, f in jobs if p[0] == 0]
        right_jobs = [(p[1:], f) for p, f in jobs if p[0] == 1]
        if isinstance(term, Choice):
            if left_jobs and right_jobs:
                raise StaleRedex("jobs straddle a choice")
            branch, sub = (term.left, left_jobs) if left_jobs else (term.right, right_jobs)
            new, spent = _fire(branch, sub)
            return new, spent
        left, right = term.left, term.right
        if left_jobs:
            left, s = _fire(left, left_jobs)
            spent += s
        if right_jobs:
            right, s = _fire(right, right_jobs)
            spent += s
        return Parallel(left, right), spent
    if isinstance(term, Replication):
        copy, spent = _fire(term.body, [(p[1:], f) for p, f in jobs])
        site = term.site if term.site is not None else -1
        return Parallel(copy, term), spent + [site]
    if isinstance(term, Match):
        if term.lhs != term.rhs:
            raise StaleRedex("match guard no longer passable")
        return _fire(term.cont, [(p[1:], f) for p, f in jobs])
    raise StaleRedex(f"no path through {type(term).__name__}")


def _validate(state: ScenarioState, exp: Exposure):
    actor = state.actors[exp.actor]
    try:
        head = subterm_at(actor.clauses[exp.clause].term, exp.path)
    except IndexError:
        raise StaleRedex("position no longer exists") from None
    if head is not exp.head and head != exp.head:
        raise StaleRedex("head changed since the redex was computed")
    for s in exp.sites:
        if state.fuel_of(s) <= 0:
            raise StaleRedex(f"replication site {s} out of fuel")


def _payload_kind(payload: tuple[Atom, ...], attach_clock: bool) -> str:
    if any(isinstance(a, Name) and a.kind == CHANNEL for a in payload):
        return "channel-name"
    if attach_clock:
        return "tuple"
    return "message"


def step(state: ScenarioState, redex: Redex) -> ScenarioState:
    """Fire one redex; returns the successor snapshot."""
    if redex.kind == "comm":
        return _step_comm(state, redex)
    if redex.kind == "mint":
        return _step_mint(state, redex)
    if redex.kind == "call":
        return _step_call(state, redex)
    raise StaleRedex(f"unknown redex kind {redex.kind!r}")


def _set_clause(a: ActorState, ci: int, term: Term) -> ActorState:
    old = a.clauses[ci]
    clauses = a.clauses[:ci] + (Clause(term, old.vc, old.tag),) + a.clauses[ci + 1:]
    return ActorState(a.name, a.identity, clauses, a.clock, a.forwards, a.store)


def _with_event(a: ActorState, clock, ev: Optional[EventRecord]) -> ActorState:
    store = a.store + (ev,) if ev is not None else a.store
    return ActorState(a.name, a.identity, a.clauses, clock, a.forwards, store)


def _with_store(a: ActorState, store: tuple[EventRecord, ...]) -> ActorState:
    return ActorState(a.name, a.identity, a.clauses, a.clock, a.forwards, store)


def _spend(state: ScenarioState, spent: list[int]) -> tuple[tuple[int, int], ...]:
    if not spent:
        return state.fuel
    fuel = list(state.fuel)
    for s in spent:
        for i, (site, f) in enumerate(fuel):
            if site == s:
                if f <= 0:
                    raise StaleRedex(f"replication site {s} out of fuel")
                fuel[i] = (site, f - 1)
                break
        else:
            raise StaleRedex(f"replication site {s} unknown")
    return tuple(fuel)


class _Emitter:
    def __init__(self, state: ScenarioState):
        self.seq = state.seq
        self.registry = state.registry
        self.events: list[EventRecord] = []

    def emit(self, **kw) -> EventRecord:
        e = EventRecord(seq=self.seq, **kw)
        self.seq += 1
        self.events.append(e)
        return e


def _clocked_action(em: _Emitter, actor: ActorState, clause: Clause,
                    merge_with: Optional[VectorClockList]) -> tuple[Optional[VectorClockList], Optional[VectorClockList]]:
    """Shared clock bookkeeping: returns (new actor clock, event snapshot)."""
    if not (clause.vc and actor.clock is not None):
        return actor.clock, None
    em.emit(actor=actor.identity, kind=INTERNAL, channel=None, payload_kind="vc-list",
            payload=(), clock=None, recorded_by_so=False, note="shuttle")
    clk = inc_ele(actor.clock, actor.clock.owner_index)
    if merge_with is not None:
        clk = max_vec(clk, merge_with)
    return clk, clk


def _recorded(actor: ActorState, clause: Clause, registry: AuthorizationRegistry,
              channel: Optional[ChannelId]) -> bool:
    return clause.vc and actor.forwards and registry.is_authorized(channel)


def _update_flags(state: ScenarioState, events: list[EventRecord],
                  removed_from_so: bool) -> frozenset[str]:
    flags = set(state.flags)
    auth = state.registry.authenticated
    by_comm: dict[int, list[EventRecord]] = {}
    for e in events:
        if e.comm >= 0:
            by_comm.setdefault(e.comm, []).append(e)
        if e.kind == CHANNEL_CREATED and e.payload_kind == "channel-name" \
                and e.actor in auth:
            flags.add("authz-hazard")
    for pair in by_comm.values():
        sender = next((e for e in pair if e.kind == SEND), None)
        receiver = next((e for e in pair if e.kind == RECEIVE), None)
        if sender is None or receiver is None:
            continue
        s_auth, r_auth = sender.actor in auth, receiver.actor in auth
        if not (sender.recorded_by_so and receiver.recorded_by_so) and (s_auth or r_auth):
            flags.add("unrecorded")
            flags.add("unplaceable")
        if sender.payload_kind in ("message", "tuple") and \
                ((not s_auth and r_auth) or (s_auth and not r_auth)):
            flags.add("auth-n")
        ch = sender.channel
        if ch is not None and isinstance(ch.base, Name) and ch.base.minted \
                and s_auth and r_auth and not state.registry.is_authorized(ch):
            flags.add("auth-z")
    if removed_from_so:
        flags.add("unplaceable")
    return frozenset(flags)


def _step_comm(state: ScenarioState, redex: Redex) -> ScenarioState:
    se, re_ = redex.send, redex.recv
    _validate(state, se)
    _validate(state, re_)
    s_actor = state.actors[se.actor]
    r_actor = state.actors[re_.actor]
    s_clause = s_actor.clauses[se.clause]
    r_clause = r_actor.clauses[re_.clause]
    head_s: Send = se.head
    head_r: Receive = re_.head
    payload = head_s.payload
    channel = _merged_channel(head_s.channel, head_r.channel)

    def send_transform(h: Term) -> Term:
        return h.cont

    def recv_transform(h: Term) -> Term:
        cont = h.cont
        for b, v in zip(h.binders, payload):
            cont = substitute(cont, b, v)
        return cont

    spent: list[int] = []
    new_actors = list(state.actors)
    if se.actor == re_.actor and se.clause == re_.clause:
        term, sp = _fire(s_clause.term, [(se.path, send_transform), (re_.path, recv_transform)])
        spent += sp
        new_actors[se.actor] = _set_clause(s_actor, se.clause, term)
    else:
        term_s, sp = _fire(s_clause.term, [(se.path, send_transform)])
        spent += sp
        term_r, sp = _fire(r_clause.term, [(re_.path, recv_transform)])
        spent += sp
        new_actors[se.actor] = _set_clause(new_actors[se.actor], se.clause, term_s)
        new_actors[re_.actor] = _set_clause(new_actors[re_.actor], re_.clause, term_r)

    em = _Emitter(state)
    comm_id = state.comms

    s_clock, s_snap = _clocked_action(em, s_actor, s_clause, None)
    attach = s_snap is not None
    pk = _payload_kind(payload, attach)
    send_ev = em.emit(actor=s_actor.identity, kind=SEND, channel=channel,
                      payload_kind=pk, payload=payload, clock=s_snap,
                      recorded_by_so=_recorded(s_actor, s_clause, state.registry, channel),
                      comm=comm_id)

    r_clock, r_snap = _clocked_action(em, r_actor, r_clause, s_snap)
    recv_ev = em.emit(actor=r_actor.identity, kind=RECEIVE, channel=channel,
                      payload_kind=pk, payload=payload, clock=r_snap,
                      recorded_by_so=_recorded(r_actor, r_clause, state.registry, channel),
                      comm=comm_id)

    new_actors[se.actor] = _with_event(new_actors[se.actor], s_clock, send_ev)
    new_actors[re_.actor] = _with_event(new_actors[re_.actor], r_clock, recv_ev)

    so_new = tuple(e for e in em.events if e.recorded_by_so)
    events = em.events
    return ScenarioState(
        actors=tuple(new_actors),
        registry=state.registry,
        fuel=_spend(state, spent),
        fresh=state.fresh,
        seq=em.seq,
        comms=comm_id + 1,
        so_log=state.so_log + so_new,
        full_trace=state.full_trace + tuple(events),
        flags=_update_flags(state, events, removed_from_so=False),
    )


def _step_mint(state: ScenarioState, redex: Redex) -> ScenarioState:
    exp = redex.loc
    _validate(state, exp)
    actor = state.actors[exp.actor]
    clause = actor.clauses[exp.clause]
    head: Restriction = exp.head
    ordinal = state.fresh + 1
    minted = Name(f"{head.name.label}~{ordinal}", head.name.kind, uid=-ordinal)

    def transform(h: Term) -> Term:
        return substitute(h.body, h.name, minted)

    term, spent = _fire(clause.term, [(exp.path, transform)])
    new_actors = list(state.actors)
    new_actors[exp.actor] = _set_clause(actor, exp.clause, term)

    em = _Emitter(state)
    chan = ChannelId(minted) if minted.kind == CHANNEL else None
    em.emit(actor=actor.identity, kind=CHANNEL_CREATED, channel=chan,
            payload_kind="channel-name" if minted.kind == CHANNEL else "message",
            payload=(minted,), clock=None, recorded_by_so=False)
    return ScenarioState(
        actors=tuple(new_actors),
        registry=state.registry,
        fuel=_spend(state, spent),
        fresh=ordinal,
        seq=em.seq,
        comms=state.comms,
        so_log=state.so_log,
        full_trace=state.full_trace + tuple(em.events),
        flags=_update_flags(state, em.events, removed_from_so=False),
    )


def _step_call(state: ScenarioState, redex: Redex) -> ScenarioState:
    exp = redex.loc
    _validate(state, exp)
    actor = state.actors[exp.actor]
    clause = actor.clauses[exp.clause]
    head: Call = exp.head
    term, spent = _fire(clause.term, [(exp.path, lambda h: h.cont)])
    new_actors = list(state.actors)
    new_actors[exp.actor] = _set_clause(actor, exp.clause, term)

    em = _Emitter(state)
    so_log = state.so_log
    removed_from_so = False

    if head.fn.symbol == "IncEle":
        clk, snap = _clocked_action(em, actor, clause, None)
        em.emit(actor=actor.identity, kind=INTERNAL, channel=None, payload_kind="vc-list",
                payload=(), clock=snap,
                recorded_by_so=_recorded(actor, clause, state.registry, None))
        new_actors[exp.actor] = _with_event(new_actors[exp.actor], clk, None)
        so_log = so_log + tuple(e for e in em.events if e.recorded_by_so)
    elif head.fn.symbol == "Delete":
        target = head.fn.args[0]
        if not isinstance(target, Name):
            raise StaleRedex("Delete argument is not a concrete name")

        def erases(e: EventRecord) -> bool:
            return e.kind in (SEND, RECEIVE) and target in e.payload

        kept_so = tuple(e for e in so_log if not erases(e))
        removed_from_so = len(kept_so) != len(so_log)
        so_log = kept_so
        for i, a in enumerate(new_actors):
            kept = tuple(e for e in a.store if not erases(e))
            if len(kept) != len(a.store):
                new_actors[i] = _with_store(a, kept)
        em.emit(actor=actor.identity, kind=DELETED, channel=None, payload_kind="message",
                payload=(target,), clock=None, recorded_by_so=False)
    else:
        raise StaleRedex(f"{head.fn.symbol} is not directly schedulable")

    return ScenarioState(
        actors=tuple(new_actors),
        registry=state.registry,
        fuel=_spend(state, spent),
        fresh=state.fresh,
        seq=em.seq,
        comms=state.comms,
        so_log=so_log,
        full_trace=state.full_trace + tuple(em.events),
        flags=_update_flags(state, em.events, removed_from_so=removed_from_so),
    )


# --- running -----------------------------------------------------------------


def run(state: ScenarioState, policy, max_steps: int) -> ScenarioState:
    """Repeatedly step per policy until no redex or the step bound.

    policy: ("first",) | ("random", seed) | ("script", [redex keys...])
    """
    if max_steps < 0:
        raise ValueError("maxSteps must be >= 0")
    mode = policy[0]
    rng = random.Random(policy[1]) if mode == "random" else None
    script = list(policy[1]) if mode == "script" else None
    cursor = 0
    for _ in range(max_steps):
        enabled = enabled_redexes(state)
        if not enabled:
            break
        if mode == "first":
            pick = enabled[0]
        elif mode == "random":
            pick = enabled[rng.randrange(len(enabled))]
        elif mode == "script":
            if cursor >= len(script):
                break
            want = script[cursor]
            cursor += 1
            matches = [r for r in enabled if r.key == want]
            if not matches:
                have = ", ".join(r.key for r in enabled)
                raise ScriptMismatch(f"script step {cursor} wants {want!r}; enabled: {have}")
            pick = matches[0]
        else:
            raise ValueError(f"unknown policy {mode!r}")
        state = step(state, pick)
    if mode == "script" and cursor < len(script):
        raise ScriptMismatch(f"script has {len(script) - cursor} unconsumed steps")
    return state


# --- clock discipline self-check ----------------------------------------------


def check_clock_discipline(state: ScenarioState) -> bool:
    """Every VC-bearing actor's own counter equals its count of snapshot-bearing
    events (the paper's Send/Receive/Internal all call IncEle exactly once)."""
    for a in state.actors:
        if a.clock is None:
            continue
        n = sum(1 for e in state.full_trace if e.actor == a.identity and e.clock is not None)
        if a.clock.counters[a.clock.owner_index] != n:
            return False
    return True


# --- canonical state keys (explorer dedup) ------------------------------------


_clause_key_cache: dict[int, tuple] = {}
_clauses_block_cache: dict[int, tuple] = {}


def _clause_key(term: Term) -> str:
    """Token string of the normalized clause term, memoized by term identity
    (terms are immutable and shared across snapshots)."""
    hit = _clause_key_cache.get(id(term))
    if hit is not None and hit[0] is term:
        return hit[1]
    from .congruence import normalize

    tok = _kernels.tokenize(canonical(normalize(term)))
    _clause_key_cache[id(term)] = (term, tok)
    return tok


def _clauses_block(clauses: tuple[Clause, ...]) -> str:
    """Sorted, concatenated clause tokens, memoized by the clauses tuple:
    only the actors touched by a step pay for re-assembly."""
    hit = _clauses_block_cache.get(id(clauses))
    if hit is not None and hit[0] is clauses:
        return hit[1]
    entries = sorted(("1" if c.vc else "0") + "\x1c" + _clause_key(c.term)
                     for c in clauses)
    block = "\x1d".join(entries)
    _clauses_block_cache[id(clauses)] = (clauses, block)
    return block


def state_key(state: ScenarioState) -> bytes:
    """Canonical dedup key: normalized soup + clocks + fuel + summary digest.

    Trace history is excluded (monotone target flags and per-actor counters
    stand in for it); minted names are renumbered by first occurrence across
    the assembled key so mint ordinals never distinguish states.
    """
    parts = []
    for a in state.actors:
        clock = a.clock.counters if a.clock is not None else None
        parts.append(f"{a.name}\x1c{a.identity.label}\x1c{clock!r}\x1c{len(a.store)}\x1c"
                     + _clauses_block(a.clauses))
    parts.append(f"{state.fuel!r}\x1c{state.seq}\x1c{len(state.so_log)}\x1c"
                 f"{sorted(state.flags)!r}")
    return _kernels.renumber("\x1f".join(parts))


def canonical_soup_terms(state: ScenarioState) -> list[Term]:
    """Per-actor terms with minted names renamed by the dedup key's
    first-occurrence order. Two states with equal keys yield pairwise
    congruent terms here; the explorer's soundness spot-check relies on it."""
    import re

    from .terms import Parallel, free_names

    joined = "\x1f".join(_clauses_block(a.clauses) for a in state.actors)
    order: list[int] = []
    for m in re.finditer("\x01(-?[0-9]+)\x02", joined):
        uid = int(m.group(1))
        if uid not in order:
            order.append(uid)
    by_uid = {}
    for a in state.actors:
        for c in a.clauses:
            for n in free_names(c.term):
                if n.uid < 0:
                    by_uid[n.uid] = n
    renames = []
    for k, uid in enumerate(order):
        old = by_uid.get(uid)
        if old is not None:
            renames.append((old, Name(f"mintc{k}", old.kind)))
    out = []
    for a in state.actors:
        if not a.clauses:
            out.append(None)
            continue
        term = a.clauses[0].term
        for c in a.clauses[1:]:
            term = Parallel(term, c.term)
        for old, new in renames:
            term = substitute(term, old, new)
        out.append(term)
    return out


# --- trace data for the auditor ------------------------------------------------


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    actor: str
    kind: str
    chan_base: Optional[str]
    chan_from: Optional[str]
    chan_to: Optional[str]
    base_minted: bool
    payload_kind: str
    payload: tuple[str, ...]
    clock: Optional[tuple[int, ...]]
    recorded: bool
    comm: int
    note: str = ""

    @property
    def channel_str(self) -> str:
        if self.chan_base is None:
            return "-"
        if self.chan_from:
            return f"{self.chan_base}[{self.chan_from}->{self.chan_to}]"
        return self.chan_base


@dataclass(frozen=True)
class TraceData:
    events: tuple[TraceEvent, ...]
    so_seqs: frozenset[int]
    authenticated: frozenset[str]
    authorized_keys: frozenset[tuple]


def _event_to_trace(e: EventRecord) -> TraceEvent:
    base = from_ = to = None
    minted = False
    if e.channel is not None:
        base = e.channel.base.label
        minted = isinstance(e.channel.base, Name) and e.channel.base.minted
        if e.channel.endpoints:
            from_ = e.channel.endpoints[0].label
            to = e.channel.endpoints[1].label
    return TraceEvent(
        seq=e.seq, actor=e.actor.label, kind=e.kind,
        chan_base=base, chan_from=from_, chan_to=to, base_minted=minted,
        payload_kind=e.payload_kind,
        payload=tuple(a.label for a in e.payload),
        clock=e.clock.counters if e.clock is not None else None,
        recorded=e.recorded_by_so, comm=e.comm, note=e.note,
    )


def to_trace_data(state: ScenarioState) -> TraceData:
    keys = set()
    for ch in state.registry.authorized:
        if ch.endpoints:
            keys.add((ch.base.label, ch.endpoints[0].label, ch.endpoints[1].label))
        else:
            keys.add((ch.base.label,))
    return TraceData(
        events=tuple(_event_to_trace(e) for e in state.full_trace),
        so_seqs=frozenset(e.seq for e in state.so_log),
        authenticated=frozenset(v.label for v in state.registry.authenticated),
        authorized_keys=frozenset(keys),
    )


def trace_text(state: ScenarioState) -> str:
    return "\n".join(event_line(e) for e in state.full_trace) + ("\n" if state.full_trace else "")


def _kv(pairs) -> str:
    return " ".join(f"{k}={v}" for k, v in pairs)


def trace_kv(state: ScenarioState) -> str:
    """Structured export consumed by the auditor and golden tests."""
    out = ["picsif-trace v1"]
    data = to_trace_data(state)
    for label in sorted(data.authenticated):
        out.append(f"auth actor={label}")
    for key in sorted(data.authorized_keys):
        out.append("auth channel=" + (key[0] if len(key) == 1 else f"{key[0]}[{key[1]}->{key[2]}]"))
    for e in data.events:
        clock = "-" if e.clock is None else "[" + ",".join(map(str, e.clock)) + "]"
        out.append(_kv([
            ("event", e.seq), ("actor", e.actor), ("kind", e.kind),
            ("channel", e.channel_str), ("minted", str(e.base_minted).lower()),
            ("payload_kind", e.payload_kind), ("payload", ",".join(e.payload) or "-"),
            ("clock", clock), ("so", str(e.seq in data.so_seqs).lower()),
            ("recorded", str(e.recorded).lower()), ("comm", e.comm),
            ("note", e.note or "-"),
        ]))
    return "\n".join(out) + "\n"


def parse_trace_kv(text: str) -> TraceData:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "picsif-trace v1":
        raise ValueError("not a picsif trace file (missing header)")
    authenticated = set()
    keys = set()
    events = []
    so_seqs = set()
    for ln in lines[1:]:
        if ln.startswith("auth actor="):
            authenticated.add(ln.split("=", 1)[1])
            continue
        if ln.startswith("auth channel="):
            ch = ln.split("=", 1)[1]
            if "[" in ch:
                base, rest = ch.split("[", 1)
                f, t = rest.rstrip("]").split("->")
                keys.add((base, f, t))
            else:
                keys.add((ch,))
            continue
        fields = dict(part.split("=", 1) for part in ln.split(" "))
        chan = fields["channel"]
        base = from_ = to = None
        if chan != "-":
            if "[" in chan:
                base, rest = chan.split("[", 1)
                from_, to = rest.rstrip("]").split("->")
            else:
                base = chan
        clock = None
        if fields["clock"] != "-":
            inner = fields["clock"].strip("[]")
            clock = tuple(int(x) for x in inner.split(",")) if inner else ()
        seq = int(fields["event"])
        if fields["so"] == "true":
            so_seqs.add(seq)
        events.append(TraceEvent(
            seq=seq, actor=fields["actor"], kind=fields["kind"],
            chan_base=base, chan_from=from_, chan_to=to,
            base_minted=fields["minted"] == "true",
            payload_kind=fields["payload_kind"],
            payload=tuple(fields["payload"].split(",")) if fields["payload"] != "-" else (),
            clock=clock, recorded=fields["recorded"] == "true",
            comm=int(fields["comm"]), note="" if fields["note"] == "-" else fields["note"],
        ))
    return TraceData(tuple(events), frozenset(so_seqs), frozenset(authenticated), frozenset(keys))
