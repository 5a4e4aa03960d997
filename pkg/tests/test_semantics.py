import pytest

from picsif.errors import ScriptMismatch, StaleRedex
from picsif.semantics import (
    ActorState,
    AuthorizationRegistry,
    Clause,
    check_clock_discipline,
    enabled_redexes,
    make_state,
    parse_trace_kv,
    run,
    state_key,
    step,
    to_trace_data,
    trace_kv,
    trace_text,
)
from picsif.terms import (
    CHANNEL,
    MESSAGE,
    ChannelId,
    Choice,
    Name,
    Receive,
    Replication,
    Restriction,
    Send,
    Variable,
)
from picsif.vclock import init_clock
from picsif import scenarios


def _registry(*channels):
    return AuthorizationRegistry(frozenset({Variable("a1"), Variable("a2")}), tuple(channels))


def _mini(clauses_by_actor, registry=None, fuel=3):
    actors = []
    for name, ident, clauses, clocked in clauses_by_actor:
        clock = init_clock(1, ident, 0) if clocked else None
        actors.append(ActorState(name, ident, tuple(clauses), clock=clock, forwards=clocked))
    return make_state(actors, registry or _registry(), fuel=fuel)


def _pick(state, prefix):
    for r in enabled_redexes(state):
        if r.key.startswith(prefix):
            return r
    raise AssertionError(f"no redex {prefix!r} in " + "; ".join(r.key for r in enabled_redexes(state)))


def test_tunnel_pair_is_a_redex():
    h = Name("h", CHANNEL)
    m = Name("m", MESSAGE)
    x = Name("x", MESSAGE)
    jd = Variable("jd")
    state = _mini([
        ("JD", jd, [Clause(Send(ChannelId(h), (m,)), vc=True),
                    Clause(Receive(ChannelId(h), (x,)), vc=False)], True),
    ])
    redexes = enabled_redexes(state)
    assert any(r.kind == "comm" and r.key.startswith("comm h ") for r in redexes)


def test_empty_soup_has_no_redexes():
    state = _mini([("A", Variable("a1"), [], False)])
    assert enabled_redexes(state) == []


def test_signalgate_initial_contains_sigr_request(signalgate):
    keys = [r.key for r in enabled_redexes(signalgate.state)]
    assert any(k.startswith("comm sigr[jd->sig]") for k in keys)


def test_arity_mismatch_never_fires():
    c = Name("c", CHANNEL)
    m = Name("m", MESSAGE)
    x = Name("x", MESSAGE)
    y = Name("y", MESSAGE)
    state = _mini([
        ("A", Variable("a1"), [Clause(Send(ChannelId(c), (m,)))], False),
        ("B", Variable("a2"), [Clause(Receive(ChannelId(c), (x, y)))], False),
    ])
    assert all(r.kind != "comm" for r in enabled_redexes(state))


def test_direction_constraints():
    c = Name("c", CHANNEL)
    m = Name("m", MESSAGE)
    x = Name("x", MESSAGE)
    a1, a2 = Variable("a1"), Variable("a2")
    # directed a1->a2: only a1 may send, only a2 may receive
    state = _mini([
        ("A", a1, [Clause(Receive(ChannelId(c, (a1, a2)), (x,)))], False),
        ("B", a2, [Clause(Send(ChannelId(c, (a1, a2)), (m,)))], False),
    ])
    assert all(r.kind != "comm" for r in enabled_redexes(state))  # both on the wrong end


def test_clock_worked_example(honest2):
    """Send increments the sender's index; receive increments then merges."""
    state = honest2.state
    state = step(state, _pick(state, "call IncEle Alice2"))
    state = step(state, _pick(state, "mint msg sm Alice1"))
    state = step(state, _pick(state, "comm tr[alice1->alice2]"))
    a1 = state.actor_by_identity(Variable("alice1"))
    a2 = state.actor_by_identity(Variable("alice2"))
    assert a1.clock.counters == (1, 0)
    assert a2.clock.counters == (1, 2)
    assert check_clock_discipline(state)


def test_honest_first_policy_all_recorded(honest2):
    final = run(honest2.state, ("first",), 50)
    comm_events = [e for e in final.full_trace if e.kind in ("send", "receive")]
    assert comm_events, "expected some communications"
    assert all(e.recorded_by_so for e in comm_events)
    assert check_clock_discipline(final)


def test_phone_side_events_unrecorded_and_clockless(signalgate):
    state = signalgate.state
    state = step(state, _pick(state, "comm h_jd[p->s]"))
    send_ev = next(e for e in state.full_trace if e.kind == "send")
    recv_ev = next(e for e in state.full_trace if e.kind == "receive")
    # phone-side send: no clock, unrecorded; SCIF-side receive: clocked but
    # the tunnel is unauthorized, so the SO never sees it either
    assert send_ev.clock is None and not send_ev.recorded_by_so
    assert recv_ev.clock is not None and not recv_ev.recorded_by_so
    assert check_clock_discipline(state)


def test_delete_erases_stores_but_not_ground_truth(signalgate):
    script = scenarios.deletion_script()
    final = run(signalgate.state, ("script", script), len(script))
    nrms_events = [e for e in final.full_trace
                   if any(a.label == "nrms" for a in e.payload) and e.kind == "send"]
    assert nrms_events, "ground truth keeps the deleted message"
    assert [e.kind for e in final.full_trace].count("deleted") == 2
    assert not any(e.recorded_by_so for e in final.full_trace if e.kind == "deleted")
    for actor in final.actors:
        for e in actor.store:
            assert all(a.label not in ("nrms", "nrmr") for a in e.payload)
    assert len(final.so_log) == 0


def test_run_deterministic(signalgate):
    t1 = trace_kv(run(signalgate.state, ("random", 7), 30))
    t2 = trace_kv(run(signalgate.state, ("random", 7), 30))
    assert t1 == t2
    t3 = trace_kv(run(signalgate.state, ("random", 8), 30))
    assert t3 != t1  # different seed explores a different interleaving


def test_fuel_bounds_replication():
    c = Name("c", CHANNEL)
    m = Name("m", MESSAGE)
    x = Name("x", MESSAGE)
    state = _mini([
        ("A", Variable("a1"), [Clause(Replication(Send(ChannelId(c), (m,))))], False),
        ("B", Variable("a2"), [Clause(Replication(Receive(ChannelId(c), (x,))))], False),
    ], fuel=2)
    final = run(state, ("first",), 100)
    comms = [e for e in final.full_trace if e.kind == "send"]
    assert len(comms) == 2  # each site unfolds at most twice
    assert enabled_redexes(final) == []


def test_choice_commits():
    c = Name("c", CHANNEL)
    d = Name("d", CHANNEL)
    m = Name("m", MESSAGE)
    x = Name("x", MESSAGE)
    state = _mini([
        ("A", Variable("a1"), [Clause(Choice(Send(ChannelId(c), (m,)),
                                              Send(ChannelId(d), (m,))))], False),
        ("B", Variable("a2"), [Clause(Receive(ChannelId(c), (x,)))], False),
        ("C", Variable("a2"), [Clause(Receive(ChannelId(d), (x,)))], False),
    ])
    assert len([r for r in enabled_redexes(state) if r.kind == "comm"]) == 2
    state = step(state, _pick(state, "comm c"))
    # the d-branch was discarded with the commitment
    assert all(not r.key.startswith("comm d") for r in enabled_redexes(state))


def test_mint_gets_fresh_names_per_unfold():
    c = Name("c", CHANNEL)
    sm = Name("sm", MESSAGE)
    x = Name("x", MESSAGE)
    state = _mini([
        ("A", Variable("a1"), [Clause(Replication(Restriction(sm, Send(ChannelId(c), (sm,)))))], False),
        ("B", Variable("a2"), [Clause(Replication(Receive(ChannelId(c), (x,))))], False),
    ], fuel=3)
    state = step(state, _pick(state, "mint msg sm"))
    state = step(state, _pick(state, "mint msg sm"))
    minted = [e.payload[0] for e in state.full_trace if e.kind == "channel-created"]
    assert len(minted) == 2 and minted[0] != minted[1]
    assert minted[0].label != minted[1].label


def test_stale_redex_rejected(honest2):
    state = honest2.state
    r = _pick(state, "mint msg sm Alice1")
    state2 = step(state, r)
    with pytest.raises(StaleRedex):
        step(state2, r)  # that exposure was consumed by the first firing


def test_script_mismatch(honest2):
    with pytest.raises(ScriptMismatch, match="script step 1 wants"):
        run(honest2.state, ("script", ["comm nothing X>Y"]), 5)


def test_trace_kv_round_trip(signalgate):
    final = run(signalgate.state, ("script", scenarios.deletion_script()), 10)
    data = to_trace_data(final)
    parsed = parse_trace_kv(trace_kv(final))
    assert parsed == data


def test_state_key_merges_mint_ordinals(honest2):
    # alice1 then alice2 minting vs alice2 then alice1 reach key-equal states
    s = honest2.state
    p1 = step(step(s, _pick(s, "mint msg sm Alice1")), _pick(s, "mint msg sm Alice2"))
    # recompute the second pick against the intermediate state
    s1 = step(s, _pick(s, "mint msg sm Alice1"))
    p1 = step(s1, _pick(s1, "mint msg sm Alice2"))
    s2 = step(s, _pick(s, "mint msg sm Alice2"))
    p2 = step(s2, _pick(s2, "mint msg sm Alice1"))
    assert state_key(p1) == state_key(p2)


def test_trace_text_format(honest2):
    final = run(honest2.state, ("first",), 4)
    lines = trace_text(final).splitlines()
    assert lines
    parts = lines[-1].split(" ")
    assert len(parts) == 7
    int(parts[0])  # seq
    assert parts[6] in ("true", "false")