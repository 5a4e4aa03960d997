import pytest

from picsif.auditor import (
    NON_RECONSTRUCTABLE,
    UNAUTH_N,
    UNAUTH_Z,
    UNRECORDED,
    audit,
    check_auth_n,
    check_auth_z,
    check_completeness,
    check_reconstructable,
    enumerate_orders,
    render_verdict,
    render_verdict_kv,
)
from picsif.errors import EnumerationCapExceeded
from picsif.semantics import TraceData, enabled_redexes, run, step, to_trace_data
from picsif import scenarios


def _honest_trace(honest2, steps=30):
    return to_trace_data(run(honest2.state, ("first",), steps))


def _deletion_trace(signalgate):
    script = scenarios.deletion_script()
    return to_trace_data(run(signalgate.state, ("script", script), len(script)))


def test_honest_trace_accountable(honest2):
    data = _honest_trace(honest2)
    v = audit(data, cap=20)
    assert v.accountable
    assert v.summary == "accountable"


def test_empty_trace_accountable():
    data = TraceData((), frozenset(), frozenset({"so"}), frozenset())
    v = audit(data)
    assert v.accountable
    assert check_completeness(data) == []
    rec = check_reconstructable(data)
    assert rec.reconstructable


def test_auth_n_latent_capability_is_not_a_violation(signalgate):
    # fire only the tunnel; U never receives anything
    state = signalgate.state
    r = next(r for r in enabled_redexes(state) if r.key.startswith("comm h_jd"))
    data = to_trace_data(step(state, r))
    assert check_auth_n(data) == []


def test_auth_n_delivery_to_journalist(signalgate):
    state = signalgate.state
    for prefix in ("comm sigr[jd->sig]", "comm a[jd->u]"):
        r = next(r for r in enabled_redexes(state) if r.key.startswith(prefix))
        state = step(state, r)
    data = to_trace_data(state)
    viols = check_auth_n(data)
    assert len(viols) == 1
    assert "u" in viols[0].detail


def test_auth_z_mint_alone_is_a_witness(signalgate):
    state = signalgate.state
    r = next(r for r in enabled_redexes(state) if r.kind == "mint" and "un" in r.key)
    data = to_trace_data(step(state, r))
    viols = check_auth_z(data)
    assert len(viols) == 1
    assert "minted" in viols[0].detail


def test_auth_z_exchange_on_minted_channel(signalgate):
    data = _deletion_trace(signalgate)
    kinds = [v.detail for v in check_auth_z(data)]
    assert any("un~1" in d and "communicated" in d for d in kinds)


def test_completeness_flags_tunnel_and_un_events(signalgate):
    script = ["comm h_jd[p->s] JD>JD"] + scenarios.deletion_script()
    final = run(signalgate.state, ("script", script), len(script))
    data = to_trace_data(final)
    viols = check_completeness(data)
    details = " ".join(v.detail for v in viols)
    assert "h_jd" in details and "un~1" in details
    # one violation per unrecorded communication event involving the SCIF
    unrecorded = [e for e in data.events
                  if e.kind in ("send", "receive") and not e.recorded
                  and _involves(data, e)]
    assert len(viols) == len(unrecorded)
    # the fu hop is Signal-internal and must not be flagged
    assert "on fu " not in details and not details.endswith("on fu")


def _involves(data, e):
    if e.actor in data.authenticated:
        return True
    peers = [o for o in data.events if o.comm == e.comm and o.seq != e.seq]
    return any(o.actor in data.authenticated for o in peers)


def test_reconstructable_linear_exchange(honest2):
    # a1 -> a2 then a2 -> a1: the clock DAG is a chain with one topological order
    state = honest2.state

    def fire(state, prefix):
        r = next(r for r in enabled_redexes(state) if r.key.startswith(prefix))
        return step(state, r)

    state = fire(state, "mint msg sm Alice1")
    state = fire(state, "comm tr[alice1->alice2]")
    state = fire(state, "mint msg sm Alice2")
    state = fire(state, "comm tr[alice2->alice1]")
    data = to_trace_data(state)
    rec = check_reconstructable(data)
    assert rec.reconstructable
    assert len(enumerate_orders(data, limit=3)) == 1  # unique topological order


def test_non_reconstructable_after_delete(signalgate):
    data = _deletion_trace(signalgate)
    rec = check_reconstructable(data, cap=12)
    assert not rec.reconstructable
    a, b = rec.orders
    assert a != b
    assert sorted(a) == sorted(b)  # same events, different consistent orders


def test_enumeration_cap():
    events = _deletion_trace(scenarios.signalgate_scenario()).events
    data = _deletion_trace(scenarios.signalgate_scenario())
    with pytest.raises(EnumerationCapExceeded, match="smaller scenario"):
        check_reconstructable(data, cap=3)


def test_signalgate_trace_shows_all_four_kinds(signalgate):
    script = scenarios.deletion_script() + ["comm sigr[jd->sig] JD>S_b", "comm a[jd->u] JD>U"]
    final = run(signalgate.state, ("script", script), len(script))
    v = audit(to_trace_data(final), cap=20)
    assert v.kinds() == {UNAUTH_N, UNAUTH_Z, UNRECORDED, NON_RECONSTRUCTABLE}
    assert v.summary == "both"
    assert not v.accountable


def test_witnesses_reference_real_events(signalgate):
    data = _deletion_trace(signalgate)
    v = audit(data, cap=20)
    seqs = {e.seq for e in data.events}
    for viol in v.violations:
        assert set(viol.witness_seqs) <= seqs
        if viol.orders:
            for order in viol.orders:
                assert set(order) <= seqs


def test_render_formats(signalgate):
    v = audit(_deletion_trace(signalgate), cap=20)
    text = render_verdict(v)
    assert text.startswith("verdict both")
    kv = render_verdict_kv(v)
    assert kv.startswith("picsif-verdict v1")
    assert "summary=both" in kv
