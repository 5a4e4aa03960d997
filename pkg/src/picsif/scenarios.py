"""Bundled actors and configurations.

Two layers live here:

* literal transcriptions of the published actor models (build_so, build_alice,
  build_adversary, build_journalist, build_signal_backend, build_signal_delete)
  used by the congruence machinery, the symbol audit, and the printable
  exhibit; and

* executable scenario bundles (signalgate_scenario, honest_scenario) whose
  actors are compiled clause soups: clock machinery runs as engine bookkeeping,
  phone-side clauses are app-tagged, and the adversaries carry the Signal-app
  clauses obtained by the context-hole construction replayed in
  authz_insertion_proof().
"""

from __future__ import annotations

from dataclasses import dataclass

from .congruence import CongruenceProof, RewriteStep
from .semantics import (
    ActorState,
    AuthorizationRegistry,
    Clause,
    ScenarioState,
    make_state,
)
from .surface import ActorDecl, ClauseDecl, ScenarioFile, pretty
from .terms import (
    CHANNEL,
    MESSAGE,
    Call,
    ChannelId,
    Choice,
    FunctionCall,
    Match,
    Name,
    Parallel,
    Receive,
    Replication,
    Restriction,
    Send,
    Term,
    Variable,
    free_names,
    iter_subterms,
)

# Identities.
SO_ID = Variable("so")
ALICE = Variable("alice")
JD = Variable("jd")
HG = Variable("h")
U_ID = Variable("u")
SIG = Variable("sig")
GENERIC_I = Variable("i")
GENERIC_MU = Variable("mu")
SCIF_O = Variable("SCIF_O")
DEV_S = Variable("s")
DEV_P = Variable("p")
GENERIC_Z = Variable("z")
GENERIC_R = Variable("r")
GENERIC_J = Variable("j")

# Shared free names for the literal paper terms (one Name per label, so two
# builder calls produce congruent terms).
_free: dict[str, Name] = {}


def _chan(label: str) -> Name:
    n = _free.get(label)
    if n is None:
        n = Name(label, CHANNEL)
        _free[label] = n
    return n


def _msg(label: str) -> Name:
    n = _free.get(label)
    if n is None:
        n = Name(label, MESSAGE)
        _free[label] = n
    return n


def _rep(t: Term) -> Term:
    return Replication(t)


def _par(*parts: Term) -> Term:
    out = parts[0]
    for p in parts[1:]:
        out = Parallel(out, p)
    return out


def _choice(*parts: Term) -> Term:
    out = parts[0]
    for p in parts[1:]:
        out = Choice(out, p)
    return out


def _inc(vc: Name, who: Variable, cont: Term) -> Term:
    return Call(FunctionCall("IncEle", (vc, who)), cont)


def _maxv(l: Name, r: Name, cont: Term) -> Term:
    return Call(FunctionCall("MaxVec", (l, r)), cont)


# --- literal actor models ------------------------------------------------------


def _vc_processes(who: Variable, polyadic: bool, with_cuc: bool):
    """The five clock processes: initialization, internal event, memory,
    send, receive. `polyadic` adds the secret message to send/receive;
    `with_cuc` threads memory updates to the forward-to-SO channel."""
    cm, cc, cs, cr = _chan("cm"), _chan("cc"), _chan("cs"), _chan("cr")
    vc_init = Name("VC_init", MESSAGE)
    vc_a = Name("VC_a", MESSAGE)
    vc_m = Name("VC_m", MESSAGE)
    vc_o = Name("VC_o", MESSAGE)
    vc_s = Name("VC_s", MESSAGE)
    vc_r = Name("VC_r", MESSAGE)

    p1 = Restriction(vc_init, Send(ChannelId(cm), (vc_init,)))
    p2 = _rep(Receive(ChannelId(cc), (vc_a,), _inc(vc_a, who, Send(ChannelId(cm), (vc_a,)))))
    fanout = _choice(Send(ChannelId(cc), (vc_m,)), Send(ChannelId(cs), (vc_m,)),
                     Send(ChannelId(cr), (vc_m,)))
    if with_cuc:
        p3 = _rep(Receive(ChannelId(cm), (vc_m,), Send(ChannelId(_chan("cuc")), (vc_m,), fanout)))
    else:
        p3 = _rep(Receive(ChannelId(cm), (vc_m,), fanout))

    tr = _chan("tr")
    out_ch = ChannelId(tr, (who, GENERIC_MU))
    in_ch = ChannelId(tr, (GENERIC_MU, who))
    if polyadic:
        sm = Name("sm", MESSAGE)
        m = Name("m", MESSAGE)
        p4 = _rep(Receive(ChannelId(cs), (vc_o,), Restriction(
            sm, _inc(vc_o, who, _par(Send(ChannelId(cm), (vc_o,)), Send(out_ch, (sm, vc_o)))))))
        p5 = _rep(Receive(in_ch, (m, vc_r), Receive(
            ChannelId(cr), (vc_s,), _inc(vc_s, who, _maxv(vc_r, vc_s, Send(ChannelId(cm), (vc_s,)))))))
    else:
        p4 = _rep(Receive(ChannelId(cs), (vc_o,),
                          _inc(vc_o, who, _par(Send(ChannelId(cm), (vc_o,)), Send(out_ch, (vc_o,))))))
        p5 = _rep(Receive(in_ch, (vc_r,), Receive(
            ChannelId(cr), (vc_s,), _inc(vc_s, who, _maxv(vc_r, vc_s, Send(ChannelId(cm), (vc_s,)))))))
    return p1, p2, p3, p4, p5


def build_so() -> Term:
    """The SCIF operator: the five-process vector clock, nothing more."""
    return _par(*_vc_processes(GENERIC_I, polyadic=False, with_cuc=False))


def _alice_shape(who: Variable) -> Term:
    p1, p2, p3, p4, p5 = _vc_processes(who, polyadic=True, with_cuc=True)
    vc_u = Name("VC_u", MESSAGE)
    forward = _rep(Receive(ChannelId(_chan("cuc")), (vc_u,),
                           Send(ChannelId(_chan("tr"), (who, SCIF_O)), (vc_u,))))
    return _par(p1, p2, p3, p4, p5, forward)


def build_alice() -> Term:
    """The honest actor: the clock processes plus the forward-to-SO process."""
    return _alice_shape(GENERIC_I)


def _bridge(who: Variable) -> Term:
    """The three tunnel processes bridging the SCIF-cleared computer and the
    personal Signal app: a clocked send out, a clocked receive in, and the
    phone-side pair which never touches the clock."""
    h = _chan("h")
    cm, cs, cr = _chan("cm"), _chan("cs"), _chan("cr")
    out_ch = ChannelId(h, (DEV_S, DEV_P))
    in_ch = ChannelId(h, (DEV_P, DEV_S))
    vc_o = Name("VC_o", MESSAGE)
    vc_s = Name("VC_s", MESSAGE)
    m = Name("m", MESSAGE)
    sm = Name("sm", MESSAGE)
    b1 = _rep(Receive(ChannelId(cs), (vc_o,), Restriction(
        m, _inc(vc_o, who, _par(Send(ChannelId(cm), (vc_o,)), Send(out_ch, (m,)))))))
    b2 = _rep(Receive(in_ch, (sm,), Receive(ChannelId(cr), (vc_s,), _inc(
        vc_s, who, _maxv(_msg("VC_r"), vc_s, Send(ChannelId(cm), (vc_s,)))))))
    b3 = _par(_rep(Receive(out_ch, (Name("um", MESSAGE),))),
              _rep(Send(in_ch, (_msg("ue"),))))
    return _par(b1, b2, b3)


def build_adversary(identity: Variable) -> Term:
    """An adversary is an honest actor plus the bridge: JD = A | B."""
    return Parallel(_alice_shape(identity), _bridge(identity))


def build_journalist() -> Term:
    """Receives on a, mints and transmits on b; no clock, outside the SCIF."""
    z = Name("z", MESSAGE)
    x = Name("x", MESSAGE)
    return _par(_rep(Receive(ChannelId(_chan("a")), (z,))),
                _rep(Restriction(x, Send(ChannelId(_chan("b")), (x,)))))


def build_signal_backend() -> Term:
    """Recipient discovery: take (cn, r) in on sigr, hand it through fu, then
    deliver cn to the recipient on sigs."""
    cn1, r1 = Name("cn", MESSAGE), Name("r", MESSAGE)
    cn2, r2 = Name("cn", MESSAGE), Name("r", MESSAGE)
    fu = _chan("fu")
    c1 = _rep(Receive(ChannelId(_chan("sigr"), (GENERIC_I, SIG)), (cn1, r1),
                      Send(ChannelId(fu), (cn1, r1))))
    c2 = _rep(Receive(ChannelId(fu), (cn2, r2),
                      Send(ChannelId(_chan("sigs"), (SIG, r2)), (cn2,))))
    return Parallel(c1, c2)


def build_signal_delete() -> Term:
    """The deletion mechanism, as published: each direction of the unrecorded
    exchange ends in a Delete that erases the record."""
    un = _chan("un")
    nrms = Name("nrms", MESSAGE)
    nrmr = _msg("nrmr")
    left = Receive(ChannelId(un, (GENERIC_Z, HG)), (nrms,),
                   Call(FunctionCall("Delete", (nrms,))))
    right = Send(ChannelId(un, (HG, GENERIC_Z)), (nrmr,),
                 Call(FunctionCall("Delete", (nrmr,))))
    return Parallel(left, right)


def collect_symbols(t: Term) -> set[str]:
    """Every name and variable label appearing anywhere in the term."""
    out: set[str] = set()

    def atom(a):
        out.add(a.label)

    for _, s in iter_subterms(t):
        if isinstance(s, (Send, Receive)):
            atom(s.channel.base)
            if s.channel.endpoints:
                atom(s.channel.endpoints[0])
                atom(s.channel.endpoints[1])
            for a in (s.payload if isinstance(s, Send) else s.binders):
                atom(a)
        elif isinstance(s, Restriction):
            atom(s.name)
        elif isinstance(s, Match):
            atom(s.lhs)
            atom(s.rhs)
        elif isinstance(s, Call):
            for a in s.fn.args:
                atom(a)
    return out


# --- the context-hole construction (the auth-z / auth-n proofs) -----------------


def _phone_fragment() -> Term:
    """Line 3 of the bridge: the phone-side pair, the proof's starting term."""
    h = _chan("h")
    return _par(_rep(Receive(ChannelId(h, (DEV_S, DEV_P)), (Name("um", MESSAGE),))),
                _rep(Send(ChannelId(h, (DEV_P, DEV_S)), (_msg("ue"),))))


def authz_insertion_proof() -> CongruenceProof:
    """Rows 7 and 9 expand the phone fragment with a fresh restriction, the
    inaction becomes a context hole, and the Signal request send is inserted:
    the secured process is congruent to one that mints an unrecorded channel."""
    start = _phone_fragment()
    un = Name("un", CHANNEL)
    request = Send(ChannelId(_chan("sigr"), (GENERIC_I, SIG)), (un, _msg("z")))
    steps = (
        RewriteStep(7, (), "rtl"),
        RewriteStep(9, (1,), "rtl", name=un),
    )
    end = Parallel(start, Restriction(un, request))
    return CongruenceProof(start=start, steps=steps, end=end, insertion=((1, 0), request))


def authn_insertion_proof() -> CongruenceProof:
    """Same construction; the inserted request names the journalist's channel
    and identity instead of a fresh channel."""
    start = _phone_fragment()
    un = Name("un", CHANNEL)
    request = Send(ChannelId(_chan("sigr"), (GENERIC_I, SIG)), (_chan("a"), U_ID))
    steps = (
        RewriteStep(7, (), "rtl"),
        RewriteStep(9, (1,), "rtl", name=un),
    )
    end = Parallel(start, Restriction(un, request))
    return CongruenceProof(start=start, steps=steps, end=end, insertion=((1, 0), request))


# --- executable bundles ---------------------------------------------------------


@dataclass(frozen=True)
class ScenarioBundle:
    name: str
    state: ScenarioState
    registry: AuthorizationRegistry
    expected_verdict: str  # accountable | auth-z-violated | auth-n-violated | both
    scif: str  # canonical surface text, byte-identical to the shipped file
    depth: int = 12
    fuel: int = 3


def _honest_clauses(who: Variable, send_to: Variable, recv_from: Variable,
                    tr: Name) -> list[Clause]:
    vc_ref = _msg(f"VC_{who.label}")
    sm = Name("sm", MESSAGE)
    m = Name("m", MESSAGE)
    return [
        Clause(_rep(Call(FunctionCall("IncEle", (vc_ref, who)))), vc=True, tag="internal"),
        Clause(_rep(Restriction(sm, Send(ChannelId(tr, (who, send_to)), (sm,)))),
               vc=True, tag="send"),
        Clause(_rep(Receive(ChannelId(tr, (recv_from, who)), (m,))), vc=True, tag="recv"),
    ]


def _tunnel_clauses(who: Variable, h: Name) -> list[Clause]:
    out_ch = ChannelId(h, (DEV_S, DEV_P))
    in_ch = ChannelId(h, (DEV_P, DEV_S))
    m = Name("m", MESSAGE)
    sm = Name("sm", MESSAGE)
    um = Name("um", MESSAGE)
    return [
        Clause(_rep(Restriction(m, Send(out_ch, (m,)))), vc=True, tag="tunnel-out"),
        Clause(_rep(Receive(in_ch, (sm,))), vc=True, tag="tunnel-in"),
        Clause(_rep(Receive(out_ch, (um,))), vc=False, tag="phone-recv"),
        Clause(_rep(Send(in_ch, (_msg("ue"),))), vc=False, tag="phone-send"),
    ]


def _jd_app_clauses() -> list[Clause]:
    """JD's Signal-app processes, as obtained by the hole insertion: request a
    fresh channel to H, use it, then report the message for deletion; and the
    journalist request followed by the leak."""
    sigr = _chan("sigr")
    fd = _chan("fd")
    un = Name("un", CHANNEL)
    y = Name("y", MESSAGE)
    nrms = _msg("nrms")
    authz = Restriction(un, Send(
        ChannelId(sigr, (JD, SIG)), (un, HG), Send(
            ChannelId(un, (JD, HG)), (nrms,), Receive(
                ChannelId(un, (HG, JD)), (y,), Send(
                    ChannelId(fd, (JD, SIG)), (nrms,))))))
    authn = Send(ChannelId(sigr, (JD, SIG)), (_chan("a"), U_ID),
                 Send(ChannelId(_chan("a"), (JD, U_ID)), (nrms,)))
    return [
        Clause(authz, vc=False, tag="app-authz"),
        Clause(authn, vc=False, tag="app-authn"),
    ]


def _h_app_clauses() -> list[Clause]:
    """H's Signal app: accept the delivered channel name, reply on it, report
    the reply for deletion."""
    cn = Name("cn", CHANNEL)
    x = Name("x", MESSAGE)
    nrmr = _msg("nrmr")
    term = Receive(ChannelId(_chan("sigs"), (SIG, HG)), (cn,), Receive(
        ChannelId(cn, (JD, HG)), (x,), Send(
            ChannelId(cn, (HG, JD)), (nrmr,), Send(
                ChannelId(_chan("fd"), (HG, SIG)), (nrmr,)))))
    return [Clause(term, vc=False, tag="app-recv")]


def _signal_backend_clauses() -> list[Clause]:
    cn1, r1 = Name("cn", MESSAGE), Name("r", MESSAGE)
    cn2, r2 = Name("cn", MESSAGE), Name("r", MESSAGE)
    fu = _chan("fu")
    return [
        Clause(_rep(Receive(ChannelId(_chan("sigr")), (cn1, r1),
                            Send(ChannelId(fu), (cn1, r1)))), vc=False, tag="backend-in"),
        Clause(_rep(Receive(ChannelId(fu), (cn2, r2),
                            Send(ChannelId(_chan("sigs"), (SIG, r2)), (cn2,)))),
               vc=False, tag="backend-out"),
    ]


def _signal_delete_clauses() -> list[Clause]:
    dm1 = Name("dm", MESSAGE)
    dm2 = Name("dm", MESSAGE)
    fd = _chan("fd")
    return [
        Clause(_rep(Receive(ChannelId(fd, (JD, SIG)), (dm1,),
                            Call(FunctionCall("Delete", (dm1,))))), vc=False, tag="delete-jd"),
        Clause(_rep(Receive(ChannelId(fd, (HG, SIG)), (dm2,),
                            Call(FunctionCall("Delete", (dm2,))))), vc=False, tag="delete-h"),
    ]


def _journalist_clauses() -> list[Clause]:
    z = Name("z", MESSAGE)
    x = Name("x", MESSAGE)
    return [
        Clause(_rep(Receive(ChannelId(_chan("a")), (z,))), vc=False, tag="inbox"),
        Clause(_rep(Restriction(x, Send(ChannelId(_chan("b")), (x,)))), vc=False, tag="publish"),
    ]


def _clocked(name: str, identity: Variable, clauses: list[Clause]) -> ActorState:
    from .vclock import init_clock

    return ActorState(name, identity, tuple(clauses),
                      clock=init_clock(1, identity, 0), forwards=True)


def _plain(name: str, identity: Variable, clauses: list[Clause]) -> ActorState:
    return ActorState(name, identity, tuple(clauses))


def _to_scenario_file(name: str, actors: list[ActorState],
                      registry: AuthorizationRegistry,
                      unauthorized: list[ChannelId],
                      depth: int, fuel: int) -> ScenarioFile:
    decls = []
    for a in actors:
        decls.append(ActorDecl(
            a.name, a.identity,
            [ClauseDecl(c.term, app=not c.vc) for c in a.clauses],
            has_clock=a.clock is not None, forwards=a.forwards))
    return ScenarioFile(
        path=f"<{name}>", actors=decls,
        authenticated=tuple(sorted(registry.authenticated, key=lambda v: v.label)),
        authorized=registry.authorized,
        unauthorized=tuple(unauthorized),
        explore=(depth, fuel),
    )


def signalgate_scenario(fuel: int = 3) -> ScenarioBundle:
    """The full configuration: SO, Alice, both adversaries, the journalist,
    and Signal's backend and deletion daemon."""
    tr = _chan("tr")
    h_jd = _chan("h_jd")
    h_hg = _chan("h_hg")
    actors = [
        ActorState("SO", SO_ID, ()),
        _clocked("Alice", ALICE, _honest_clauses(ALICE, JD, HG, tr)),
        _clocked("JD", JD, _honest_clauses(JD, HG, ALICE, tr)
                 + _tunnel_clauses(JD, h_jd) + _jd_app_clauses()),
        _clocked("H", HG, _honest_clauses(HG, ALICE, JD, tr)
                 + _tunnel_clauses(HG, h_hg) + _h_app_clauses()),
        _plain("U", U_ID, _journalist_clauses()),
        _plain("S_b", SIG, _signal_backend_clauses()),
        _plain("S_d", SIG, _signal_delete_clauses()),
    ]
    registry = AuthorizationRegistry(
        authenticated=frozenset({SO_ID, ALICE, JD, HG}),
        authorized=(
            ChannelId(tr, (ALICE, JD)),
            ChannelId(tr, (JD, HG)),
            ChannelId(tr, (HG, ALICE)),
        ),
    )
    unauthorized = [
        ChannelId(h_jd, (DEV_S, DEV_P)), ChannelId(h_jd, (DEV_P, DEV_S)),
        ChannelId(h_hg, (DEV_S, DEV_P)), ChannelId(h_hg, (DEV_P, DEV_S)),
        ChannelId(_chan("a")), ChannelId(_chan("b")),
        ChannelId(_chan("sigr")), ChannelId(_chan("sigs")),
        ChannelId(_chan("fu")), ChannelId(_chan("fd")),
    ]
    state = make_state(actors, registry, fuel=fuel)
    scif = pretty(_to_scenario_file("signalgate", actors, registry, unauthorized, 12, fuel))
    return ScenarioBundle("signalgate", state, registry, "both", scif, depth=12, fuel=fuel)


def honest_scenario(n: int, fuel: int = 3) -> ScenarioBundle:
    """Control configuration: the SO plus n honest actors in a send ring."""
    if n < 1:
        raise ValueError("need at least one honest actor")
    tr = _chan("tr")
    ids = [ALICE if n == 1 else Variable(f"alice{i + 1}") for i in range(n)]
    actors = [ActorState("SO", SO_ID, ())]
    for i, v in enumerate(ids):
        send_to = ids[(i + 1) % n]
        recv_from = ids[(i - 1) % n]
        actors.append(_clocked(f"Alice{i + 1}" if n > 1 else "Alice", v,
                               _honest_clauses(v, send_to, recv_from, tr)))
    authorized = tuple(ChannelId(tr, (ids[i], ids[(i + 1) % n])) for i in range(n))
    registry = AuthorizationRegistry(
        authenticated=frozenset([SO_ID] + ids),
        authorized=authorized,
    )
    state = make_state(actors[:], registry, fuel=fuel)
    name = f"honest{n}"
    scif = pretty(_to_scenario_file(name, actors, registry, [], 10, fuel))
    return ScenarioBundle(name, state, registry, "accountable", scif, depth=10, fuel=fuel)


def paper_actors_file() -> ScenarioFile:
    """The literal published actor terms as one printable scenario exhibit."""
    actors = [
        ActorDecl("SO", SO_ID, [ClauseDecl(build_so())], has_clock=True),
        ActorDecl("Alice", ALICE, [ClauseDecl(build_alice())], has_clock=True, forwards=True),
        ActorDecl("JD", JD, [ClauseDecl(build_adversary(JD))], has_clock=True, forwards=True),
        ActorDecl("H", HG, [ClauseDecl(build_adversary(HG))], has_clock=True, forwards=True),
        ActorDecl("U", U_ID, [ClauseDecl(build_journalist())]),
        ActorDecl("S_b", SIG, [ClauseDecl(build_signal_backend())]),
        ActorDecl("S_d", SIG, [ClauseDecl(build_signal_delete())]),
    ]
    channels = sorted({n.label for a in actors for n in free_names(a.term)
                       if n.kind == CHANNEL})
    unauthorized = tuple(ChannelId(_chan(lbl)) for lbl in channels)
    return ScenarioFile(
        path="<paper-actors>", actors=actors,
        authenticated=(SO_ID, ALICE, JD, HG),
        authorized=(), unauthorized=unauthorized, explore=None,
    )


def bundles() -> dict[str, ScenarioBundle]:
    return {
        "signalgate": signalgate_scenario(),
        "honest2": honest_scenario(2),
        "honest3": honest_scenario(3),
    }


# --- the acceptance-3 deletion script -------------------------------------------


def _comm_pred(base: str, sender: str, receiver: str):
    def pred(r):
        if r.kind != "comm":
            return False
        head = r.send.head
        return (head.channel.base.label.split("~")[0] == base
                and r.key.split(" ")[2] == f"{sender}>{receiver}")

    return pred


def deletion_script() -> list[str]:
    """Redex keys for the scripted run: mint the channel through Signal,
    exchange two messages between JD and H on it, and have the deletion
    daemon erase both. Keys are derived by driving the engine, so they stay
    exact under the deterministic redex ordering."""
    from .semantics import enabled_redexes, step

    plan = [
        lambda r: r.kind == "mint" and r.key.startswith("mint chan un"),
        _comm_pred("sigr", "JD", "S_b"),
        _comm_pred("fu", "S_b", "S_b"),
        _comm_pred("sigs", "S_b", "H"),
        _comm_pred("un", "JD", "H"),
        _comm_pred("un", "H", "JD"),
        _comm_pred("fd", "JD", "S_d"),
        lambda r: r.kind == "call" and "Delete(nrms)" in r.key,
        _comm_pred("fd", "H", "S_d"),
        lambda r: r.kind == "call" and "Delete(nrmr)" in r.key,
    ]
    state = signalgate_scenario().state
    keys = []
    for pred in plan:
        pick = next(r for r in enabled_redexes(state) if pred(r))
        keys.append(pick.key)
        state = step(state, pick)
    return keys
