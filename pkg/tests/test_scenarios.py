from picsif.congruence import congruent, normalize
from picsif.surface import parse, parse_process, pretty, pretty_process
from picsif.terms import (
    Call,
    Parallel,
    Receive,
    Replication,
    Restriction,
    Send,
    alpha_equivalent,
    free_names,
    iter_subterms,
)
from picsif import scenarios
from picsif.data import scenario_path


def _components(t):
    if isinstance(t, Parallel):
        return _components(t.left) + _components(t.right)
    return [t]


def test_so_is_five_processes():
    so = scenarios.build_so()
    assert len(_components(normalize(so))) == 5
    labels = {n.label for n in free_names(so)}
    assert {"cm", "cc", "cs", "cr"} <= labels
    assert "cuc" not in labels


def test_alice_has_one_more_process_than_so():
    alice = scenarios.build_alice()
    assert len(_components(normalize(alice))) == len(_components(normalize(scenarios.build_so()))) + 1
    assert "cuc" in {n.label for n in free_names(alice)}


def test_alice_send_is_polyadic():
    # the send toward the peer carries (sm, VC)
    alice = scenarios.build_alice()
    sends = [s for _, s in iter_subterms(alice)
             if isinstance(s, Send) and s.channel.base.label == "tr"
             and s.channel.endpoints and s.channel.endpoints[1].label == "mu"]
    assert sends and all(len(s.payload) == 2 for s in sends)
    assert any(s.payload[0].label == "sm" for s in sends)


def test_alice_self_congruent():
    assert congruent(scenarios.build_alice(), scenarios.build_alice())


def test_adversary_is_alice_plus_bridge():
    jd = scenarios.build_adversary(scenarios.JD)
    assert isinstance(jd, Parallel)
    a_part, b_part = jd.left, jd.right
    assert congruent(a_part, scenarios._alice_shape(scenarios.JD))
    assert len(_components(b_part)) == 4  # b1, b2, and the phone pair
    assert not congruent(normalize(jd), normalize(scenarios.build_alice()))


def test_bridge_has_no_forward():
    b = scenarios._bridge(scenarios.JD)
    labels = {n.label for n in free_names(b)}
    assert "h" in labels
    assert "cuc" not in labels  # tunnel traffic is never forwarded to the SO


def test_journalist_two_replicated_components():
    u = scenarios.build_journalist()
    comps = _components(u)
    assert len(comps) == 2
    assert all(isinstance(c, Replication) for c in comps)


def test_signal_delete_two_delete_calls():
    sd = scenarios.build_signal_delete()
    deletes = [s for _, s in iter_subterms(sd)
               if isinstance(s, Call) and s.fn.symbol == "Delete"]
    assert len(deletes) == 2


def test_no_clock_for_outsiders():
    for t in (scenarios.build_journalist(), scenarios.build_signal_backend(),
              scenarios.build_signal_delete()):
        vc_binders = [s for _, s in iter_subterms(t)
                      if isinstance(s, Restriction) and s.name.label.startswith("VC")]
        assert vc_binders == []


def test_signalgate_soup(signalgate):
    assert [a.name for a in signalgate.state.actors] == \
        ["SO", "Alice", "JD", "H", "U", "S_b", "S_d"]
    assert signalgate.expected_verdict == "both"


def test_registry_excludes_journalist_and_un(signalgate):
    reg = signalgate.registry
    assert scenarios.U_ID not in reg.authenticated
    labels = {ch.base.label for ch in reg.authorized}
    assert labels == {"tr"}
    for bad in ("un", "a", "h_jd", "h_hg", "sigr", "sigs", "fu", "fd"):
        assert bad not in labels


def test_honest_scenario_shape(honest2):
    assert [a.name for a in honest2.state.actors] == ["SO", "Alice1", "Alice2"]
    assert honest2.expected_verdict == "accountable"


def test_symbol_audit():
    """Every symbol of the published equations appears in a bundled term or
    the registry."""
    symbols = set()
    for t in (scenarios.build_so(), scenarios.build_alice(),
              scenarios.build_adversary(scenarios.JD),
              scenarios.build_adversary(scenarios.HG),
              scenarios.build_journalist(), scenarios.build_signal_backend(),
              scenarios.build_signal_delete()):
        symbols |= scenarios.collect_symbols(t)
    for proof in (scenarios.authz_insertion_proof(), scenarios.authn_insertion_proof()):
        symbols |= scenarios.collect_symbols(proof.end)
    bundle = scenarios.signalgate_scenario()
    symbols |= {v.label for v in bundle.registry.authenticated}
    for a in bundle.state.actors:
        for c in a.clauses:
            symbols |= scenarios.collect_symbols(c.term)
    expected = {
        "VC_init", "VC_a", "VC_m", "VC_o", "VC_s", "VC_r", "VC_u",
        "cm", "cc", "cs", "cr", "cuc", "tr", "sm", "m", "um", "ue",
        "h", "un", "nrms", "nrmr", "a", "b", "z", "x",
        "sigr", "sigs", "fu", "cn", "r", "i", "mu", "s", "p",
        "sig", "u", "jd",
    }
    missing = expected - symbols
    assert not missing, f"missing: {sorted(missing)}"


def test_every_bundled_term_round_trips(signalgate):
    terms = [scenarios.build_so(), scenarios.build_alice(),
             scenarios.build_adversary(scenarios.JD), scenarios.build_journalist(),
             scenarios.build_signal_backend(), scenarios.build_signal_delete()]
    for a in signalgate.state.actors:
        for c in a.clauses:
            terms.append(c.term)
    # identities come from the actor declarations when a whole file is parsed
    scope = {a.identity.label: a.identity for a in signalgate.state.actors}
    for t in terms:
        assert alpha_equivalent(parse_process(pretty_process(t), scope=scope), t)


def test_scif_files_byte_identical_to_builders():
    for name, bundle in scenarios.bundles().items():
        shipped = scenario_path(name).read_text(encoding="utf-8")
        assert shipped == bundle.scif, f"{name}.scif drifted from its builder"
    shipped = scenario_path("paper-actors").read_text(encoding="utf-8")
    assert shipped == pretty(scenarios.paper_actors_file())


def test_scif_files_parse_and_validate():
    for name in ("signalgate", "honest2", "honest3", "paper-actors"):
        sf = parse(scenario_path(name).read_text(encoding="utf-8"), f"{name}.scif")
        assert sf.actors


def test_un_channel_not_predeclared(signalgate):
    # the unauthorized declarations cover the static channels; un only exists
    # after Signal mints it
    text = signalgate.scif
    auth_block = text[text.index("auth {"):]
    assert "un" not in [ln.split()[-1].rstrip(";").split("[")[0]
                        for ln in auth_block.splitlines() if "channel" in ln]
