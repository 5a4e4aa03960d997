import random

import pytest
from hypothesis import given, settings, strategies as st

from picsif.surface import ParseError, parse, parse_process, pretty, pretty_process
from picsif.terms import (
    INACTION,
    MESSAGE,
    ChannelId,
    Inaction,
    Name,
    Parallel,
    Receive,
    Replication,
    Restriction,
    Send,
    alpha_equivalent,
)
from picsif import scenarios

from conftest import identity_scope, random_term


def test_parse_journalist():
    # Receives on a, mints and transmits on b (keywords carry true direction).
    text = "rep { recv a<z> } | rep { new msg x { send b(x) } }"
    assert alpha_equivalent(parse_process(text), scenarios.build_journalist())


def test_empty_scenario_is_an_error():
    with pytest.raises(ParseError, match="empty scenario"):
        parse("")
    with pytest.raises(ParseError, match="empty scenario"):
        parse("# only a comment\n")


def test_pretty_inaction():
    assert pretty_process(INACTION) == "0"


def test_pretty_does_not_normalize():
    p = Send(ChannelId(Name("c", "channel")), (Name("m", MESSAGE),))
    assert pretty_process(Parallel(p, INACTION)) == "send c(m) | 0"


def test_pretty_signal_backend_two_replicated_clauses():
    text = pretty_process(scenarios.build_signal_backend())
    assert text.count("rep {") == 2
    assert " | " in text
    left, right = text.split(" | ", 1)
    assert left.startswith("rep {") and right.startswith("rep {")


def test_round_trip_fixpoint_on_bundled_scenario(signalgate):
    sf = parse(signalgate.scif, "signalgate.scif")
    text = pretty(sf)
    sf2 = parse(text, "signalgate.scif")
    assert pretty(sf2) == text
    for a, b in zip(sf.actors, sf2.actors):
        assert alpha_equivalent(a.term, b.term)


def test_diagnostic_format():
    with pytest.raises(ParseError) as e:
        parse("actor A as a { clause { send } }", "demo.scif")
    msg = str(e.value)
    assert msg.startswith("demo.scif:1:")
    assert "expected" in msg


def test_duplicate_actor():
    text = """
actor A as a { clause { 0 } }
actor A as a2 { clause { 0 } }
auth { actor a; }
"""
    with pytest.raises(ParseError, match="duplicate actor"):
        parse(text)


def test_unknown_function_symbol():
    with pytest.raises(ParseError, match="unknown function symbol"):
        parse("actor A as a { clause { call Frobnicate(x) } } auth { actor a; }")


def test_undeclared_channel():
    with pytest.raises(ParseError, match="neither authorized nor explicitly marked"):
        parse("actor A as a { clause { send c(m) } } auth { actor a; }")
    # declaring it unauthorized is enough
    sf = parse("actor A as a { clause { send c(m) } } "
               "auth { actor a; unauthorized channel c; }")
    assert len(sf.actors) == 1


def test_explore_block():
    sf = parse("actor A as a { clause { 0 } } auth { actor a; } "
               "explore { depth 7; fuel 2; }")
    assert sf.explore == (7, 2)


def test_spans_present():
    sf = parse("actor A as a {\n  clause { send c(m) { recv c<x> } }\n}\n"
               "auth { actor a; unauthorized channel c; }", "f.scif")
    term = sf.actors[0].clauses[0].term
    assert term.span is not None
    assert term.span.file == "f.scif"
    assert term.span.line == 2


def test_declarations_property():
    sf = parse("actor A as a { clause { 0 } clause { 0 } } auth { actor a; }")
    name, ident, term = sf.declarations[0]
    assert name == "A" and ident.label == "a"
    assert isinstance(term, Parallel)


def test_precedence():
    c = "unauthorized channel ca; unauthorized channel cb; unauthorized channel cd;"
    sf = parse("actor A as a { clause { send ca(m) | send cb(m) + send cd(m) } } "
               f"auth {{ actor a; {c} }}")
    term = sf.actors[0].clauses[0].term
    # prefix > | > +  : the whole clause is a Choice whose left is the Parallel
    from picsif.terms import Choice

    assert isinstance(term, Choice)
    assert isinstance(term.left, Parallel)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_round_trip_random_terms(seed):
    rng = random.Random(seed)
    t = random_term(rng, 6)
    assert alpha_equivalent(parse_process(pretty_process(t), scope=identity_scope()), t)


@settings(max_examples=150, deadline=None)
@given(st.text(max_size=80))
def test_parser_total(text):
    try:
        parse(text)
    except ParseError:
        pass  # a spanned diagnostic is the only acceptable failure


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_pretty_deterministic(seed):
    rng = random.Random(seed)
    t = random_term(rng, 5)
    assert pretty_process(t) == pretty_process(t)


def test_shadowed_binder_display():
    # Printer must rename a binder that shadows a free name it would capture.
    free_x = Name("x", MESSAGE)
    c = ChannelId(Name("c", "channel"))
    binder = Name("x", MESSAGE)
    t = Receive(c, (binder,), Send(c, (binder, free_x)))
    text = pretty_process(t)
    t2 = parse_process(text)
    assert alpha_equivalent(t, t2), text
