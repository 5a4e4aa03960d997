import random

from hypothesis import given, settings, strategies as st

from picsif.terms import (
    CHANNEL,
    INACTION,
    MESSAGE,
    ChannelId,
    Name,
    Parallel,
    Receive,
    Restriction,
    Send,
    alpha_equivalent,
    free_names,
    substitute,
)
from picsif import scenarios

from conftest import random_term


def ch(n):
    return ChannelId(n)


def test_substitute_free_occurrence():
    c = Name("c", CHANNEL)
    z = Name("z", MESSAGE)
    m = Name("m", MESSAGE)
    assert substitute(Send(ch(c), (z,)), z, m) == Send(ch(c), (m,))


def test_substitute_bound_untouched():
    c = Name("c", CHANNEL)
    z = Name("z", MESSAGE)
    m = Name("m", MESSAGE)
    t = Restriction(z, Send(ch(c), (z,)))
    assert substitute(t, z, m) == t


def test_substitute_mixed_free_and_bound():
    # One free occurrence replaced; the receive-bound z untouched.
    c, d, e = (Name(lbl, CHANNEL) for lbl in "cde")
    z = Name("z", MESSAGE)
    zb = Name("z", MESSAGE)  # distinct bound name with the same label
    m = Name("m", MESSAGE)
    t = Parallel(Send(ch(c), (z,)), Receive(ch(d), (zb,), Send(ch(e), (zb,))))
    got = substitute(t, z, m)
    assert got == Parallel(Send(ch(c), (m,)), Receive(ch(d), (zb,), Send(ch(e), (zb,))))


def test_substitute_avoids_capture():
    # Substituting a name equal to a binder forces an internal alpha-rename.
    c = Name("c", CHANNEL)
    d = Name("d", CHANNEL)
    x = Name("x", MESSAGE)
    v = Name("v", MESSAGE)
    t = Receive(ch(c), (v,), Send(ch(d), (x, v)))
    got = substitute(t, x, v)
    assert isinstance(got, Receive)
    binder = got.binders[0]
    assert binder != v  # renamed
    assert got.cont == Send(ch(d), (v, binder))


def test_free_names_examples():
    z = Name("z", CHANNEL)
    m = Name("m", MESSAGE)
    assert free_names(INACTION) == frozenset()
    assert free_names(Restriction(z, Send(ch(z), (m,)))) == {m}


def test_free_names_journalist_matches_model():
    labels = {n.label for n in free_names(scenarios.build_journalist())}
    assert labels == {"a", "b"}


def test_alpha_bound_rename():
    m = Name("m", MESSAGE)
    n = Name("n", MESSAGE)
    z = Name("z", CHANNEL)
    w = Name("w", CHANNEL)
    assert alpha_equivalent(Restriction(z, Send(ch(z), (m,))),
                            Restriction(w, Send(ch(w), (m,))))
    assert not alpha_equivalent(Restriction(z, Send(ch(z), (m,))),
                                Restriction(w, Send(ch(w), (n,))))


def _rename_bound(t):
    """Consistently rename every binder (oracle input for alpha tests)."""
    from picsif.terms import Call, Choice, Match, Replication, fresh_like

    if isinstance(t, Restriction):
        n2 = fresh_like(t.name)
        return Restriction(n2, _rename_bound(substitute(t.body, t.name, n2)))
    if isinstance(t, Receive):
        cont = t.cont
        new_binders = []
        for b in t.binders:
            b2 = fresh_like(b)
            cont = substitute(cont, b, b2)
            new_binders.append(b2)
        return Receive(t.channel, tuple(new_binders), _rename_bound(cont))
    if isinstance(t, Send):
        return Send(t.channel, t.payload, _rename_bound(t.cont))
    if isinstance(t, (Parallel, Choice)):
        return type(t)(_rename_bound(t.left), _rename_bound(t.right))
    if isinstance(t, Replication):
        return Replication(_rename_bound(t.body))
    if isinstance(t, Match):
        return Match(t.lhs, t.rhs, _rename_bound(t.cont))
    if isinstance(t, Call):
        return Call(t.fn, _rename_bound(t.cont))
    return t


def test_alpha_alice_under_bound_rename():
    alice = scenarios.build_alice()
    assert alpha_equivalent(alice, _rename_bound(alice))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_substitute_identity_outside_free_names(seed):
    rng = random.Random(seed)
    t = random_term(rng, 5)
    ghost = Name("ghost", MESSAGE)
    assert ghost not in free_names(t)
    assert substitute(t, ghost, Name("other", MESSAGE)) == t


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_substitute_free_name_bound(seed):
    rng = random.Random(seed)
    t = random_term(rng, 5)
    m = Name("fresh_m", MESSAGE)
    for x in list(free_names(t))[:3]:
        got = free_names(substitute(t, x, m))
        assert got <= (free_names(t) - {x}) | {m}


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_alpha_is_equivalence(seed):
    rng = random.Random(seed)
    p = random_term(rng, 5)
    q = random_term(rng, 5)
    r = _rename_bound(p)
    assert alpha_equivalent(p, p)
    assert alpha_equivalent(p, r) and alpha_equivalent(r, p)
    if alpha_equivalent(p, q) and alpha_equivalent(q, r):
        assert alpha_equivalent(p, r)
