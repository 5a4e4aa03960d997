"""Shared fixtures: a seeded random term generator used by the law tests and
the acceptance suite.

One module-level intern table keeps free-name labels bijective with names,
which the label-keyed alpha comparison relies on.
"""

from __future__ import annotations

import random

import pytest

from picsif.terms import (
    CHANNEL,
    INACTION,
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
    Variable,
)

_FREE_CHANNELS = [Name(lbl, CHANNEL) for lbl in ("ca", "cb", "cc2", "cd")]
_FREE_MESSAGES = [Name(lbl, MESSAGE) for lbl in ("ma", "mb", "mc", "md")]
_IDENTITIES = [Variable(lbl) for lbl in ("p1", "p2", "p3")]
_BINDER_LABELS = ["x", "y", "w", "v2", "k"]


def random_channel(rng: random.Random, scope: list[Name]) -> ChannelId:
    bases = _FREE_CHANNELS + [n for n in scope if n.kind == CHANNEL]
    base = rng.choice(bases)
    if rng.random() < 0.3:
        f, t = rng.sample(_IDENTITIES, 2)
        return ChannelId(base, (f, t))
    return ChannelId(base)


def random_atom(rng: random.Random, scope: list[Name]):
    pool = _FREE_MESSAGES + scope
    return rng.choice(pool)


def random_term(rng: random.Random, depth: int, scope: list[Name] | None = None):
    """A random process of syntactic depth <= depth."""
    if scope is None:
        scope = []
    if depth <= 0 or rng.random() < 0.15:
        return INACTION
    kind = rng.choice(
        ["send", "send", "recv", "recv", "new", "par", "par", "sum", "rep", "match", "call"]
    )
    if kind == "send":
        arity = rng.choice((1, 1, 2))
        payload = tuple(random_atom(rng, scope) for _ in range(arity))
        return Send(random_channel(rng, scope), payload, random_term(rng, depth - 1, scope))
    if kind == "recv":
        arity = rng.choice((1, 1, 2))
        binders = tuple(Name(rng.choice(_BINDER_LABELS), MESSAGE) for _ in range(arity))
        return Receive(random_channel(rng, scope), binders,
                       random_term(rng, depth - 1, scope + list(binders)))
    if kind == "new":
        n = Name(rng.choice(_BINDER_LABELS), rng.choice((CHANNEL, MESSAGE)))
        return Restriction(n, random_term(rng, depth - 1, scope + [n]))
    if kind == "par":
        return Parallel(random_term(rng, depth - 1, scope), random_term(rng, depth - 1, scope))
    if kind == "sum":
        return Choice(random_term(rng, depth - 1, scope), random_term(rng, depth - 1, scope))
    if kind == "rep":
        return Replication(random_term(rng, depth - 1, scope))
    if kind == "match":
        a = random_atom(rng, scope)
        b = a if rng.random() < 0.5 else random_atom(rng, scope)
        return Match(a, b, random_term(rng, depth - 1, scope))
    fn = rng.choice([
        FunctionCall("IncEle", (random_atom(rng, scope), rng.choice(_IDENTITIES))),
        FunctionCall("MaxVec", (random_atom(rng, scope), random_atom(rng, scope))),
        FunctionCall("Delete", (random_atom(rng, scope),)),
    ])
    return Call(fn, random_term(rng, depth - 1, scope))


def terms_stream(seed: int, count: int, depth: int = 6):
    rng = random.Random(seed)
    return [random_term(rng, depth) for _ in range(count)]


def identity_scope() -> dict:
    """The generator's ambient identities; bare-process round-trips need them
    (scenario files carry the same information in their actor declarations)."""
    return {v.label: v for v in _IDENTITIES}


@pytest.fixture(scope="session")
def signalgate():
    from picsif import scenarios

    return scenarios.signalgate_scenario()


@pytest.fixture(scope="session")
def honest2():
    from picsif import scenarios

    return scenarios.honest_scenario(2)
