"""Abstract syntax of the applied pi-calculus fragment.

Direction is stored explicitly in the Send/Receive variants; no part of the
engine ever infers it from bracket notation. Names are identified by a
freshness uid: two names are the same name iff their uids are equal, so
runtime minting can never collide with source-level names (minted names get
negative uids).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import ArityError, UnknownFunctionSymbol

CHANNEL = "channel"
MESSAGE = "message"

_uids = itertools.count(1)


def _next_uid() -> int:
    return next(_uids)


@dataclass(frozen=True)
class Name:
    """A channel or message name. Identity is the uid, not the label."""

    label: str = field(compare=False)
    kind: str = field(default=MESSAGE, compare=False)
    uid: int = field(default_factory=_next_uid)

    def __post_init__(self):
        if not self.label:
            raise ValueError("empty name label")
        if self.kind not in (CHANNEL, MESSAGE):
            raise ValueError(f"bad name kind {self.kind!r}")

    @property
    def minted(self) -> bool:
        return self.uid < 0

    def __repr__(self):
        return f"Name({self.label!r}, {self.kind}, {self.uid})"


@dataclass(frozen=True)
class Variable:
    """An actor's immutable identity. Never substituted by communication."""

    label: str

    def __repr__(self):
        return f"Variable({self.label!r})"


Atom = Union[Name, Variable]


@dataclass(frozen=True)
class ChannelId:
    """A channel, optionally directed: only `from` sends, only `to` receives.

    The base may transiently be a receive-bound slot awaiting substitution;
    a channel whose base is still a Variable can never synchronize.
    """

    base: Atom
    endpoints: Optional[tuple[Atom, Atom]] = None

    def directed(self) -> bool:
        return self.endpoints is not None

    def __repr__(self):
        if self.endpoints:
            f, t = self.endpoints
            return f"ChannelId({_atom_label(self.base)}[{_atom_label(f)}->{_atom_label(t)}])"
        return f"ChannelId({_atom_label(self.base)})"


def _atom_label(a: Atom) -> str:
    return a.label


FUNCTION_ARITY = {"IncEle": 2, "MaxVec": 2, "Delete": 1}


@dataclass(frozen=True)
class FunctionCall:
    symbol: str
    args: tuple[Atom, ...]

    def __post_init__(self):
        if self.symbol not in FUNCTION_ARITY:
            raise UnknownFunctionSymbol(f"unknown function symbol {self.symbol!r}")
        if len(self.args) != FUNCTION_ARITY[self.symbol]:
            raise ArityError(
                f"{self.symbol} takes {FUNCTION_ARITY[self.symbol]} arguments, got {len(self.args)}"
            )


# --- process terms -----------------------------------------------------------
#
# Every node carries an optional source span (set by the parser, ignored by
# equality) so diagnostics and congruence errors can point at source text.


@dataclass(frozen=True)
class Inaction:
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Receive:
    channel: ChannelId
    binders: tuple[Name, ...]
    cont: "Term" = field(default_factory=lambda: INACTION)
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Send:
    channel: ChannelId
    payload: tuple[Atom, ...]
    cont: "Term" = field(default_factory=lambda: INACTION)
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Restriction:
    name: Name
    body: "Term" = field(default_factory=lambda: INACTION)
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Parallel:
    left: "Term"
    right: "Term"
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Choice:
    left: "Term"
    right: "Term"
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Replication:
    body: "Term"
    site: Optional[int] = field(default=None, compare=False)
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Match:
    lhs: Atom
    rhs: Atom
    cont: "Term" = field(default_factory=lambda: INACTION)
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    fn: FunctionCall
    cont: "Term" = field(default_factory=lambda: INACTION)
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Hole:
    span: object = field(default=None, compare=False, repr=False)


Term = Union[Inaction, Receive, Send, Restriction, Parallel, Choice, Replication, Match, Call, Hole]

INACTION = Inaction()
HOLE = Hole()


# --- structural helpers ------------------------------------------------------
#
# Child index convention (used by RewriteStep paths): Parallel/Choice have
# children 0 (left) and 1 (right); Restriction/Replication have child 0
# (body); Send/Receive/Match/Call have child 0 (continuation).


def children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, (Parallel, Choice)):
        return (t.left, t.right)
    if isinstance(t, Restriction):
        return (t.body,)
    if isinstance(t, Replication):
        return (t.body,)
    if isinstance(t, (Send, Receive, Match, Call)):
        return (t.cont,)
    return ()


def with_children(t: Term, new: tuple[Term, ...]) -> Term:
    if isinstance(t, Parallel):
        return Parallel(new[0], new[1], span=t.span)
    if isinstance(t, Choice):
        return Choice(new[0], new[1], span=t.span)
    if isinstance(t, Restriction):
        return Restriction(t.name, new[0], span=t.span)
    if isinstance(t, Replication):
        return Replication(new[0], site=t.site, span=t.span)
    if isinstance(t, Send):
        return Send(t.channel, t.payload, new[0], span=t.span)
    if isinstance(t, Receive):
        return Receive(t.channel, t.binders, new[0], span=t.span)
    if isinstance(t, Match):
        return Match(t.lhs, t.rhs, new[0], span=t.span)
    if isinstance(t, Call):
        return Call(t.fn, new[0], span=t.span)
    return t


def subterm_at(t: Term, path: tuple[int, ...]) -> Term:
    for i in path:
        kids = children(t)
        if i >= len(kids):
            raise IndexError(f"path component {i} out of range for {type(t).__name__}")
        t = kids[i]
    return t


def replace_at(t: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    kids = list(children(t))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return with_children(t, tuple(kids))


def iter_subterms(t: Term):
    """Yield (path, subterm) in preorder."""
    stack = [((), t)]
    while stack:
        path, s = stack.pop()
        yield path, s
        for i, c in reversed(list(enumerate(children(s)))):
            stack.append((path + (i,), c))


# --- free names --------------------------------------------------------------

_fn_cache: dict[int, tuple[Term, frozenset]] = {}


def _chan_names(ch: ChannelId):
    out = []
    if isinstance(ch.base, Name):
        out.append(ch.base)
    if ch.endpoints:
        for e in ch.endpoints:
            if isinstance(e, Name):
                out.append(e)
    return out


def free_names(t: Term) -> frozenset[Name]:
    """Names not bound by any enclosing Restriction or Receive binder."""
    hit = _fn_cache.get(id(t))
    if hit is not None and hit[0] is t:
        return hit[1]
    if isinstance(t, Inaction) or isinstance(t, Hole):
        result = frozenset()
    elif isinstance(t, Send):
        atoms = _chan_names(t.channel) + [a for a in t.payload if isinstance(a, Name)]
        result = frozenset(atoms) | free_names(t.cont)
    elif isinstance(t, Receive):
        result = frozenset(_chan_names(t.channel)) | (free_names(t.cont) - frozenset(t.binders))
    elif isinstance(t, Restriction):
        result = free_names(t.body) - {t.name}
    elif isinstance(t, (Parallel, Choice)):
        result = free_names(t.left) | free_names(t.right)
    elif isinstance(t, Replication):
        result = free_names(t.body)
    elif isinstance(t, Match):
        atoms = [a for a in (t.lhs, t.rhs) if isinstance(a, Name)]
        result = frozenset(atoms) | free_names(t.cont)
    elif isinstance(t, Call):
        result = frozenset(a for a in t.fn.args if isinstance(a, Name)) | free_names(t.cont)
    else:
        raise TypeError(f"not a process term: {t!r}")
    _fn_cache[id(t)] = (t, result)
    return result


# --- substitution ------------------------------------------------------------


def fresh_like(n: Name) -> Name:
    return Name(n.label, n.kind)


def substitute(t: Term, replace: Name, value: Atom) -> Term:
    """Capture-avoiding substitution of `value` for free occurrences of `replace`.

    Bound occurrences are untouched; binders that would capture `value` are
    alpha-renamed internally, never reported as an error.
    """
    if replace not in free_names(t):
        return t

    def sub_atom(a: Atom) -> Atom:
        return value if (isinstance(a, Name) and a == replace) else a

    def sub_chan(ch: ChannelId) -> ChannelId:
        eps = ch.endpoints
        if eps is not None:
            eps = (sub_atom(eps[0]), sub_atom(eps[1]))
        return ChannelId(sub_atom(ch.base), eps)

    if isinstance(t, Send):
        return Send(sub_chan(t.channel), tuple(sub_atom(a) for a in t.payload),
                    substitute(t.cont, replace, value), span=t.span)
    if isinstance(t, Receive):
        binders = t.binders
        cont = t.cont
        if replace in binders:
            return Receive(sub_chan(t.channel), binders, cont, span=t.span)
        if isinstance(value, Name) and value in binders:
            renamed = []
            for b in binders:
                if b == value:
                    b2 = fresh_like(b)
                    cont = substitute(cont, b, b2)
                    renamed.append(b2)
                else:
                    renamed.append(b)
            binders = tuple(renamed)
        return Receive(sub_chan(t.channel), binders, substitute(cont, replace, value), span=t.span)
    if isinstance(t, Restriction):
        name, body = t.name, t.body
        if name == replace:
            return t
        if isinstance(value, Name) and name == value:
            name2 = fresh_like(name)
            body = substitute(body, name, name2)
            name = name2
        return Restriction(name, substitute(body, replace, value), span=t.span)
    if isinstance(t, Parallel):
        return Parallel(substitute(t.left, replace, value), substitute(t.right, replace, value), span=t.span)
    if isinstance(t, Choice):
        return Choice(substitute(t.left, replace, value), substitute(t.right, replace, value), span=t.span)
    if isinstance(t, Replication):
        return Replication(substitute(t.body, replace, value), site=t.site, span=t.span)
    if isinstance(t, Match):
        return Match(sub_atom(t.lhs), sub_atom(t.rhs), substitute(t.cont, replace, value), span=t.span)
    if isinstance(t, Call):
        fn = FunctionCall(t.fn.symbol, tuple(sub_atom(a) for a in t.fn.args))
        return Call(fn, substitute(t.cont, replace, value), span=t.span)
    return t


# --- alpha-equivalence -------------------------------------------------------
#
# canonical() renders a term as a primitive tuple tree with bound names
# numbered by de-Bruijn levels. `env` may carry numbering for names bound by
# *enclosing* binders, which keeps subterm keys alpha-invariant when the
# normalizer sorts parallel/choice components under a restriction.


def _atom_key(a: Atom, env: dict) -> tuple:
    # Free source-level names are global constants and render by label
    # (independently parsed terms must compare equal); minted names keep
    # their uid so distinct runtime channels never conflate.
    if isinstance(a, Name):
        lvl = env.get(a.uid)
        if lvl is not None:
            return ("b", lvl)
        if a.uid < 0:
            return ("m", a.label.split("~")[0], a.uid)
        return ("n", a.label)
    return ("v", a.label)


def _chan_key(ch: ChannelId, env: dict) -> tuple:
    eps = ch.endpoints
    if eps is None:
        return ("ch", _atom_key(ch.base, env), None)
    return ("ch", _atom_key(ch.base, env), (_atom_key(eps[0], env), _atom_key(eps[1], env)))


def canonical(t: Term, env: Optional[dict] = None) -> tuple:
    if env is None:
        env = {}
    if isinstance(t, Inaction):
        return ("0",)
    if isinstance(t, Hole):
        return ("hole",)
    if isinstance(t, Send):
        return ("send", _chan_key(t.channel, env),
                tuple(_atom_key(a, env) for a in t.payload), canonical(t.cont, env))
    if isinstance(t, Receive):
        env2 = dict(env)
        base = len(env)
        for i, b in enumerate(t.binders):
            env2[b.uid] = base + i
        return ("recv", _chan_key(t.channel, env),
                tuple(b.kind for b in t.binders), canonical(t.cont, env2))
    if isinstance(t, Restriction):
        env2 = dict(env)
        env2[t.name.uid] = len(env)
        return ("new", t.name.kind, canonical(t.body, env2))
    if isinstance(t, Parallel):
        return ("par", canonical(t.left, env), canonical(t.right, env))
    if isinstance(t, Choice):
        return ("sum", canonical(t.left, env), canonical(t.right, env))
    if isinstance(t, Replication):
        return ("rep", canonical(t.body, env))
    if isinstance(t, Match):
        return ("match", _atom_key(t.lhs, env), _atom_key(t.rhs, env), canonical(t.cont, env))
    if isinstance(t, Call):
        return ("call", t.fn.symbol, tuple(_atom_key(a, env) for a in t.fn.args), canonical(t.cont, env))
    raise TypeError(f"not a process term: {t!r}")


def alpha_equivalent(p: Term, q: Term) -> bool:
    """True iff p and q differ only by consistent renaming of bound names."""
    return canonical(p) == canonical(q)


def count_holes(t: Term) -> int:
    return sum(1 for _, s in iter_subterms(t) if isinstance(s, Hole))
