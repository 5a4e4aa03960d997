"""The .scif surface language: parsing and canonical pretty-printing.

Keywords carry the true direction (`send` transmits, `recv` receives and
binds), with mandatory braces for non-trivial continuations, so no reader
ever decodes bracket notation. Precedence: prefixes bind tighter than `|`,
which binds tighter than `+`.

A scenario file declares actors (each a list of clauses; `app clause` marks a
phone-side process with no clock mediation), an authorization block, and an
optional exploration block. `#` starts a line comment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import ArityError, PicsifError, UnknownFunctionSymbol
from .terms import (
    CHANNEL,
    INACTION,
    MESSAGE,
    Atom,
    Call,
    ChannelId,
    Choice,
    FunctionCall,
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
    free_names,
)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


class ParseError(PicsifError):
    def __init__(self, span: SourceSpan, message: str, expected: tuple[str, ...] = ()):
        text = f"{span}: {message}"
        if expected:
            text += " (expected " + ", ".join(sorted(expected)) + ")"
        super().__init__(text)
        self.span = span
        self.expected = expected


KEYWORDS = {
    "actor", "as", "with", "clock", "forward", "clause", "app",
    "auth", "explore", "unauthorized", "channel", "depth", "fuel",
    "send", "recv", "new", "chan", "msg", "rep", "match", "call", "hole",
}

_PUNCT = ("->", "==", "{", "}", "(", ")", "<", ">", "[", "]", ",", ";", "+", "|")


@dataclass(frozen=True)
class Token:
    type: str  # ident | int | punct | keyword | eof
    value: str
    line: int
    column: int


def _lex(text: str, path: str) -> list[Token]:
    toks = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            toks.append(Token("keyword" if word in KEYWORDS else "ident", word, line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseError(SourceSpan(path, line, col), f"unexpected character {c!r}")
    toks.append(Token("eof", "", line, col))
    return toks


# --- raw syntax tree (identifiers unresolved) --------------------------------


@dataclass
class _RChan:
    base: str
    endpoints: Optional[tuple[str, str]]
    span: SourceSpan


@dataclass
class _RNode:
    tag: str  # zero send recv new rep par sum match call hole
    span: SourceSpan
    chan: Optional[_RChan] = None
    idents: tuple[str, ...] = ()
    kind: str = ""
    kids: tuple["_RNode", ...] = ()


@dataclass
class _RClause:
    app: bool
    body: _RNode
    span: SourceSpan


@dataclass
class _RActor:
    name: str
    identity: str
    flags: tuple[str, ...]
    clauses: list[_RClause]
    span: SourceSpan


class _Parser:
    def __init__(self, text: str, path: str):
        self.path = path
        self.toks = _lex(text, path)
        self.pos = 0

    # -- token plumbing --

    @property
    def cur(self) -> Token:
        return self.toks[self.pos]

    def span(self) -> SourceSpan:
        return SourceSpan(self.path, self.cur.line, self.cur.column)

    def _fail(self, expected: tuple[str, ...]):
        found = self.cur.value or "end of input"
        raise ParseError(self.span(), f"syntax error at {found!r}", expected)

    def at(self, value: str) -> bool:
        return self.cur.value == value and self.cur.type in ("punct", "keyword")

    def eat(self, value: str) -> Token:
        if not self.at(value):
            self._fail((value,))
        tok = self.cur
        self.pos += 1
        return tok

    def ident(self, what: str = "identifier") -> str:
        if self.cur.type != "ident":
            self._fail((what,))
        word = self.cur.value
        self.pos += 1
        return word

    def integer(self) -> int:
        if self.cur.type != "int":
            self._fail(("integer",))
        v = int(self.cur.value)
        self.pos += 1
        return v

    # -- grammar --

    def file(self) -> tuple[list[_RActor], list, Optional[tuple[int, int]]]:
        actors: list[_RActor] = []
        auth_items: list = []
        explore: Optional[tuple[int, int]] = None
        if self.cur.type == "eof":
            raise ParseError(self.span(), "empty scenario")
        while self.cur.type != "eof":
            if self.at("actor"):
                actors.append(self.actor_decl())
            elif self.at("auth"):
                auth_items.extend(self.auth_block())
            elif self.at("explore"):
                explore = self.explore_block(explore)
            else:
                self._fail(("actor", "auth", "explore"))
        if not actors:
            raise ParseError(SourceSpan(self.path, 1, 1), "empty scenario: no actor declarations")
        return actors, auth_items, explore

    def actor_decl(self) -> _RActor:
        span = self.span()
        self.eat("actor")
        name = self.ident("actor name")
        self.eat("as")
        identity = self.ident("identity")
        flags: list[str] = []
        if self.at("with"):
            self.eat("with")
            while True:
                if self.at("clock") or self.at("forward"):
                    flags.append(self.cur.value)
                    self.pos += 1
                else:
                    self._fail(("clock", "forward"))
                if self.at(","):
                    self.eat(",")
                else:
                    break
        self.eat("{")
        clauses: list[_RClause] = []
        while not self.at("}"):
            cspan = self.span()
            app = False
            if self.at("app"):
                self.eat("app")
                app = True
            self.eat("clause")
            self.eat("{")
            body = self.process()
            self.eat("}")
            clauses.append(_RClause(app, body, cspan))
        self.eat("}")
        return _RActor(name, identity, tuple(flags), clauses, span)

    def auth_block(self) -> list:
        self.eat("auth")
        self.eat("{")
        items = []
        while not self.at("}"):
            span = self.span()
            if self.at("actor"):
                self.eat("actor")
                items.append(("actor", self.ident("identity"), span))
            elif self.at("unauthorized"):
                self.eat("unauthorized")
                self.eat("channel")
                items.append(("unauthorized", self.chan_ref(), span))
            elif self.at("channel"):
                self.eat("channel")
                items.append(("channel", self.chan_ref(), span))
            else:
                self._fail(("actor", "channel", "unauthorized"))
            self.eat(";")
        self.eat("}")
        return items

    def explore_block(self, prev) -> tuple[int, int]:
        span = self.span()
        if prev is not None:
            raise ParseError(span, "duplicate explore block")
        self.eat("explore")
        self.eat("{")
        depth, fuel = 12, 3
        while not self.at("}"):
            if self.at("depth"):
                self.eat("depth")
                depth = self.integer()
            elif self.at("fuel"):
                self.eat("fuel")
                fuel = self.integer()
            else:
                self._fail(("depth", "fuel"))
            self.eat(";")
        self.eat("}")
        if depth < 1 or fuel < 1:
            raise ParseError(span, "depth and fuel must be >= 1")
        return depth, fuel

    def chan_ref(self) -> _RChan:
        span = self.span()
        base = self.ident("channel name")
        endpoints = None
        if self.at("["):
            self.eat("[")
            f = self.ident("endpoint")
            self.eat("->")
            t = self.ident("endpoint")
            self.eat("]")
            endpoints = (f, t)
        return _RChan(base, endpoints, span)

    def process(self) -> _RNode:
        span = self.span()
        parts = [self.par()]
        while self.at("+"):
            self.eat("+")
            parts.append(self.par())
        if len(parts) == 1:
            return parts[0]
        return _RNode("sum", span, kids=tuple(parts))

    def par(self) -> _RNode:
        span = self.span()
        parts = [self.prefix()]
        while self.at("|"):
            self.eat("|")
            parts.append(self.prefix())
        if len(parts) == 1:
            return parts[0]
        return _RNode("par", span, kids=tuple(parts))

    def _block(self) -> _RNode:
        if self.at("{"):
            span = self.span()
            self.eat("{")
            body = self.process()
            self.eat("}")
            return body
        return _RNode("zero", self.span())

    def _ident_list(self, closer: str) -> tuple[str, ...]:
        items = []
        if not self.at(closer):
            items.append(self.ident())
            while self.at(","):
                self.eat(",")
                items.append(self.ident())
        return tuple(items)

    def prefix(self) -> _RNode:
        span = self.span()
        if self.cur.type == "int" and self.cur.value == "0":
            self.pos += 1
            return _RNode("zero", span)
        if self.at("("):
            self.eat("(")
            inner = self.process()
            self.eat(")")
            return inner
        if self.at("send"):
            self.eat("send")
            chan = self.chan_ref()
            self.eat("(")
            args = self._ident_list(")")
            self.eat(")")
            return _RNode("send", span, chan=chan, idents=args, kids=(self._block(),))
        if self.at("recv"):
            self.eat("recv")
            chan = self.chan_ref()
            self.eat("<")
            binders = self._ident_list(">")
            self.eat(">")
            return _RNode("recv", span, chan=chan, idents=binders, kids=(self._block(),))
        if self.at("new"):
            self.eat("new")
            if self.at("chan"):
                self.eat("chan")
                kind = CHANNEL
            elif self.at("msg"):
                self.eat("msg")
                kind = MESSAGE
            else:
                self._fail(("chan", "msg"))
            name = self.ident("name")
            return _RNode("new", span, idents=(name,), kind=kind, kids=(self._block(),))
        if self.at("rep"):
            self.eat("rep")
            self.eat("{")
            body = self.process()
            self.eat("}")
            return _RNode("rep", span, kids=(body,))
        if self.at("match"):
            self.eat("match")
            self.eat("(")
            lhs = self.ident()
            self.eat("==")
            rhs = self.ident()
            self.eat(")")
            return _RNode("match", span, idents=(lhs, rhs), kids=(self._block(),))
        if self.at("call"):
            self.eat("call")
            sym = self.ident("function symbol")
            self.eat("(")
            args = self._ident_list(")")
            self.eat(")")
            return _RNode("call", span, idents=(sym,) + args, kids=(self._block(),))
        if self.at("hole"):
            self.eat("hole")
            return _RNode("hole", span)
        self._fail(("0", "send", "recv", "new", "rep", "match", "call", "hole", "("))


# --- resolution --------------------------------------------------------------


def _base_labels(node: _RNode, out: set):
    if node.chan is not None:
        out.add(node.chan.base)
    for k in node.kids:
        _base_labels(k, out)


def _endpoint_labels(node: _RNode, out: set):
    if node.chan is not None and node.chan.endpoints:
        out.update(node.chan.endpoints)
    for k in node.kids:
        _endpoint_labels(k, out)


class _Resolver:
    """Turns raw nodes into terms. Free names are interned file-wide; a label
    used anywhere in channel position is interned as a channel."""

    def __init__(self, identities: set[str], channel_labels: set[str], path: str,
                 interned: Optional[dict] = None):
        self.identities = identities
        self.channel_labels = channel_labels
        self.path = path
        self.free: dict[str, Name] = dict(interned or {})

    def intern(self, label: str) -> Name:
        n = self.free.get(label)
        if n is None:
            kind = CHANNEL if label in self.channel_labels else MESSAGE
            n = Name(label, kind)
            self.free[label] = n
        return n

    def atom(self, label: str, scope: dict[str, Name]) -> Atom:
        if label in scope:
            return scope[label]
        if label in self.identities:
            return Variable(label)
        return self.intern(label)

    def endpoint(self, label: str, scope: dict[str, Name]) -> Atom:
        if label in scope:
            return scope[label]
        return Variable(label)

    def chan(self, rc: _RChan, scope: dict[str, Name]) -> ChannelId:
        # Channel position always names a Name: the published model overloads
        # labels across namespaces (Hegseth's identity h vs the tunnel h).
        base = scope.get(rc.base)
        if base is None:
            base = self.intern(rc.base)
        endpoints = None
        if rc.endpoints:
            endpoints = (self.endpoint(rc.endpoints[0], scope), self.endpoint(rc.endpoints[1], scope))
        return ChannelId(base, endpoints)

    def term(self, node: _RNode, scope: dict[str, Name]) -> Term:
        tag = node.tag
        if tag == "zero":
            return Inaction(span=node.span)
        if tag == "hole":
            return Hole(span=node.span)
        if tag == "par" or tag == "sum":
            cls = Parallel if tag == "par" else Choice
            kids = [self.term(k, scope) for k in node.kids]
            out = kids[0]
            for k in kids[1:]:
                out = cls(out, k, span=node.span)
            return out
        if tag == "send":
            chan = self.chan(node.chan, scope)
            payload = tuple(self.atom(a, scope) for a in node.idents)
            return Send(chan, payload, self.term(node.kids[0], scope), span=node.span)
        if tag == "recv":
            chan = self.chan(node.chan, scope)
            used_as_base = set()
            _base_labels(node.kids[0], used_as_base)
            binders = tuple(
                Name(b, CHANNEL if b in used_as_base else MESSAGE) for b in node.idents
            )
            inner = dict(scope)
            for b in binders:
                inner[b.label] = b
            return Receive(chan, binders, self.term(node.kids[0], inner), span=node.span)
        if tag == "new":
            label = node.idents[0]
            name = Name(label, node.kind)
            inner = dict(scope)
            inner[label] = name
            return Restriction(name, self.term(node.kids[0], inner), span=node.span)
        if tag == "rep":
            return Replication(self.term(node.kids[0], scope), span=node.span)
        if tag == "match":
            return Match(self.atom(node.idents[0], scope), self.atom(node.idents[1], scope),
                         self.term(node.kids[0], scope), span=node.span)
        if tag == "call":
            sym = node.idents[0]
            args = tuple(self.atom(a, scope) for a in node.idents[1:])
            try:
                fn = FunctionCall(sym, args)
            except (UnknownFunctionSymbol, ArityError) as e:
                raise ParseError(node.span, str(e)) from None
            return Call(fn, self.term(node.kids[0], scope), span=node.span)
        raise AssertionError(tag)


@dataclass
class ClauseDecl:
    term: Term
    app: bool = False


@dataclass
class ActorDecl:
    name: str
    identity: Variable
    clauses: list[ClauseDecl]
    has_clock: bool = False
    forwards: bool = False

    @property
    def term(self) -> Term:
        """The actor's full process: the parallel composition of its clauses."""
        parts = [c.term for c in self.clauses]
        if not parts:
            return INACTION
        out = parts[0]
        for p in parts[1:]:
            out = Parallel(out, p)
        return out


@dataclass
class ScenarioFile:
    path: str
    actors: list[ActorDecl]
    authenticated: tuple[Variable, ...]
    authorized: tuple[ChannelId, ...]
    unauthorized: tuple[ChannelId, ...]
    explore: Optional[tuple[int, int]] = None  # (depth bound, replication fuel)
    names: dict = field(default_factory=dict)  # interned free names by label

    @property
    def declarations(self) -> list[tuple[str, Variable, Term]]:
        return [(a.name, a.identity, a.term) for a in self.actors]


def parse(text: str, path: str = "<scenario>") -> ScenarioFile:
    """Parse a scenario; raises ParseError with a source span on any defect."""
    parser = _Parser(text, path)
    ractors, auth_items, explore = parser.file()

    seen = set()
    for ra in ractors:
        if ra.name in seen:
            raise ParseError(ra.span, f"duplicate actor {ra.name!r}")
        seen.add(ra.name)

    # Identities: declared actors, auth-block actors, and any label used in an
    # endpoint position (unless locally bound, an endpoint is a variable).
    identities = {ra.identity for ra in ractors}
    identities.update(label for kind, label, _span in auth_items if kind == "actor")

    channel_labels: set[str] = set()
    for ra in ractors:
        for cl in ra.clauses:
            _base_labels(cl.body, channel_labels)
            _endpoint_labels(cl.body, identities)
    for kind, item, _span in auth_items:
        if kind in ("channel", "unauthorized"):
            channel_labels.add(item.base)
            if item.endpoints:
                identities.update(item.endpoints)

    res = _Resolver(identities, channel_labels, path)
    actors = []
    for ra in ractors:
        clauses = [ClauseDecl(res.term(cl.body, {}), app=cl.app) for cl in ra.clauses]
        actors.append(ActorDecl(ra.name, Variable(ra.identity), clauses,
                                has_clock="clock" in ra.flags, forwards="forward" in ra.flags))

    authenticated = []
    authorized = []
    unauthorized = []
    for kind, item, _span in auth_items:
        if kind == "actor":
            v = Variable(item)
            if v not in authenticated:
                authenticated.append(v)
        else:
            ch = res.chan(item, {})
            (authorized if kind == "channel" else unauthorized).append(ch)

    declared = {c.base for c in authorized} | {c.base for c in unauthorized}
    for a in actors:
        for cl in a.clauses:
            for n in sorted(free_names(cl.term), key=lambda n: n.label):
                if n.kind == CHANNEL and n not in declared:
                    raise ParseError(
                        SourceSpan(path, 1, 1),
                        f"channel {n.label!r} referenced by actor {a.name!r} is neither "
                        f"authorized nor explicitly marked unauthorized",
                    )

    return ScenarioFile(path, actors, tuple(authenticated), tuple(authorized),
                        tuple(unauthorized), explore, res.free)


def parse_process(text: str, scope: Optional[dict[str, Atom]] = None,
                  path: str = "<process>") -> Term:
    """Parse a bare process. `scope` pre-binds labels to names/variables
    (used when inserting into a context whose binders must be referenced)."""
    parser = _Parser(text, path)
    node = parser.process()
    if parser.cur.type != "eof":
        parser._fail(("end of input",))
    channel_labels: set[str] = set()
    _base_labels(node, channel_labels)
    identities = {k for k, v in (scope or {}).items() if isinstance(v, Variable)}
    _endpoint_labels(node, identities)
    res = _Resolver(identities, channel_labels, path)
    env = {}
    for label, atom in (scope or {}).items():
        if isinstance(atom, Name):
            env[label] = atom
    return res.term(node, env)


def parse_file(path: str) -> ScenarioFile:
    with open(path, encoding="utf-8") as f:
        return parse(f.read(), path)


# --- pretty-printing ---------------------------------------------------------


def _display_atom(a: Atom, disp: dict[int, str]) -> str:
    if isinstance(a, Name):
        return disp.get(a.uid, a.label)
    return a.label


def _display_chan(ch: ChannelId, disp: dict[int, str]) -> str:
    base = _display_atom(ch.base, disp)
    if ch.endpoints:
        f, t = ch.endpoints
        return f"{base}[{_display_atom(f, disp)}->{_display_atom(t, disp)}]"
    return base


def _pick_label(label: str, used: set) -> str:
    if label not in used:
        return label
    k = 2
    while f"{label}_{k}" in used:
        k += 1
    return f"{label}_{k}"


def _pp(t: Term, disp: dict[int, str], used: set, level: int) -> str:
    # level: 0 = sum position, 1 = par position, 2 = prefix position
    if isinstance(t, Inaction):
        return "0"
    if isinstance(t, Hole):
        return "hole"
    if isinstance(t, Choice):
        parts = " + ".join(_pp(p, disp, used, 1) for p in _left_spine(t, Choice))
        return f"({parts})" if level >= 1 else parts
    if isinstance(t, Parallel):
        parts = " | ".join(_pp(p, disp, used, 2) for p in _left_spine(t, Parallel))
        return f"({parts})" if level >= 2 else parts

    def block(cont: Term, inner_disp=None, inner_used=None) -> str:
        if isinstance(cont, Inaction):
            return ""
        return " { " + _pp(cont, inner_disp or disp, inner_used or used, 0) + " }"

    if isinstance(t, Send):
        args = ", ".join(_display_atom(a, disp) for a in t.payload)
        return f"send {_display_chan(t.channel, disp)}({args})" + block(t.cont)
    if isinstance(t, Receive):
        disp2, used2 = dict(disp), set(used)
        shown = []
        for b in t.binders:
            lbl = _pick_label(b.label, used2)
            disp2[b.uid] = lbl
            used2.add(lbl)
            shown.append(lbl)
        return (f"recv {_display_chan(t.channel, disp)}<{', '.join(shown)}>"
                + block(t.cont, disp2, used2))
    if isinstance(t, Restriction):
        lbl = _pick_label(t.name.label, used)
        disp2 = dict(disp)
        disp2[t.name.uid] = lbl
        used2 = used | {lbl}
        kw = "chan" if t.name.kind == CHANNEL else "msg"
        return f"new {kw} {lbl}" + block(t.body, disp2, used2)
    if isinstance(t, Replication):
        return "rep { " + _pp(t.body, disp, used, 0) + " }"
    if isinstance(t, Match):
        return (f"match ({_display_atom(t.lhs, disp)} == {_display_atom(t.rhs, disp)})"
                + block(t.cont))
    if isinstance(t, Call):
        args = ", ".join(_display_atom(a, disp) for a in t.fn.args)
        return f"call {t.fn.symbol}({args})" + block(t.cont)
    raise TypeError(f"not a process term: {t!r}")


def _left_spine(t: Term, cls) -> list[Term]:
    # Only the left spine flattens (reparsing is left-associative), so the
    # printed text reproduces the exact tree; right-nested groups get parens.
    # The printer never rewrites: Parallel(P, 0) prints "P | 0".
    parts = [t.right]
    cur = t.left
    while isinstance(cur, cls):
        parts.append(cur.right)
        cur = cur.left
    parts.append(cur)
    return list(reversed(parts))


def pretty_process(t: Term) -> str:
    """Deterministic source text; reparses to an alpha-equivalent term."""
    used = {n.label for n in free_names(t)}
    return _pp(t, {}, used, 0)


def pretty(obj) -> str:
    """Pretty-print a process term or a whole scenario file."""
    if isinstance(obj, ScenarioFile):
        return _pp_file(obj)
    return pretty_process(obj)


def _pp_file(sf: ScenarioFile) -> str:
    out = []
    for a in sf.actors:
        flags = []
        if a.has_clock:
            flags.append("clock")
        if a.forwards:
            flags.append("forward")
        suffix = f" with {', '.join(flags)}" if flags else ""
        out.append(f"actor {a.name} as {a.identity.label}{suffix} {{")
        for cl in a.clauses:
            kw = "app clause" if cl.app else "clause"
            out.append(f"  {kw} {{ {pretty_process(cl.term)} }}")
        out.append("}")
        out.append("")
    out.append("auth {")
    for v in sf.authenticated:
        out.append(f"  actor {v.label};")
    for ch in sf.authorized:
        out.append(f"  channel {_display_chan(ch, {})};")
    for ch in sf.unauthorized:
        out.append(f"  unauthorized channel {_display_chan(ch, {})};")
    out.append("}")
    if sf.explore is not None:
        depth, fuel = sf.explore
        out.append("")
        out.append("explore {")
        out.append(f"  depth {depth};")
        out.append(f"  fuel {fuel};")
        out.append("}")
    return "\n".join(out) + "\n"
