"""Structural congruence: the eleven axioms, context holes, normalization,
and a congruence decision procedure for finite terms.

normalize() rewrites toward a canonical form: unit elimination (rows 4, 7, 9),
vacuous-match removal (row 1), flattening and sorting of sums/compositions
(rows 2, 3, 5, 6), adjacent-restriction sorting (row 8), inward scope
narrowing (row 10), and folding of `P | P!` to `P!` (row 11, terminating
direction). Replication is never unfolded here; explicit unfolds are only
performed by apply_axiom for proof replay and by the reduction engine under
fuel.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Optional

from .errors import AxiomMismatch, HoleError, SideConditionViolation
from .terms import (
    HOLE,
    INACTION,
    Atom,
    Call,
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
    canonical,
    count_holes,
    free_names,
    iter_subterms,
    replace_at,
    subterm_at,
)

AXIOM_LABELS = {
    1: "SC-MAT",
    2: "SC-SUM-ASSOC",
    3: "SC-SUM-COMM",
    4: "SC-SUM-INACT",
    5: "SC-COMP-ASSOC",
    6: "SC-COMP-COMM",
    7: "SC-COMP-INACT",
    8: "SC-RES",
    9: "SC-RES-INACT",
    10: "SC-RES-COMP",
    11: "SC-REP",
}


@dataclass(frozen=True)
class RewriteStep:
    """One axiom application at a position, in a direction.

    Rows whose right-to-left reading introduces syntax carry the introduced
    piece: row 9 needs the restricted name, row 1 the match atom.
    """

    axiom: int
    path: tuple[int, ...] = ()
    direction: str = "ltr"
    name: Optional[Name] = None
    arg: Optional[Atom] = None

    def __post_init__(self):
        if not (1 <= self.axiom <= 11):
            raise ValueError(f"axiom index {self.axiom} out of [1,11]")
        if self.direction not in ("ltr", "rtl"):
            raise ValueError(f"bad direction {self.direction!r}")


def _path_str(path: tuple[int, ...]) -> str:
    return ".".join(map(str, path)) if path else "-"


def apply_axiom(t: Term, step: RewriteStep) -> Term:
    """Rewrite the subterm at step.path by the matched Table-1 axiom."""
    sub = subterm_at(t, step.path)
    new = _apply(sub, step)
    return replace_at(t, step.path, new)


def _apply(s: Term, step: RewriteStep) -> Term:
    ax, ltr = step.axiom, step.direction == "ltr"

    def mismatch(reason: str):
        raise AxiomMismatch(ax, step.path, reason)

    if ax == 1:
        if ltr:
            if not isinstance(s, Match):
                mismatch("expected a match guard")
            if s.lhs != s.rhs:
                mismatch("match sides differ")
            return s.cont
        if step.arg is None:
            mismatch("right-to-left requires an atom argument (arg=...)")
        return Match(step.arg, step.arg, s)
    if ax in (2, 5):
        cls = Choice if ax == 2 else Parallel
        if ltr:
            if not (isinstance(s, cls) and isinstance(s.right, cls)):
                mismatch(f"expected {cls.__name__}(a, {cls.__name__}(b, c))")
            return cls(cls(s.left, s.right.left), s.right.right)
        if not (isinstance(s, cls) and isinstance(s.left, cls)):
            mismatch(f"expected {cls.__name__}({cls.__name__}(a, b), c)")
        return cls(s.left.left, cls(s.left.right, s.right))
    if ax in (3, 6):
        cls = Choice if ax == 3 else Parallel
        if not isinstance(s, cls):
            mismatch(f"expected {cls.__name__}")
        return cls(s.right, s.left)
    if ax in (4, 7):
        cls = Choice if ax == 4 else Parallel
        if ltr:
            if not (isinstance(s, cls) and isinstance(s.right, Inaction)):
                mismatch(f"expected {cls.__name__}(m, 0)")
            return s.left
        return cls(s, INACTION)
    if ax == 8:
        if not (isinstance(s, Restriction) and isinstance(s.body, Restriction)):
            mismatch("expected two adjacent restrictions")
        inner = s.body
        return Restriction(inner.name, Restriction(s.name, inner.body))
    if ax == 9:
        if ltr:
            if not (isinstance(s, Restriction) and isinstance(s.body, Inaction)):
                mismatch("expected restriction of 0")
            return INACTION
        if not isinstance(s, Inaction):
            mismatch("expected 0")
        if step.name is None:
            mismatch("right-to-left requires the restricted name (new=...)")
        return Restriction(step.name, INACTION)
    if ax == 10:
        if ltr:
            if not (isinstance(s, Restriction) and isinstance(s.body, Parallel)):
                mismatch("expected restriction of a composition")
            z, p1, p2 = s.name, s.body.left, s.body.right
            if z in free_names(p1):
                raise SideConditionViolation(
                    f"axiom 10 at {_path_str(step.path)}: {z.label} occurs free in the left component"
                )
            return Parallel(p1, Restriction(z, p2))
        if not (isinstance(s, Parallel) and isinstance(s.right, Restriction)):
            mismatch("expected composition with a restricted right component")
        p1, z, p2 = s.left, s.right.name, s.right.body
        if z in free_names(p1):
            raise SideConditionViolation(
                f"axiom 10 at {_path_str(step.path)}: extruding {z.label} would capture"
            )
        return Restriction(z, Parallel(p1, p2))
    if ax == 11:
        if ltr:
            if not isinstance(s, Replication):
                mismatch("expected a replication")
            return Parallel(s.body, s)
        if not (isinstance(s, Parallel) and isinstance(s.right, Replication) and s.left == s.right.body):
            mismatch("expected P | P!")
        return s.right
    raise AxiomMismatch(ax, step.path, "no such axiom")


# --- context holes -----------------------------------------------------------


def holeify(t: Term, path: tuple[int, ...]) -> Term:
    """Turn the inaction at `path` into a context hole."""
    sub = subterm_at(t, path)
    if not isinstance(sub, Inaction):
        raise HoleError(f"subterm at {_path_str(path)} is {type(sub).__name__}, not 0")
    return replace_at(t, path, HOLE)


def insert_into_hole(context: Term, q: Term) -> Term:
    """Replace the unique hole by q; enclosing restrictions scope over q."""
    holes = [p for p, s in iter_subterms(context) if isinstance(s, Hole)]
    if len(holes) != 1:
        raise HoleError(f"context has {len(holes)} holes, need exactly 1")
    if count_holes(q) != 0:
        raise HoleError("inserted process must not itself contain a hole")
    return replace_at(context, holes[0], q)


# --- normalization -----------------------------------------------------------


def _key(t: Term, env: dict) -> str:
    return repr(canonical(t, env))


def _flatten(t: Term, cls) -> list[Term]:
    if isinstance(t, cls):
        return _flatten(t.left, cls) + _flatten(t.right, cls)
    return [t]


def _rebuild(parts: list[Term], cls) -> Term:
    if not parts:
        return INACTION
    return reduce(cls, parts)


def _fold_replicas(parts: list[Term], env: dict) -> list[Term]:
    """Row 11 r-to-l: a copy standing next to its own replication folds away
    (P | P! = P!). When P is itself a composition its copy appears flattened,
    so whole component groups are matched and removed. Bodies are strictly
    smaller than their replications, so the fold terminates and the largest
    component always survives."""
    changed = True
    while changed:
        changed = False
        keys = [_key(p, env) for p in parts]
        for ri, rep in enumerate(parts):
            if not isinstance(rep, Replication):
                continue
            group = [_key(g, env) for g in _flatten(rep.body, Parallel)]
            picked: list[int] = []
            for gk in group:
                found = next((i for i, k in enumerate(keys)
                              if k == gk and i != ri and i not in picked), None)
                if found is None:
                    picked = []
                    break
                picked.append(found)
            if picked:
                parts = [p for i, p in enumerate(parts) if i not in picked]
                changed = True
                break
    return parts


def _norm_assoc(parts: list[Term], cls, env: dict) -> Term:
    parts = [p for p in parts if not isinstance(p, Inaction)]
    if cls is Parallel and any(isinstance(p, Replication) for p in parts):
        parts = _fold_replicas(parts, env)
    parts.sort(key=lambda p: _key(p, env))
    return _rebuild(parts, cls)


def normalize(t: Term) -> Term:
    """Canonical form under the Table-1 axioms (replication left folded)."""
    return _norm(t, {})


def _norm(t: Term, env: dict) -> Term:
    if isinstance(t, Inaction):
        return INACTION
    if isinstance(t, Hole):
        return HOLE
    if isinstance(t, Send):
        return Send(t.channel, t.payload, _norm(t.cont, env))
    if isinstance(t, Receive):
        env2 = dict(env)
        base = len(env)
        for i, b in enumerate(t.binders):
            env2[b.uid] = base + i
        return Receive(t.channel, t.binders, _norm(t.cont, env2))
    if isinstance(t, Match):
        if t.lhs == t.rhs:
            return _norm(t.cont, env)
        return Match(t.lhs, t.rhs, _norm(t.cont, env))
    if isinstance(t, Call):
        return Call(t.fn, _norm(t.cont, env))
    if isinstance(t, Replication):
        return Replication(_norm(t.body, env), site=t.site)
    if isinstance(t, Choice):
        parts = []
        for p in _flatten(t, Choice):
            n = _norm(p, env)
            parts.extend(_flatten(n, Choice))
        return _norm_assoc(parts, Choice, env)
    if isinstance(t, Parallel):
        parts = []
        for p in _flatten(t, Parallel):
            n = _norm(p, env)
            parts.extend(_flatten(n, Parallel))
        return _norm_assoc(parts, Parallel, env)
    if isinstance(t, Restriction):
        env2 = dict(env)
        env2[t.name.uid] = len(env)
        body = _norm(t.body, env2)
        if isinstance(body, Inaction):
            return INACTION  # row 9
        if t.name not in free_names(body):
            return body  # rows 7/10/9 composed: unused binder drops
        if isinstance(body, Parallel):
            parts = _flatten(body, Parallel)
            users = [p for p in parts if t.name in free_names(p)]
            outside = [p for p in parts if t.name not in free_names(p)]
            if outside:
                inner = Restriction(t.name, _rebuild(users, Parallel))
                return _norm(_rebuild(outside + [inner], Parallel), env)
        return _sort_chain(t.name, body, env)
    raise TypeError(f"not a process term: {t!r}")


def _sort_chain(name: Name, body: Term, env: dict) -> Term:
    """Row 8: put a maximal chain of adjacent restrictions in canonical order.

    Binder signatures mark each binder distinctly while anonymizing its chain
    siblings, so the sort is invariant under alpha-renaming; equal signatures
    mean the binders are interchangeable and any stable tiebreak is sound.
    """
    binders = [name]
    core = body
    while isinstance(core, Restriction):
        binders.append(core.name)
        core = core.body
    if len(binders) == 1:
        return Restriction(name, body)

    def signature(b: Name) -> tuple:
        marked = dict(env)
        for other in binders:
            marked[other.uid] = -1
        marked[b.uid] = -2
        return (repr(canonical(core, marked)), b.kind, b.label, b.uid)

    binders.sort(key=signature)
    out = core
    for b in reversed(binders):
        out = Restriction(b, out)
    return out


def congruent(p: Term, q: Term) -> bool:
    """Decision procedure for finite terms: congruent iff the canonical forms
    are alpha-equivalent."""
    return canonical(normalize(p)) == canonical(normalize(q))


# --- proofs ------------------------------------------------------------------


@dataclass(frozen=True)
class CongruenceProof:
    """A replayable rewrite sequence, optionally ending in a hole insertion.

    Replaying the steps from `start` (then hole-ifying and inserting, when an
    insertion is recorded) must yield `end` exactly.
    """

    start: Term
    steps: tuple[RewriteStep, ...]
    end: Term
    insertion: Optional[tuple[tuple[int, ...], Term]] = None

    def replay(self) -> list[Term]:
        """All intermediate terms, start included; raises if the end differs."""
        cur = self.start
        seen = [cur]
        for step in self.steps:
            cur = apply_axiom(cur, step)
            seen.append(cur)
        if self.insertion is not None:
            path, inserted = self.insertion
            cur = insert_into_hole(holeify(cur, path), inserted)
            seen.append(cur)
        if cur != self.end:
            raise AxiomMismatch(0, (), "replay did not reach the recorded end term")
        return seen


def step_line(step: RewriteStep) -> str:
    parts = [f"step {step.axiom} at {_path_str(step.path)} {step.direction}"]
    if step.name is not None:
        parts.append(f"new={step.name.label}")
    if step.arg is not None:
        parts.append(f"arg={step.arg.label}")
    return " ".join(parts)


def proof_lines(proof: CongruenceProof, render) -> list[str]:
    """Line-oriented serialization; `render` pretty-prints terms."""
    lines = [f"start {render(proof.start)}"]
    cur = proof.start
    for step in proof.steps:
        cur = apply_axiom(cur, step)
        lines.append(step_line(step))
        lines.append(f"  = {render(cur)}")
    if proof.insertion is not None:
        path, inserted = proof.insertion
        lines.append(f"hole at {_path_str(path)}")
        cur = insert_into_hole(holeify(cur, path), inserted)
        lines.append(f"insert {render(inserted)}")
        lines.append(f"  = {render(cur)}")
    lines.append(f"end {render(proof.end)}")
    return lines
