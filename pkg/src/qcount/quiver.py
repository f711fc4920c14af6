"""Quiver, dimension vector, potential, and representation data model.

The text format is line-oriented; semicolons work like newlines:

    vertices: a, b
    arrows: f: a->b
    arrows: g: b->a
    dim: a=1, b=2
    potential: 1 * f.g + -1 * g.f

A potential is a Z-linear combination of oriented cycles; coefficients
stay integers in the model and are reduced into the field only when a
representation is evaluated, so one file serves every q.
"""

from __future__ import annotations

import json
import re
from collections import namedtuple

import numpy as np

from qcount import linalg
from qcount.ff import Scalar

Arrow = namedtuple("Arrow", ["name", "source", "target"])


class QuiverParseError(ValueError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = f" (line {line}" + (f", col {col})" if col is not None else ")") if line else ""
        super().__init__(message + where)


def _least_rotation(word):
    return min(tuple(word[i:] + word[:i]) for i in range(len(word)))


class Potential:
    """Z-combination of oriented cycles, each stored at its least rotation."""

    def __init__(self, quiver, terms):
        arrows = {a.name: a for a in quiver.arrows}
        canon = {}
        for coeff, cycle in terms:
            cycle = tuple(cycle)
            if not cycle:
                raise QuiverParseError("empty cycle in potential")
            for pos, name in enumerate(cycle):
                if name not in arrows:
                    raise QuiverParseError(f"unknown arrow {name!r} in potential")
                nxt = arrows[cycle[(pos + 1) % len(cycle)]]
                if arrows[name].target != nxt.source:
                    raise QuiverParseError(
                        f"cycle {'.'.join(cycle)} breaks at {name!r}: "
                        f"target {arrows[name].target!r} != next source {nxt.source!r}"
                    )
            key = _least_rotation(list(cycle))
            canon[key] = canon.get(key, 0) + int(coeff)
        self.quiver = quiver
        self.terms = tuple(sorted((c, w) for w, c in canon.items() if c != 0))
        # normalized shape: ((coeff, cycle), ...)
        self.terms = tuple((c, w) for c, w in self.terms)

    @classmethod
    def zero(cls, quiver):
        return cls(quiver, [])

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return (
            isinstance(other, Potential)
            and self.quiver is other.quiver
            and self.terms == other.terms
        )

    def __repr__(self):
        if not self.terms:
            return "Potential(0)"
        body = " + ".join(f"{c} * {'.'.join(w)}" for c, w in self.terms)
        return f"Potential({body})"


class Quiver:
    def __init__(self, vertices, arrows, doubled_of=None, star=None):
        vertices = tuple(vertices)
        if len(set(vertices)) != len(vertices):
            raise QuiverParseError("duplicate vertex label")
        names = [a.name for a in arrows]
        if len(set(names)) != len(names):
            raise QuiverParseError("duplicate arrow id")
        for a in arrows:
            for end in (a.source, a.target):
                if end not in vertices:
                    raise QuiverParseError(f"arrow {a.name!r} uses unknown vertex {end!r}")
        self.vertices = vertices
        self.arrows = tuple(arrows)
        self.doubled_of = doubled_of
        self.star = dict(star) if star else None
        self._index = {v: i for i, v in enumerate(vertices)}
        self._arrow_by_name = {a.name: a for a in self.arrows}

    def vertex_index(self, label):
        return self._index[label]

    def arrow(self, name):
        return self._arrow_by_name[name]

    @property
    def n_vertices(self):
        return len(self.vertices)

    def arrows_into(self, label):
        return [a for a in self.arrows if a.target == label]

    def arrows_out_of(self, label):
        return [a for a in self.arrows if a.source == label]

    def check_dim(self, dim):
        dim = tuple(int(d) for d in dim)
        if len(dim) != len(self.vertices) or any(d < 0 for d in dim):
            raise ValueError(f"bad dimension vector {dim} for {len(self.vertices)} vertices")
        return dim

    def __eq__(self, other):
        return (
            isinstance(other, Quiver)
            and self.vertices == other.vertices
            and self.arrows == other.arrows
        )

    def __hash__(self):
        return hash((self.vertices, self.arrows))

    def __repr__(self):
        return f"Quiver({list(self.vertices)}, {len(self.arrows)} arrows)"

    def to_json(self):
        data = {
            "vertices": list(self.vertices),
            "arrows": [[a.name, a.source, a.target] for a in self.arrows],
        }
        if self.star:
            data["star"] = sorted(self.star.items())
        return data

    @classmethod
    def from_json(cls, data):
        star = dict(data["star"]) if "star" in data else None
        return cls(
            data["vertices"],
            [Arrow(*row) for row in data["arrows"]],
            star=star,
        )


def double_quiver(q):
    """Add a reversed partner a*: t->s for every arrow a: s->t."""
    if q.star is not None:
        raise ValueError("quiver is already a double")
    arrows = list(q.arrows)
    star = {}
    for a in q.arrows:
        partner = a.name + "*"
        arrows.append(Arrow(partner, a.target, a.source))
        star[a.name] = partner
        star[partner] = a.name
    return Quiver(q.vertices, arrows, doubled_of=q, star=star)


_NAME = r"[A-Za-z_][A-Za-z_0-9]*"
_ARROW_RE = re.compile(rf"^({_NAME})\s*:\s*({_NAME})\s*->\s*({_NAME})$")
_TERM_RE = re.compile(rf"^([+-]?\d+)\s*\*\s*({_NAME}(?:\s*\.\s*{_NAME})*)$")


def _statements(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        for chunk in line.split(";"):
            stmt = chunk.strip()
            if stmt:
                yield lineno, stmt


def parse_quiver(text):
    """Parse the text format; returns (Quiver, dim or None, Potential or None)."""
    vertices = []
    arrows = []
    dim_map = {}
    pot_terms = []
    saw_dim = saw_pot = False
    for lineno, stmt in _statements(text):
        if ":" not in stmt:
            raise QuiverParseError(f"expected 'key: value', got {stmt!r}", lineno)
        key, _, payload = stmt.partition(":")
        key = key.strip()
        payload = payload.strip()
        if key == "vertices":
            for label in payload.split(","):
                label = label.strip()
                if not re.fullmatch(_NAME, label):
                    raise QuiverParseError(f"bad vertex label {label!r}", lineno)
                vertices.append(label)
        elif key == "arrows":
            m = _ARROW_RE.match(payload)
            if not m:
                raise QuiverParseError(f"bad arrow {payload!r}", lineno, stmt.find(payload) + 1)
            arrows.append(Arrow(m.group(1), m.group(2), m.group(3)))
        elif key == "dim":
            saw_dim = True
            for piece in payload.split(","):
                label, _, value = piece.partition("=")
                label, value = label.strip(), value.strip()
                if not value.isdigit():
                    raise QuiverParseError(f"bad dim entry {piece.strip()!r}", lineno)
                dim_map[label] = int(value)
        elif key == "potential":
            saw_pot = True
            for piece in re.split(r"\+", payload):
                piece = piece.strip()
                if not piece:
                    continue
                m = _TERM_RE.match(piece)
                if not m:
                    raise QuiverParseError(f"bad potential term {piece!r}", lineno)
                cycle = tuple(w.strip() for w in m.group(2).split("."))
                pot_terms.append((int(m.group(1)), cycle))
        else:
            raise QuiverParseError(f"unknown section {key!r}", lineno)
    if not vertices:
        raise QuiverParseError("no vertices declared")
    quiver = Quiver(vertices, arrows)
    dim = None
    if saw_dim:
        for label in dim_map:
            if label not in quiver.vertices:
                raise QuiverParseError(f"dim for unknown vertex {label!r}")
        dim = tuple(dim_map.get(v, 0) for v in quiver.vertices)
    potential = Potential(quiver, pot_terms) if saw_pot else None
    return quiver, dim, potential


def format_quiver(quiver, dim=None, potential=None):
    """Inverse of parse_quiver on its canonical output."""
    lines = ["vertices: " + ", ".join(quiver.vertices)]
    for a in quiver.arrows:
        lines.append(f"arrows: {a.name}: {a.source}->{a.target}")
    if dim is not None:
        lines.append("dim: " + ", ".join(f"{v}={d}" for v, d in zip(quiver.vertices, dim)))
    if potential is not None and not potential.is_zero():
        lines.append(
            "potential: " + " + ".join(f"{c} * {'.'.join(w)}" for c, w in potential.terms)
        )
    return "\n".join(lines) + "\n"


class Representation:
    """Matrices over one field assigned to a quiver's arrows.

    The matrix for a: s->t has shape (dim_t, dim_s) and acts on column
    vectors, so a path a then b composes as M_b @ M_a.
    """

    __slots__ = ("quiver", "field", "dim", "mats")

    def __init__(self, quiver, field, dim, mats):
        dim = quiver.check_dim(dim)
        for a in quiver.arrows:
            got = mats[a.name].shape
            want = (dim[quiver.vertex_index(a.target)], dim[quiver.vertex_index(a.source)])
            if got != want:
                raise ValueError(f"matrix for {a.name!r} has shape {got}, expected {want}")
        self.quiver = quiver
        self.field = field
        self.dim = dim
        self.mats = {a.name: np.ascontiguousarray(mats[a.name], dtype=np.uint8) for a in quiver.arrows}

    @classmethod
    def zero(cls, quiver, field, dim):
        dim = quiver.check_dim(dim)
        idx = quiver.vertex_index
        mats = {
            a.name: linalg.zeros(dim[idx(a.target)], dim[idx(a.source)])
            for a in quiver.arrows
        }
        return cls(quiver, field, dim, mats)

    def key(self):
        """Canonical hashable value; equal keys iff equal representations."""
        return (
            self.dim,
            tuple(self.mats[a.name].tobytes() for a in self.quiver.arrows),
        )

    def __eq__(self, other):
        return (
            isinstance(other, Representation)
            and self.quiver == other.quiver
            and self.field == other.field
            and self.key() == other.key()
        )

    def __hash__(self):
        return hash((self.field.q,) + self.key())

    def __repr__(self):
        return f"Representation(dim={self.dim}, q={self.field.q})"

    def to_json(self):
        return {
            "dim": list(self.dim),
            "q": self.field.q,
            "mats": {
                a.name: [[int(x) for x in row] for row in self.mats[a.name]]
                for a in self.quiver.arrows
            },
        }


def direct_sum(x, y):
    if x.quiver != y.quiver or x.field != y.field:
        raise ValueError("direct sum needs one quiver and one field")
    q, f = x.quiver, x.field
    dim = tuple(a + b for a, b in zip(x.dim, y.dim))
    idx = q.vertex_index
    mats = {}
    for a in q.arrows:
        xt, xs = x.mats[a.name].shape
        block = linalg.zeros(dim[idx(a.target)], dim[idx(a.source)])
        block[:xt, :xs] = x.mats[a.name]
        block[xt:, xs:] = y.mats[a.name]
        mats[a.name] = block
    return Representation(q, f, dim, mats)


def evaluate_potential(x, potential):
    """Sum of coeff * Tr(cycle matrix product), an element of x.field."""
    if potential.quiver is not x.quiver and potential.quiver != x.quiver:
        raise ValueError("potential belongs to a different quiver")
    f = x.field
    idx = x.quiver.vertex_index
    total = 0
    for coeff, cycle in potential.terms:
        start = x.quiver.arrow(cycle[0]).source
        prod = linalg.identity(x.dim[idx(start)])
        for name in cycle:
            prod = linalg.mat_mul(f, x.mats[name], prod)
        c = coeff % f.p
        total = f.add(total, f.mul(c, linalg.trace(f, prod)))
    return Scalar(f, total)


def rep_to_canonical_json(x):
    return json.dumps(x.to_json(), sort_keys=True, separators=(",", ":"))
