"""Shared quiver builders and small helpers for the test suite."""

import numpy as np
import pytest

from qcount.quiver import Representation, double_quiver, parse_quiver


@pytest.fixture(scope="session")
def bundle_cache(tmp_path_factory):
    """One disk cache per session, so the expensive counts run once."""
    return str(tmp_path_factory.mktemp("bundles"))

JORDAN_TXT = "vertices: a; arrows: l: a->a"
LOOP2_TXT = "vertices: a; arrows: x: a->a; arrows: y: a->a"
KRONECKER_TXT = "vertices: s, t\narrows: a: s->t\narrows: b: s->t"
A2_TXT = "vertices: u, w; arrows: e: u->w"
CM_TXT = "vertices: c, f\narrows: l: c->c\narrows: e: f->c"
CYCLIC2F_TXT = "vertices: c0, c1, f\narrows: a: c0->c1\narrows: b: c1->c0\narrows: g: f->c0"


def jordan():
    return parse_quiver(JORDAN_TXT)[0]


def loop2():
    return parse_quiver(LOOP2_TXT)[0]


def kronecker():
    return parse_quiver(KRONECKER_TXT)[0]


def a2():
    return parse_quiver(A2_TXT)[0]


def cm_quiver():
    return parse_quiver(CM_TXT)[0]


def cyclic2f():
    return parse_quiver(CYCLIC2F_TXT)[0]


def cm_double():
    return double_quiver(cm_quiver())


def rep(quiver, field, dim, mats):
    """Representation from plain nested lists of integer codes."""
    fixed = {}
    idx = quiver.vertex_index
    for a in quiver.arrows:
        rows = dim[idx(a.target)]
        cols = dim[idx(a.source)]
        fixed[a.name] = np.array(mats[a.name], dtype=np.uint8).reshape(rows, cols)
    return Representation(quiver, field, dim, fixed)
