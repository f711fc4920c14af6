"""Exact counting of quiver representations over finite fields."""

from qcount.ff import (
    CycloInt,
    CycloRational,
    FieldSpec,
    Scalar,
    absolute_trace,
    additive_character,
    extension_of,
    field_for_q,
    make_field,
    rel_trace,
)
from qcount.quiver import Potential, Quiver, Representation, parse_quiver

__all__ = [
    "CycloInt",
    "CycloRational",
    "FieldSpec",
    "Potential",
    "Quiver",
    "Representation",
    "Scalar",
    "absolute_trace",
    "additive_character",
    "extension_of",
    "field_for_q",
    "make_field",
    "parse_quiver",
    "rel_trace",
]
