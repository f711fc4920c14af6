"""Multigraded power series with plethystic Exp/Log, in two coefficient modes.

ValueTable mode stores, for each degree v, the exact values of a function
of the extension degree n (the n-th value belongs to F_{q^n} data); Exp
then follows the value-table formula exp(sum over n >= 1 of psi_n/n)
where psi_n sends z^w f_w(m) to z^{nw} f_w(n m).

RatFun mode stores one-variable rational functions in s = q^{1/2}; there
psi_n is the substitution s -> s^n.

Coefficients in ValueTable mode live on the triangular domain
m * |v| <= cutoff, which every operation here preserves, so a missing
degree is always a construction-time error, never a silent gap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import factorial

from qcount.ff import CycloRational, additive_character
from qcount.orbits import (
    ABS_INDEC,
    DEFAULT_BUDGET,
    UNCLASSIFIED,
    BudgetError,
    counts_over_extension,
)
from qcount.quiver import Potential, evaluate_potential


class MissingDegreeError(LookupError):
    def __init__(self, v, m):
        super().__init__(f"value table lacks degree {m} at grade {v}")
        self.v = v
        self.m = m


# -- exact one-variable polynomials and rational functions -----------------------


class Poly:
    """Dense polynomial over Q, coefficients low-to-high."""

    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.c = tuple(c)

    @classmethod
    def const(cls, x):
        return cls([x])

    @classmethod
    def s_power(cls, n):
        return cls([0] * n + [1])

    @property
    def degree(self):
        return len(self.c) - 1

    def is_zero(self):
        return not self.c

    def __add__(self, other):
        n = max(len(self.c), len(other.c))
        a = list(self.c) + [Fraction(0)] * (n - len(self.c))
        b = list(other.c) + [Fraction(0)] * (n - len(other.c))
        return Poly([x + y for x, y in zip(a, b)])

    def __neg__(self):
        return Poly([-x for x in self.c])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not self.c or not other.c:
            return Poly()
        out = [Fraction(0)] * (len(self.c) + len(other.c) - 1)
        for i, x in enumerate(self.c):
            if x:
                for j, y in enumerate(other.c):
                    out[i + j] += x * y
        return Poly(out)

    def __divmod__(self, other):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.c)
        quot = [Fraction(0)] * max(len(rem) - len(other.c) + 1, 0)
        lead = other.c[-1]
        while len(rem) >= len(other.c) and any(rem):
            while rem and rem[-1] == 0:
                rem.pop()
            if len(rem) < len(other.c):
                break
            shift = len(rem) - len(other.c)
            f = rem[-1] / lead
            quot[shift] = f
            for i, y in enumerate(other.c):
                rem[shift + i] -= f * y
            rem.pop()
        return Poly(quot), Poly(rem)

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self):
        if self.is_zero():
            return self
        lead = self.c[-1]
        return Poly([x / lead for x in self.c])

    def subs_power(self, n):
        """s -> s^n."""
        out = [Fraction(0)] * (n * self.degree + 1) if self.c else []
        for i, x in enumerate(self.c):
            out[n * i] = x
        return Poly(out)

    def eval(self, x):
        acc = Fraction(0)
        for coeff in reversed(self.c):
            acc = acc * x + coeff
        return acc

    def __eq__(self, other):
        return isinstance(other, Poly) and self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __str__(self):
        if not self.c:
            return "0"
        terms = []
        for i, x in enumerate(self.c):
            if not x:
                continue
            if i == 0:
                terms.append(str(x))
            else:
                head = "" if x == 1 else "-" if x == -1 else f"{x}*"
                terms.append(f"{head}s" + (f"^{i}" if i > 1 else ""))
        return " + ".join(terms).replace("+ -", "- ")

    def __repr__(self):
        return f"Poly({self})"


def poly_gcd(a, b):
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


class RatFun:
    """num/den over Q, normal form: gcd-reduced with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if not isinstance(num, Poly):
            num = Poly.const(num)
        if den is None:
            den = Poly.const(1)
        elif not isinstance(den, Poly):
            den = Poly.const(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            self.num, self.den = Poly(), Poly.const(1)
            return
        g = poly_gcd(num, den)
        num, _ = divmod(num, g)
        den, _ = divmod(den, g)
        lead = den.c[-1]
        self.num = Poly([x / lead for x in num.c])
        self.den = Poly([x / lead for x in den.c])

    @classmethod
    def s(cls):
        return cls(Poly.s_power(1))

    def is_zero(self):
        return self.num.is_zero()

    def __add__(self, other):
        other = _as_ratfun(other)
        return RatFun(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_as_ratfun(other))

    def __rsub__(self, other):
        return _as_ratfun(other) + (-self)

    def __mul__(self, other):
        other = _as_ratfun(other)
        return RatFun(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_ratfun(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RatFun(self.num * other.den, self.den * other.num)

    def frobenius(self, n):
        """The substitution s -> s^n."""
        return RatFun(self.num.subs_power(n), self.den.subs_power(n))

    def eval(self, x):
        x = Fraction(x)
        d = self.den.eval(x)
        if d == 0:
            raise ZeroDivisionError(f"pole at {x}")
        return self.num.eval(x) / d

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RatFun(Poly.const(other))
        return (
            isinstance(other, RatFun)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def __str__(self):
        if self.den == Poly.const(1):
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self):
        return f"RatFun({self})"


def _as_ratfun(x):
    return x if isinstance(x, RatFun) else RatFun(Poly.const(x))


# -- graded series ----------------------------------------------------------------


def grades_upto(arity, cutoff, include_zero=True):
    """All v in Z^arity_{>=0} with |v| <= cutoff, ascending by (|v|, v)."""
    out = []
    for total in range(0 if include_zero else 1, cutoff + 1):
        for cuts in itertools.combinations(range(total + arity - 1), arity - 1):
            parts = []
            prev = -1
            for c in cuts:
                parts.append(c - prev - 1)
                prev = c
            parts.append(total + arity - 2 - prev)
            out.append(tuple(parts))
    return out


def _table_domain(v, cutoff):
    top = cutoff if sum(v) == 0 else cutoff // sum(v)
    return range(1, top + 1)


class GradedSeries:
    """Truncated series over Z^arity-grades, ValueTable or RatFun coefficients."""

    __slots__ = ("mode", "arity", "cutoff", "coeffs")

    def __init__(self, mode, arity, cutoff, coeffs):
        if mode not in ("values", "ratfun"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.arity = arity
        self.cutoff = cutoff
        self.coeffs = {v: c for v, c in coeffs.items() if sum(v) <= cutoff}

    @classmethod
    def zero(cls, mode, arity, cutoff):
        return cls(mode, arity, cutoff, {})

    @classmethod
    def one(cls, mode, arity, cutoff):
        zero_v = (0,) * arity
        if mode == "ratfun":
            return cls(mode, arity, cutoff, {zero_v: RatFun(1)})
        table = {m: Fraction(1) for m in _table_domain(zero_v, cutoff)}
        return cls(mode, arity, cutoff, {zero_v: table})

    def coefficient(self, v):
        if v in self.coeffs:
            return self.coeffs[v]
        if self.mode == "ratfun":
            return RatFun(0)
        return {m: Fraction(0) for m in _table_domain(v, self.cutoff)}

    def value(self, v, m):
        if self.mode != "values":
            raise ValueError("value() only applies to ValueTable mode")
        table = self.coefficient(v)
        if m not in table:
            raise MissingDegreeError(v, m)
        return table[m]

    def constant_term(self):
        return self.coefficient((0,) * self.arity)

    def __eq__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        if (self.mode, self.arity, self.cutoff) != (other.mode, other.arity, other.cutoff):
            return False
        for v in grades_upto(self.arity, self.cutoff):
            a, b = self.coefficient(v), other.coefficient(v)
            if self.mode == "ratfun":
                if a != b:
                    return False
            else:
                if sorted(a) != sorted(b):
                    return False
                if any(a[m] != b[m] for m in a):
                    return False
        return True

    def __repr__(self):
        return f"GradedSeries({self.mode}, arity={self.arity}, cutoff={self.cutoff}, {len(self.coeffs)} coeffs)"


def value_series(arity, cutoff, source):
    """ValueTable series from source(v, m); materializes the full triangle."""
    coeffs = {}
    for v in grades_upto(arity, cutoff):
        table = {}
        for m in _table_domain(v, cutoff):
            val = source(v, m)
            if val is None:
                raise MissingDegreeError(v, m)
            table[m] = val
        coeffs[v] = table
    return GradedSeries("values", arity, cutoff, coeffs)


def ratfun_series(arity, cutoff, source):
    return GradedSeries(
        "ratfun",
        arity,
        cutoff,
        {v: _as_ratfun(source(v)) for v in grades_upto(arity, cutoff)},
    )


def _check_compatible(a, b):
    if (a.mode, a.arity, a.cutoff) != (b.mode, b.arity, b.cutoff):
        raise ValueError("series have different mode, arity, or cutoff")


def _coeff_add(mode, x, y):
    if mode == "ratfun":
        return x + y
    return {m: x.get(m, Fraction(0)) + y.get(m, Fraction(0)) for m in set(x) | set(y)}


def series_add(a, b):
    _check_compatible(a, b)
    out = {}
    for v in set(a.coeffs) | set(b.coeffs):
        out[v] = _coeff_add(a.mode, a.coefficient(v), b.coefficient(v))
    return GradedSeries(a.mode, a.arity, a.cutoff, out)


def series_neg(a):
    if a.mode == "ratfun":
        out = {v: -c for v, c in a.coeffs.items()}
    else:
        out = {v: {m: -x for m, x in c.items()} for v, c in a.coeffs.items()}
    return GradedSeries(a.mode, a.arity, a.cutoff, out)


def series_scale(a, scalar):
    """Multiply by a rational constant."""
    if a.mode == "ratfun":
        out = {v: c * RatFun(Poly.const(scalar)) for v, c in a.coeffs.items()}
    else:
        out = {v: {m: x * scalar for m, x in c.items()} for v, c in a.coeffs.items()}
    return GradedSeries(a.mode, a.arity, a.cutoff, out)


def series_rescale_z(a, r):
    """Substitute z_i -> r * z_i: grade v picks up r^{|v|}.  RatFun mode.

    When r is a power of s this substitution commutes with pleth_exp,
    which is the content of the L^{1/2}-twist equivalence: Exp(sum z^v a_v)
    = sum z^v f_v iff Exp applied to the rescaled input gives the f_v
    rescaled by r^{|v|}.
    """
    if a.mode != "ratfun":
        raise ValueError("z-rescaling is only defined for RatFun coefficients")
    r = _as_ratfun(r)
    out = {}
    for v, c in a.coeffs.items():
        factor = RatFun(1)
        for _ in range(sum(v)):
            factor = factor * r
        out[v] = c * factor
    return GradedSeries(a.mode, a.arity, a.cutoff, out)


def series_mul(a, b):
    """Cauchy product on grades; ValueTable values multiply pointwise in m."""
    _check_compatible(a, b)
    out = {}
    for u, cu in a.coeffs.items():
        for w, cw in b.coeffs.items():
            v = tuple(x + y for x, y in zip(u, w))
            if sum(v) > a.cutoff:
                continue
            if a.mode == "ratfun":
                term = cu * cw
            else:
                dom = _table_domain(v, a.cutoff)
                term = {}
                for m in dom:
                    if m not in cu or m not in cw:
                        raise MissingDegreeError(v, m)
                    term[m] = cu[m] * cw[m]
            out[v] = _coeff_add(a.mode, out[v], term) if v in out else term
    return GradedSeries(a.mode, a.arity, a.cutoff, out)


def _strip_constant(f):
    c = f.constant_term()
    if f.mode == "ratfun":
        if not c.is_zero():
            raise ValueError("plethystic exponential needs zero constant term")
    else:
        if any(x != 0 for x in c.values()):
            raise ValueError("plethystic exponential needs zero constant term")


def _psi(f, n):
    """z^w g(m) -> z^{n w} g(n m); in RatFun mode, s -> s^n on coefficients."""
    out = {}
    for w, c in f.coeffs.items():
        if sum(w) == 0:
            continue
        v = tuple(n * x for x in w)
        if sum(v) > f.cutoff:
            continue
        if f.mode == "ratfun":
            out[v] = c.frobenius(n)
        else:
            table = {}
            for m in _table_domain(v, f.cutoff):
                if n * m not in c:
                    raise MissingDegreeError(w, n * m)
                table[m] = c[n * m]
            out[v] = table
    return GradedSeries(f.mode, f.arity, f.cutoff, out)


def _exp_of(s):
    """exp of a series with zero constant term, truncated at the cutoff."""
    out = GradedSeries.one(s.mode, s.arity, s.cutoff)
    power = GradedSeries.one(s.mode, s.arity, s.cutoff)
    for k in range(1, s.cutoff + 1):
        power = series_mul(power, s)
        out = series_add(out, series_scale(power, Fraction(1, factorial(k))))
    return out


def _log_of(g):
    """log of a series with constant term 1, truncated at the cutoff."""
    one = GradedSeries.one(g.mode, g.arity, g.cutoff)
    h = series_add(g, series_neg(one))
    out = GradedSeries.zero(g.mode, g.arity, g.cutoff)
    power = GradedSeries.one(g.mode, g.arity, g.cutoff)
    for k in range(1, g.cutoff + 1):
        power = series_mul(power, h)
        out = series_add(out, series_scale(power, Fraction((-1) ** (k + 1), k)))
    return out


def pleth_exp(f):
    """Exp(f) = exp(sum_{n>=1} psi_n(f)/n), truncated at f.cutoff."""
    _strip_constant(f)
    s = GradedSeries.zero(f.mode, f.arity, f.cutoff)
    for n in range(1, f.cutoff + 1):
        s = series_add(s, series_scale(_psi(f, n), Fraction(1, n)))
    return _exp_of(s)


def pleth_log(g):
    """Inverse of pleth_exp; needs constant term 1."""
    c = g.constant_term()
    if g.mode == "ratfun":
        if c != RatFun(1):
            raise ValueError("plethystic logarithm needs constant term 1")
    else:
        if any(x != 1 for x in c.values()):
            raise ValueError("plethystic logarithm needs constant term 1")
    big_l = _log_of(g)
    out = {}
    for u in grades_upto(g.arity, g.cutoff, include_zero=False):
        if g.mode == "ratfun":
            acc = big_l.coefficient(u)
            for n in range(2, sum(u) + 1):
                if all(x % n == 0 for x in u):
                    w = tuple(x // n for x in u)
                    prev = out.get(w, RatFun(0))
                    acc = acc - prev.frobenius(n) * Fraction(1, n)
            out[u] = acc
        else:
            table = {}
            for m in _table_domain(u, g.cutoff):
                acc = big_l.value(u, m)
                for n in range(2, sum(u) + 1):
                    if all(x % n == 0 for x in u):
                        w = tuple(x // n for x in u)
                        prev = out.get(w, {})
                        if n * m not in prev:
                            raise MissingDegreeError(w, n * m)
                        acc = acc - prev[n * m] * Fraction(1, n)
                table[m] = acc
            out[u] = table
    return GradedSeries(g.mode, g.arity, g.cutoff, out)


# -- JSON forms ---------------------------------------------------------------------


def _value_to_json(x):
    if isinstance(x, CycloRational):
        return ["cyc", x.p, [[c.numerator, c.denominator] for c in x.coords]]
    x = Fraction(x)
    return ["frac", x.numerator, x.denominator]


def _value_from_json(data):
    kind = data[0]
    if kind == "cyc":
        return CycloRational(data[1], [Fraction(n, d) for n, d in data[2]])
    if kind == "frac":
        return Fraction(data[1], data[2])
    raise ValueError(f"unknown value kind {kind!r}")


def _poly_to_json(p):
    return [[c.numerator, c.denominator] for c in p.c]


def series_to_json(a):
    out = {"mode": a.mode, "arity": a.arity, "cutoff": a.cutoff, "coeffs": {}}
    for v, c in sorted(a.coeffs.items()):
        key = ",".join(map(str, v))
        if a.mode == "ratfun":
            out["coeffs"][key] = {"num": _poly_to_json(c.num), "den": _poly_to_json(c.den)}
        else:
            out["coeffs"][key] = {str(m): _value_to_json(x) for m, x in sorted(c.items())}
    return out


def series_from_json(data):
    coeffs = {}
    for key, c in data["coeffs"].items():
        v = tuple(int(x) for x in key.split(",")) if key else ()
        if data["mode"] == "ratfun":
            num = Poly([Fraction(n, d) for n, d in c["num"]])
            den = Poly([Fraction(n, d) for n, d in c["den"]])
            coeffs[v] = RatFun(num, den)
        else:
            coeffs[v] = {int(m): _value_from_json(x) for m, x in c.items()}
    return GradedSeries(data["mode"], data["arity"], data["cutoff"], coeffs)


# -- the two identity checks -------------------------------------------------------


def _as_cyclo(x, p):
    return CycloRational.of(x, p)


@dataclass
class CheckEntry:
    v: tuple
    m: int | None
    lhs: object
    rhs: object

    @property
    def ok(self):
        return self.lhs == self.rhs


@dataclass
class CheckReport:
    name: str
    params: dict
    entries: list = dc_field(default_factory=list)

    @property
    def passed(self):
        return all(e.ok for e in self.entries)

    def failures(self):
        return [e for e in self.entries if not e.ok]


def report_to_json(report):
    return {
        "check": report.name,
        "params": report.params,
        "passed": report.passed,
        "entries": [
            {"v": list(e.v), "m": e.m, "lhs": str(e.lhs), "rhs": str(e.rhs), "ok": e.ok}
            for e in report.entries
        ],
    }


def hua_check(quiver, field, cutoff, potential=None, budget=DEFAULT_BUDGET, cache_dir=None):
    """Verify sum_v z^v E_v = Exp(sum_{v>0} z^v E^AI_v) to the cutoff.

    E_v(m) is the plain character sum over iso classes of Rep_v over
    F_{q^m}; E^AI_v(m) the same restricted to absolutely indecomposable
    classes.  With no potential these are class counts and AI counts,
    the classical Hua identity.
    """
    arity = len(quiver.vertices)
    p = field.p
    if potential is None:
        potential = Potential.zero(quiver)
    zero_v = (0,) * arity

    bundles = {}
    skipped = []
    first_err = None
    for v in grades_upto(arity, cutoff, include_zero=False):
        for m in _table_domain(v, cutoff):
            try:
                bundles[(v, m)] = counts_over_extension(
                    quiver, v, field, m, classify=True, budget=budget, cache_dir=cache_dir
                )
            except BudgetError as err:
                skipped.append((v, m))
                first_err = first_err or err
    if skipped:
        # shrink to the largest full triangle the budget allowed
        cutoff = min(m * sum(v) for v, m in skipped) - 1
        if cutoff < 1:
            raise first_err

    def char_sum(bundle, ai_only):
        total = CycloRational.zero(p)
        for r in bundle.reports:
            if r.tag == UNCLASSIFIED:
                raise RuntimeError("unclassified class at Hua scale")
            if ai_only and r.tag != ABS_INDEC:
                continue
            val = additive_character(evaluate_potential(r.representative, potential))
            total = total + val.to_rational()
        return total

    def lhs_source(v, m):
        if v == zero_v:
            return CycloRational.one(p)
        return char_sum(bundles[(v, m)], ai_only=False)

    def ai_source(v, m):
        if v == zero_v:
            return CycloRational.zero(p)
        return char_sum(bundles[(v, m)], ai_only=True)

    lhs = value_series(arity, cutoff, lhs_source)
    rhs = pleth_exp(value_series(arity, cutoff, ai_source))
    report = CheckReport(
        name="hua",
        params={
            "q": field.q,
            "cutoff": cutoff,
            "potential": repr(potential),
            "vertices": list(quiver.vertices),
            "skipped": [[list(v), m] for v, m in skipped],
        },
    )
    for v in grades_upto(arity, cutoff):
        for m in _table_domain(v, cutoff):
            report.entries.append(
                CheckEntry(v=v, m=m, lhs=_as_cyclo(lhs.value(v, m), p), rhs=_as_cyclo(rhs.value(v, m), p))
            )
    return report


def dilog_series_lhs(cutoff):
    """sum_k z^k (-1)^k q^{k^2/2} / #GL_k(F_q), as rational functions in s."""

    def coeff(v):
        k = v[0]
        num = Poly.s_power(k * k)
        if k % 2:
            num = -num
        den = Poly.const(1)
        for j in range(k):
            den = den * (Poly.s_power(2 * k) - Poly.s_power(2 * j))
        return RatFun(num, den)

    return ratfun_series(1, cutoff, coeff)


def dilog_check(cutoff=6):
    """The quantum dilogarithm identity, exactly in s = q^{1/2}."""
    lhs = dilog_series_lhs(cutoff)
    s_over = RatFun(Poly.s_power(1), Poly([1, 0, -1]))  # s / (1 - s^2)
    arg = GradedSeries("ratfun", 1, cutoff, {(1,): s_over})
    rhs = pleth_exp(arg)
    report = CheckReport(name="dilog", params={"cutoff": cutoff})
    for v in grades_upto(1, cutoff):
        report.entries.append(
            CheckEntry(v=v, m=None, lhs=lhs.coefficient(v), rhs=rhs.coefficient(v))
        )
    return report
