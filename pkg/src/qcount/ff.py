"""Exact arithmetic in small finite fields, field towers, and Z[zeta_p].

Elements of F_{p^k} are integer codes 0..q-1: the code sum(c_j p^j)
stands for sum(c_j alpha^j) where alpha is a root of the field's modulus.
All arithmetic is table-driven, so everything downstream stays exact.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

_FIELD_CACHE: dict = {}
_EMBED_CACHE: dict = {}

# uint8 tables cap the element count; desk scale never exceeds F_81.
_MAX_Q = 255


def _is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def factor_prime_power(q):
    """Split q into (p, k) with p prime, or raise."""
    if q < 2:
        raise ValueError(f"not a prime power: {q}")
    p = 2
    while q % p:
        p += 1
    k = 0
    m = q
    while m % p == 0:
        m //= p
        k += 1
    if m != 1 or not _is_prime(p):
        raise ValueError(f"not a prime power: {q}")
    return p, k


# -- polynomial helpers over F_p, coefficient tuples low-to-high --------------


def _poly_trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_divmod(num, den, p):
    num = _poly_trim(num)
    den = _poly_trim(den)
    inv_lead = pow(den[-1], p - 2, p) if den[-1] != 1 else 1
    quot = [0] * (max(len(num) - len(den) + 1, 0))
    rem = list(num)
    while len(rem) >= len(den) and rem:
        shift = len(rem) - len(den)
        factor = (rem[-1] * inv_lead) % p
        quot[shift] = factor
        for i, d in enumerate(den):
            rem[shift + i] = (rem[shift + i] - factor * d) % p
        rem = _poly_trim(rem)
    return quot, rem


def _poly_mul(a, b, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def _irreducible(poly, p):
    # Monic input; trial division by every monic poly of degree <= deg/2.
    deg = len(poly) - 1
    for d in range(1, deg // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            den = list(tail) + [1]
            _, rem = _poly_divmod(poly, den, p)
            if not rem:
                return False
    return deg >= 1


def _least_irreducible(p, k):
    # Scan monic x^k + c_{k-1} x^{k-1} + ... + c_0 in lex order on
    # (c_{k-1}, ..., c_0); first irreducible wins.  Deterministic.
    for high_to_low in itertools.product(range(p), repeat=k):
        poly = list(reversed(high_to_low)) + [1]
        if _irreducible(poly, p):
            return tuple(poly)
    raise AssertionError("no irreducible polynomial found")


class FieldSpec:
    """F_{p^k} with a deterministic modulus and dense op tables.

    Do not construct directly; use make_field so instances are shared
    and embeddings can be cached against them.
    """

    def __init__(self, p, k, modulus):
        self.p = p
        self.k = k
        self.q = p**k
        self.modulus = modulus  # monic, low-to-high, length k+1
        if self.q > _MAX_Q:
            raise ValueError(f"field size {self.q} exceeds table limit {_MAX_Q}")
        self._build_tables()

    def _build_tables(self):
        p, k, q = self.p, self.k, self.q
        digits = np.zeros((q, k), dtype=np.int64)
        codes = np.arange(q)
        for j in range(k):
            digits[:, j] = (codes // p**j) % p
        radix = p ** np.arange(k)
        summed = (digits[:, None, :] + digits[None, :, :]) % p
        self.ADD = (summed @ radix).astype(np.uint8)
        self.NEG = (((-digits) % p) @ radix).astype(np.uint8)

        mul = np.zeros((q, q), dtype=np.uint8)
        mod = list(self.modulus)
        for i in range(q):
            ci = _poly_trim(digits[i].tolist())
            for j in range(i, q):
                cj = _poly_trim(digits[j].tolist())
                if ci and cj:
                    _, rem = _poly_divmod(_poly_mul(ci, cj, p), mod, p)
                else:
                    rem = []
                rem = rem + [0] * (k - len(rem))
                code = sum(c * p**t for t, c in enumerate(rem))
                mul[i, j] = code
                mul[j, i] = code
        self.MUL = mul

        inv = np.zeros(q, dtype=np.uint8)
        for i in range(1, q):
            hits = np.nonzero(mul[i] == 1)[0]
            inv[i] = hits[0]
        self.INV = inv
        self.FROB = np.array([self.pow(i, p) for i in range(q)], dtype=np.uint8)

    # integer-code arithmetic, the hot-path API
    def add(self, a, b):
        return int(self.ADD[a, b])

    def sub(self, a, b):
        return int(self.ADD[a, self.NEG[b]])

    def neg(self, a):
        return int(self.NEG[a])

    def mul(self, a, b):
        return int(self.MUL[a, b])

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inversion of zero field element")
        return int(self.INV[a])

    def pow(self, a, e):
        if e < 0:
            a, e = self.inv(a), -e
        out, base = 1, a
        while e:
            if e & 1:
                out = int(self.MUL[out, base])
            base = int(self.MUL[base, base])
            e >>= 1
        return out

    def scalar(self, code):
        return Scalar(self, int(code) % self.q if code >= 0 else self._from_int(code))

    def _from_int(self, n):
        # Reduce an arbitrary integer through the prime subfield.
        return n % self.p

    def from_int(self, n):
        """Image of the rational integer n, i.e. n mod p as a subfield element."""
        return Scalar(self, n % self.p)

    def elements(self):
        return (Scalar(self, c) for c in range(self.q))

    def coeffs(self, code):
        return tuple((code // self.p**j) % self.p for j in range(self.k))

    def __repr__(self):
        return f"F_{self.q}"

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and (self.p, self.k) == (other.p, other.k)

    def __hash__(self):
        return hash((self.p, self.k))


def make_field(p, k=1):
    """Deterministic FieldSpec for F_{p^k}; same (p,k) gives the same modulus."""
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    if k < 1:
        raise ValueError("extension degree must be >= 1")
    key = (p, k)
    if key not in _FIELD_CACHE:
        _FIELD_CACHE[key] = FieldSpec(p, k, _least_irreducible(p, k))
    return _FIELD_CACHE[key]


def field_for_q(q):
    return make_field(*factor_prime_power(q))


class Scalar:
    """A field element: FieldSpec plus integer code."""

    __slots__ = ("field", "code")

    def __init__(self, field, code):
        self.field = field
        self.code = int(code)

    def _coerce(self, other):
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise ValueError("mismatched fields")
            return other.code
        if isinstance(other, int):
            return other % self.field.p
        return NotImplemented

    def __add__(self, other):
        c = self._coerce(other)
        return Scalar(self.field, self.field.add(self.code, c))

    __radd__ = __add__

    def __sub__(self, other):
        c = self._coerce(other)
        return Scalar(self.field, self.field.sub(self.code, c))

    def __rsub__(self, other):
        c = self._coerce(other)
        return Scalar(self.field, self.field.sub(c, self.code))

    def __mul__(self, other):
        c = self._coerce(other)
        return Scalar(self.field, self.field.mul(self.code, c))

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = self._coerce(other)
        return Scalar(self.field, self.field.mul(self.code, self.field.inv(c)))

    def __neg__(self):
        return Scalar(self.field, self.field.neg(self.code))

    def __pow__(self, e):
        return Scalar(self.field, self.field.pow(self.code, e))

    def inverse(self):
        return Scalar(self.field, self.field.inv(self.code))

    def __eq__(self, other):
        if isinstance(other, int):
            return self.code == other % self.field.p
        return (
            isinstance(other, Scalar)
            and self.field == other.field
            and self.code == other.code
        )

    def __hash__(self):
        return hash((self.field.p, self.field.k, self.code))

    def __bool__(self):
        return self.code != 0

    @property
    def coeffs(self):
        return self.field.coeffs(self.code)

    def __repr__(self):
        return f"Scalar({self.field!r}, {self.code})"


def field_arith(a, b, op):
    """Functional form of Scalar arithmetic: op in {add, sub, mul, div, inv, neg, pow}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "inv":
        return a.inverse()
    if op == "neg":
        return -a
    if op == "pow":
        return a**b
    raise ValueError(f"unknown op {op!r}")


# -- towers -------------------------------------------------------------------


class Embedding:
    """The canonical embedding F_{p^k} -> F_{p^{kn}} via the least root."""

    def __init__(self, base, ext):
        if base.p != ext.p or ext.k % base.k != 0:
            raise ValueError(f"{ext!r} is not an extension of {base!r}")
        self.base = base
        self.ext = ext
        self.degree = ext.k // base.k
        root = None
        for cand in range(ext.q):
            acc = 0
            for c in reversed(base.modulus):
                acc = ext.add(ext.mul(acc, cand), c % base.p)
            if acc == 0:
                root = cand
                break
        assert root is not None, "modulus has a root in every extension"
        powers = [1]
        for _ in range(base.k - 1):
            powers.append(ext.mul(powers[-1], root))
        table = np.zeros(base.q, dtype=np.uint8)
        for code in range(base.q):
            acc = 0
            for c, w in zip(base.coeffs(code), powers):
                acc = ext.add(acc, ext.mul(c, w))
            table[code] = acc
        self.map = table
        self.inv = {int(v): c for c, v in enumerate(table)}
        assert len(self.inv) == base.q, "embedding must be injective"

    def __call__(self, a):
        if isinstance(a, Scalar):
            if a.field != self.base:
                raise ValueError("element not in the base field")
            return Scalar(self.ext, int(self.map[a.code]))
        return int(self.map[a])

    def down(self, a):
        """Partial inverse; raises if a is outside the embedded subfield."""
        code = a.code if isinstance(a, Scalar) else a
        if code not in self.inv:
            raise ValueError("element not in the embedded subfield")
        return Scalar(self.base, self.inv[code])


def embedding(base, ext):
    key = (base.p, base.k, ext.k)
    if key not in _EMBED_CACHE:
        _EMBED_CACHE[key] = Embedding(base, ext)
    return _EMBED_CACHE[key]


def extension_of(field, n):
    """F_{q^n} over F_q, with the connecting embedding precomputed."""
    ext = make_field(field.p, field.k * n)
    embedding(field, ext)
    return ext


def rel_trace(a, target):
    """Tr_{F_{q^n}/F_q}(a) = sum of a^{q^j}, landed back in the target field."""
    big = a.field
    if big == target:
        return a
    if big.p != target.p or big.k % target.k != 0:
        raise ValueError(f"{target!r} is not a subfield of {big!r}")
    n = big.k // target.k
    qt = target.q
    acc = 0
    for j in range(n):
        acc = big.add(acc, big.pow(a.code, qt**j))
    return embedding(target, big).down(acc)


def absolute_trace(a):
    """Tr down to F_p, returned as an integer exponent 0..p-1."""
    f = a.field
    acc, frob = 0, a.code
    for _ in range(f.k):
        acc = f.add(acc, frob)
        frob = int(f.FROB[frob])
    assert acc < f.p, "trace must land in the prime subfield"
    return acc


# -- cyclotomic integers ------------------------------------------------------


class CycloInt:
    """Element of Z[zeta_p], coordinates in the basis 1, zeta, ..., zeta^{p-2}.

    The relation 1 + zeta + ... + zeta^{p-1} = 0 normalizes everything;
    equality is coordinate-wise.  For p = 2 this is just Z with zeta = -1.
    """

    __slots__ = ("p", "coords")

    def __init__(self, p, coords):
        coords = tuple(int(c) for c in coords)
        if len(coords) != p - 1:
            raise ValueError(f"need {p - 1} coordinates for p={p}")
        self.p = p
        self.coords = coords

    @classmethod
    def zero(cls, p):
        return cls(p, (0,) * (p - 1))

    @classmethod
    def one(cls, p):
        return cls(p, (1,) + (0,) * (p - 2))

    @classmethod
    def integer(cls, p, n):
        return cls(p, (n,) + (0,) * (p - 2))

    @classmethod
    def zeta_pow(cls, p, e):
        e %= p
        if e < p - 1:
            coords = [0] * (p - 1)
            coords[e] = 1
            return cls(p, coords)
        return cls(p, (-1,) * (p - 1))

    def _check(self, other):
        if self.p != other.p:
            raise ValueError("mismatched cyclotomic levels")

    def __add__(self, other):
        self._check(other)
        return CycloInt(self.p, tuple(x + y for x, y in zip(self.coords, other.coords)))

    def __sub__(self, other):
        self._check(other)
        return CycloInt(self.p, tuple(x - y for x, y in zip(self.coords, other.coords)))

    def __neg__(self):
        return CycloInt(self.p, tuple(-x for x in self.coords))

    def __mul__(self, other):
        if isinstance(other, int):
            return CycloInt(self.p, tuple(other * x for x in self.coords))
        self._check(other)
        p = self.p
        acc = [0] * p
        for i, x in enumerate(self.coords):
            if x:
                for j, y in enumerate(other.coords):
                    if y:
                        acc[(i + j) % p] += x * y
        top = acc[p - 1]
        return CycloInt(p, tuple(acc[j] - top for j in range(p - 1)))

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            isinstance(other, CycloInt)
            and self.p == other.p
            and self.coords == other.coords
        )

    def __hash__(self):
        return hash((self.p, self.coords))

    def is_zero(self):
        return all(c == 0 for c in self.coords)

    def rational_part(self):
        """The integer n if self = n, else None."""
        if any(self.coords[1:]):
            return None
        return self.coords[0]

    def to_rational(self):
        return CycloRational(self.p, [Fraction(c) for c in self.coords])

    def __str__(self):
        return _cyclo_str(self.coords)

    def __repr__(self):
        return f"CycloInt(p={self.p}, {list(self.coords)})"


class CycloRational:
    """Q(zeta_p) value: CycloInt with Fraction coordinates.

    Carries the stacky sums and plethystic coefficients, where division
    by automorphism orders and by n is unavoidable.
    """

    __slots__ = ("p", "coords")

    def __init__(self, p, coords):
        coords = tuple(Fraction(c) for c in coords)
        if len(coords) != p - 1:
            raise ValueError(f"need {p - 1} coordinates for p={p}")
        self.p = p
        self.coords = coords

    @classmethod
    def zero(cls, p):
        return cls(p, (0,) * (p - 1))

    @classmethod
    def one(cls, p):
        return cls(p, (1,) + (0,) * (p - 2))

    @classmethod
    def of(cls, value, p):
        """Coerce CycloInt, CycloRational, int, or Fraction into Q(zeta_p)."""
        if isinstance(value, CycloRational):
            if value.p != p:
                raise ValueError("mismatched cyclotomic levels")
            return value
        if isinstance(value, CycloInt):
            if value.p != p:
                raise ValueError("mismatched cyclotomic levels")
            return value.to_rational()
        if isinstance(value, (int, Fraction)):
            return cls(p, (Fraction(value),) + (Fraction(0),) * (p - 2))
        raise TypeError(f"cannot coerce {type(value).__name__}")

    def _check(self, other):
        if self.p != other.p:
            raise ValueError("mismatched cyclotomic levels")

    def __add__(self, other):
        other = CycloRational.of(other, self.p)
        return CycloRational(
            self.p, tuple(x + y for x, y in zip(self.coords, other.coords))
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = CycloRational.of(other, self.p)
        return CycloRational(
            self.p, tuple(x - y for x, y in zip(self.coords, other.coords))
        )

    def __neg__(self):
        return CycloRational(self.p, tuple(-x for x in self.coords))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CycloRational(self.p, tuple(other * x for x in self.coords))
        other = CycloRational.of(other, self.p)
        p = self.p
        acc = [Fraction(0)] * p
        for i, x in enumerate(self.coords):
            if x:
                for j, y in enumerate(other.coords):
                    if y:
                        acc[(i + j) % p] += x * y
        top = acc[p - 1]
        return CycloRational(p, tuple(acc[j] - top for j in range(p - 1)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            inv = Fraction(1, 1) / Fraction(other)
            return CycloRational(self.p, tuple(inv * x for x in self.coords))
        raise TypeError("division only by rational scalars")

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, CycloInt)):
            other = CycloRational.of(other, self.p)
        return (
            isinstance(other, CycloRational)
            and self.p == other.p
            and self.coords == other.coords
        )

    def __hash__(self):
        return hash((self.p, self.coords))

    def is_zero(self):
        return all(c == 0 for c in self.coords)

    def __str__(self):
        return _cyclo_str(self.coords)

    def __repr__(self):
        return f"CycloRational(p={self.p}, {[str(c) for c in self.coords]})"


def _cyclo_str(coords):
    """Render coordinates in the basis 1, zeta, ..., zeta^{p-2}."""
    terms = []
    for i, c in enumerate(coords):
        if not c:
            continue
        if i == 0:
            terms.append(str(c))
        else:
            head = "" if c == 1 else "-" if c == -1 else f"{c}*"
            terms.append(f"{head}zeta" + (f"^{i}" if i > 1 else ""))
    if not terms:
        return "0"
    return " + ".join(terms).replace("+ -", "- ")


def cyclo_arith(a, b, op):
    """op in {add, mul, scale}; scale multiplies by the integer b."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "scale":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def additive_character(a):
    """psi(a) = zeta_p ^ (absolute trace of a), exactly in Z[zeta_p]."""
    return CycloInt.zeta_pow(a.field.p, absolute_trace(a))
