"""Exact scalar tower: rationals -> polynomials over a variable registry -> rational functions.

Polynomials are sympy sparse ``PolyElement`` objects over QQ in a ring whose
generators are, in this order, the phase coordinates, the exponential
extension variables and the multiplier jets ``lam_k``.  The ring uses
graded reverse-lexicographic order, so constraint reductions never touch
jet variables.  ``RatFunc`` is a thin, canonically normalized num/den pair
with fast paths for polynomial (den == 1) arithmetic.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache

from sympy.polys.domains import QQ
from sympy.polys.groebnertools import groebner as _sympy_groebner
from sympy.polys.monomials import monomial_div, monomial_lcm
from sympy.polys.orderings import grevlex
from sympy.polys.rings import PolyRing

from .errors import (
    InconsistentConstraints,
    JetBudgetExceeded,
    NonRegularElement,
    ParseError,
)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def jet_name(family, k):
    return f"{family}_{k}"


class ExtVar:
    """Transcendental extension ``name = exp(exponent)``; ``exponent`` is a polynomial literal in phase variables."""

    __slots__ = ("name", "exponent")

    def __init__(self, name, exponent):
        self.name = name
        self.exponent = exponent.strip()

    def __eq__(self, other):
        return isinstance(other, ExtVar) and (self.name, self.exponent) == (other.name, other.exponent)

    def __hash__(self):
        return hash((self.name, self.exponent))

    def __repr__(self):
        return f"ExtVar({self.name!r}, exp({self.exponent}))"


@lru_cache(maxsize=None)
def _make_ring(names):
    return PolyRing(names, QQ, grevlex)


class VarRegistry:
    """Ordered variable registry: phase coordinates, ext vars, multiplier jet families.

    Jets ``family_k`` exist for ``k = 0..jet_order``; ``with_jet_order`` returns
    a registry with a larger budget and :meth:`lift` moves objects across.
    """

    def __init__(self, phase, families=(), ext=(), jet_order=0):
        self.phase = tuple(phase)
        self.families = tuple(families)
        self.ext = tuple(ext)
        self.jet_order = int(jet_order)
        if self.jet_order < 0:
            raise ValueError("jet_order must be >= 0")
        names = list(self.phase) + [e.name for e in self.ext]
        names += [jet_name(f, k) for f in self.families for k in range(self.jet_order + 1)]
        for nm in list(self.phase) + list(self.families) + [e.name for e in self.ext]:
            if not _IDENT.match(nm):
                raise ValueError(f"invalid variable name {nm!r}")
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate variable names: {dup}")
        self.names = tuple(names)
        self.ring = _make_ring(self.names)
        self._index = {n: i for i, n in enumerate(self.names)}
        self.n = len(self.phase)
        self._ext_data = {}
        for e in self.ext:
            q = parse_poly(e.exponent, self, allowed=self.phase)
            u = self.gen(e.name)
            # derivative rule  d u / d x^i = (d q / d x^i) * u
            self._ext_data[e.name] = (q, tuple(q.diff(self.gen(x)) * u for x in self.phase))

    # identity -------------------------------------------------------------
    def _key(self):
        return (self.phase, self.families, self.ext, self.jet_order)

    def __eq__(self, other):
        return isinstance(other, VarRegistry) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return (f"VarRegistry(phase={list(self.phase)}, families={list(self.families)}, "
                f"ext={list(self.ext)}, jet_order={self.jet_order})")

    # variables ------------------------------------------------------------
    def gen(self, name):
        try:
            return self.ring.gens[self._index[name]]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def index(self, name):
        return self._index[name]

    def jet(self, family, k):
        if k > self.jet_order:
            raise JetBudgetExceeded(f"jet {jet_name(family, k)} beyond budget {self.jet_order}")
        return self.gen(jet_name(family, k))

    def phase_gens(self):
        return [self.gen(x) for x in self.phase]

    def ext_derivatives(self, name):
        return self._ext_data[name][1]

    def ext_exponent(self, name):
        return self._ext_data[name][0]

    def const(self, c):
        return RatFunc(self.ring(_to_qq(c)))

    def zero(self):
        return RatFunc(self.ring.zero)

    def one(self):
        return RatFunc(self.ring.one)

    def var(self, name):
        return RatFunc(self.gen(name))

    def with_jet_order(self, k):
        if k == self.jet_order:
            return self
        return VarRegistry(self.phase, self.families, self.ext, k)

    def with_families(self, families):
        return VarRegistry(self.phase, families, self.ext, self.jet_order)

    def lift(self, obj):
        """Convert a Poly/RatFunc (or nested tuple/list of them) into this registry's ring."""
        if isinstance(obj, RatFunc):
            if obj.num.ring is self.ring:
                return obj
            return RatFunc(_set_ring(obj.num, self.ring), _set_ring(obj.den, self.ring), _normalized=True)
        if isinstance(obj, (tuple, list)):
            return type(obj)(self.lift(o) for o in obj)
        if hasattr(obj, "ring"):
            return _set_ring(obj, self.ring)
        return obj

    # calculus -------------------------------------------------------------
    def partial_poly(self, p, i):
        """d p / d x^i (phase coordinate ``i``) with the ext-var chain rule."""
        x = self.ring.gens[i]
        out = p.diff(x)
        for e in self.ext:
            u = self.gen(e.name)
            dp_du = p.diff(u)
            if dp_du:
                du = self._ext_data[e.name][1][i]
                if du:
                    out += dp_du * du
        return out

    def partial(self, f, i):
        f = as_ratfunc(f, self)
        if f.den == 1:
            return RatFunc(self.partial_poly(f.num, i), _normalized=True)
        dn = self.partial_poly(f.num, i)
        dd = self.partial_poly(f.den, i)
        return _quotient_rule(f.num, f.den, dn, dd)

    def diff_var(self, f, name):
        """Plain partial derivative with respect to a ring generator (no chain rule)."""
        f = as_ratfunc(f, self)
        x = self.gen(name)
        if f.den == 1:
            return RatFunc(f.num.diff(x), _normalized=True)
        return _quotient_rule(f.num, f.den, f.num.diff(x), f.den.diff(x))

    def jet_shift_poly(self, p):
        out = self.ring.zero
        for fam in self.families:
            for k in range(self.jet_order + 1):
                lam = self.gen(jet_name(fam, k))
                d = p.diff(lam)
                if d:
                    if k == self.jet_order:
                        raise JetBudgetExceeded(
                            f"jet shift of {jet_name(fam, k)} exceeds jet budget {self.jet_order}")
                    out += d * self.gen(jet_name(fam, k + 1))
        return out

    def jet_shift(self, f):
        """The derivation on jets: lam_k -> lam_{k+1}, phase variables and ext vars are constants."""
        f = as_ratfunc(f, self)
        if f.den == 1:
            return RatFunc(self.jet_shift_poly(f.num), _normalized=True)
        dn = self.jet_shift_poly(f.num)
        dd = self.jet_shift_poly(f.den)
        return _quotient_rule(f.num, f.den, dn, dd)

    def max_jet(self, f):
        """Highest jet order present in f (-1 if jet free)."""
        f = as_ratfunc(f, self)
        best = -1
        for p in (f.num, f.den):
            for monom in p.monoms():
                for fam in self.families:
                    for k in range(self.jet_order, best, -1):
                        if monom[self._index[jet_name(fam, k)]]:
                            best = k
                            break
        return best

    def is_phase_only(self, f):
        return self.max_jet(f) < 0

    # parsing / printing ---------------------------------------------------
    def parse(self, text):
        return parse_ratfunc(text, self)

    def parse_poly(self, text):
        return parse_poly(text, self)


def _quotient_rule(n, d, dn, dd):
    """(n/d)' in lowest terms."""
    return RatFunc(dn * d - n * dd, d * d)


_RING_MAPS = {}


def _set_ring(p, ring):
    if p.ring is ring:
        return p
    missing = [s for s in p.ring.symbols if s not in ring.symbols]
    if missing:
        used = set()
        for monom in p.monoms():
            for i, e in enumerate(monom):
                if e:
                    used.add(p.ring.symbols[i])
        lost = [str(s) for s in missing if s in used]
        if lost:
            raise JetBudgetExceeded(f"variables {lost} not present in target registry")
        idx = [ring.symbols.index(s) if s in ring.symbols else None for s in p.ring.symbols]
        terms = {}
        for monom, c in p.terms():
            m = [0] * ring.ngens
            for i, e in enumerate(monom):
                if e:
                    m[idx[i]] = e
            terms[tuple(m)] = c
        return ring.from_dict(terms)
    key = (id(p.ring), id(ring))
    idx = _RING_MAPS.get(key)
    if idx is None:
        idx = [ring.symbols.index(s) for s in p.ring.symbols]
        _RING_MAPS[key] = idx
    n = ring.ngens
    out = ring.zero.copy()
    for monom, c in p.items():
        m = [0] * n
        for i, e in enumerate(monom):
            if e:
                m[idx[i]] = e
        out[tuple(m)] = c
    return out


def _to_qq(c):
    if isinstance(c, Fraction):
        return QQ(c.numerator, c.denominator)
    return QQ.convert(c)


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------


class RatFunc:
    """num/den over the registry ring; den is monic and gcd(num, den) = 1."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None, _normalized=False):
        self._hash = None
        ring = num.ring
        if den is None:
            self.num, self.den = num, ring.one
            return
        if _normalized:
            self.num, self.den = num, den
            return
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            self.num, self.den = ring.zero, ring.one
            return
        if den.is_ground:
            c = den.LC
            self.num, self.den = num.quo_ground(c), ring.one
            return
        g = num.gcd(den)
        if g != 1:
            num = num.exquo(g)
            den = den.exquo(g)
        lc = den.LC
        if lc != 1:
            num = num.quo_ground(lc)
            den = den.quo_ground(lc)
        self.num, self.den = num, den

    @property
    def ring(self):
        return self.num.ring

    def _coerce(self, other):
        if isinstance(other, RatFunc):
            return other
        if hasattr(other, "ring") and other.ring is self.num.ring:
            return RatFunc(other)
        if isinstance(other, (int, Fraction)) or QQ.of_type(other):
            return RatFunc(self.num.ring(_to_qq(other)))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not o.num:
            return self
        if not self.num:
            return o
        d1, d2 = self.den, o.den
        if d1 == 1 and d2 == 1:
            return RatFunc(self.num + o.num, _normalized=True)
        if d2 == 1:
            return RatFunc(self.num + o.num * d1, d1, _normalized=True)
        if d1 == 1:
            return RatFunc(self.num * d2 + o.num, d2, _normalized=True)
        if d1 == d2:
            return RatFunc(self.num + o.num, d1)
        # Henrici: only gcds of denominators and of the sum with their common part
        g = d1.gcd(d2)
        if g == 1:
            return RatFunc(self.num * d2 + o.num * d1, d1 * d2, _normalized=True)
        e1, e2 = d1.exquo(g), d2.exquo(g)
        t = self.num * e2 + o.num * e1
        if not t:
            return RatFunc(t.ring.zero)
        h = t.gcd(g)
        if h != 1:
            t, g = t.exquo(h), g.exquo(h)
        return RatFunc._monic(t, e1 * e2 * g)

    @staticmethod
    def _monic(num, den):
        lc = den.LC
        if lc != 1:
            num, den = num.quo_ground(lc), den.quo_ground(lc)
        if den.is_ground:
            return RatFunc(num, _normalized=True)
        return RatFunc(num, den, _normalized=True)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, _normalized=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not self.num or not o.num:
            return RatFunc(self.num.ring.zero)
        if self.den == 1 and o.den == 1:
            return RatFunc(self.num * o.num, _normalized=True)
        if o.den == 1 and o.num.is_ground:
            return RatFunc(self.num * o.num, self.den, _normalized=True)
        if self.den == 1 and self.num.is_ground:
            return RatFunc(self.num * o.num, o.den, _normalized=True)
        n1, d1, n2, d2 = self.num, self.den, o.num, o.den
        if d2 != 1:
            g = n1.gcd(d2)
            if g != 1:
                n1, d2 = n1.exquo(g), d2.exquo(g)
        if d1 != 1:
            g = n2.gcd(d1)
            if g != 1:
                n2, d1 = n2.exquo(g), d1.exquo(g)
        return RatFunc._monic(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def inverse(self):
        if not self.num:
            raise ZeroDivisionError("inverse of zero")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        return RatFunc(self.num ** k, self.den ** k, _normalized=True)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __bool__(self):
        return bool(self.num)

    def is_zero(self):
        return not self.num

    def is_poly(self):
        return self.den == 1

    def is_const(self):
        return self.den == 1 and self.num.is_ground

    def const_value(self):
        """The rational constant as a Fraction (only when is_const())."""
        c = self.num.LC if self.num else QQ(0)
        return Fraction(int(c.numerator), int(c.denominator))

    def __repr__(self):
        return f"RatFunc({to_literal(self)})"

    def __str__(self):
        return to_literal(self)


def as_ratfunc(f, reg):
    if isinstance(f, RatFunc):
        return f
    if hasattr(f, "ring"):
        return RatFunc(f)
    return reg.const(f)


# ---------------------------------------------------------------------------
# literal grammar
# ---------------------------------------------------------------------------


def _fmt_coeff(c):
    num, den = int(c.numerator), int(c.denominator)
    return str(num) if den == 1 else f"{num}/{den}"


def poly_literal(p):
    if not p:
        return "0"
    names = p.ring.symbols
    out = []
    for monom, c in p.terms():
        factors = []
        for i, e in enumerate(monom):
            if e == 1:
                factors.append(str(names[i]))
            elif e:
                factors.append(f"{names[i]}^{e}")
        neg = c < 0
        a = -c if neg else c
        if not factors:
            body = _fmt_coeff(a)
        elif a == 1:
            body = "*".join(factors)
        else:
            body = _fmt_coeff(a) + "*" + "*".join(factors)
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def to_literal(f):
    if isinstance(f, RatFunc):
        if f.den == 1:
            return poly_literal(f.num)
        n = poly_literal(f.num)
        d = poly_literal(f.den)
        if len(f.num) > 1:
            n = f"({n})"
        if len(f.den) > 1 or not f.den.is_term:
            d = f"({d})"
        return f"{n}/{d}"
    return poly_literal(f)


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


def _tokenize(text):
    pos = 0
    toks = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise ParseError(f"unexpected character {text[col - 1]!r} in {text!r}", 1, col)
        start = m.start(m.lastindex) + 1
        if m.group(1):
            toks.append(("num", int(m.group(1)), start))
        elif m.group(2):
            toks.append(("id", m.group(2), start))
        else:
            op = "^" if m.group(3) == "**" else m.group(3)
            toks.append(("op", op, start))
        pos = m.end()
    toks.append(("end", None, len(text) + 1))
    return toks


class _Parser:
    def __init__(self, text, reg, allowed):
        self.text = text
        self.reg = reg
        self.allowed = allowed
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(f"{msg} in {self.text!r}", 1, tok[2])

    def parse(self):
        if self.peek()[0] == "end":
            self.error("empty expression")
        v = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected token {self.peek()[1]!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op, tok = self.take()[1], self.peek()
            w = self.unary()
            if op == "*":
                v = v * w
            else:
                if w.is_zero():
                    self.error("division by zero", tok)
                v = v / w
        return v

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            v = self.unary()
            return -v if t[1] == "-" else v
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            t = self.take()
            if t[0] != "num":
                self.error("exponent must be a non-negative integer", t)
            base = base ** t[1]
        return base

    def atom(self):
        t = self.take()
        if t[0] == "num":
            return RatFunc(self.reg.ring(t[1]))
        if t[0] == "id":
            name = t[1]
            if name not in self.reg._index or (self.allowed is not None and name not in self.allowed):
                raise ParseError(f"unknown variable {name!r} in {self.text!r}", 1, t[2])
            return RatFunc(self.reg.gen(name))
        if t[0] == "op" and t[1] == "(":
            v = self.expr()
            if self.take()[1] != ")":
                self.error("expected ')'", self.toks[self.i - 1])
            return v
        self.error(f"unexpected token {t[1]!r}", t)


def parse_ratfunc(text, reg, allowed=None):
    return _Parser(str(text), reg, allowed).parse()


def parse_poly(text, reg, allowed=None):
    f = parse_ratfunc(text, reg, allowed)
    if f.den != 1:
        raise ParseError(f"expected a polynomial, got a rational function: {text!r}", 1, 1)
    return f.num


# ---------------------------------------------------------------------------
# constraint ideals
# ---------------------------------------------------------------------------


def primitive_constraint(p, reg):
    """Strip ext-var monomial factors (exp never vanishes) and make monic."""
    if not p:
        return p
    ext_idx = [reg.index(e.name) for e in reg.ext]
    if ext_idx:
        mins = {i: min(m[i] for m in p.monoms()) for i in ext_idx}
        if any(mins.values()):
            shift = [0] * reg.ring.ngens
            for i, e in mins.items():
                shift[i] = e
            shift = tuple(shift)
            p = reg.ring.from_dict({monomial_div(m, shift): c for m, c in p.terms()})
    return p.monic()


class ConstraintIdeal:
    """Ideal generated by constraints, with a cached reduced Groebner basis."""

    def __init__(self, reg, generators, gb=None):
        self.reg = reg
        self.generators = tuple(reg.lift(g) for g in generators if g)
        if gb is None:
            gb = _sympy_groebner(list(self.generators), reg.ring) if self.generators else []
        self.gb = tuple(gb)
        self.order = "grevlex"
        self._tracked = None
        if any(g.is_ground and g for g in self.gb):
            raise InconsistentConstraints(
                "contradictory constraints: the ideal contains a nonzero constant ("
                + ", ".join(poly_literal(g) for g in self.generators) + ")")

    def __repr__(self):
        return f"ConstraintIdeal([{', '.join(poly_literal(g) for g in self.generators)}])"

    def is_zero_ideal(self):
        return not self.gb

    def same_ideal(self, other):
        a = sorted(poly_literal(g) for g in self.gb)
        b = sorted(poly_literal(other.reg.lift(g) if other.reg != self.reg else g) for g in other.gb)
        if other.reg != self.reg:
            b = sorted(poly_literal(self.reg.lift(g)) for g in other.gb)
        return a == b

    def with_registry(self, reg):
        if reg == self.reg:
            return self
        return ConstraintIdeal(reg, [reg.lift(g) for g in self.generators], [reg.lift(g) for g in self.gb])

    def extended(self, more):
        return ConstraintIdeal(self.reg, list(self.generators) + [self.reg.lift(m) for m in more])

    # membership -----------------------------------------------------------
    def reduce(self, p):
        if not self.gb or not p:
            return p
        return p.rem(list(self.gb))

    def contains(self, p):
        return not self.reduce(p)

    def normal_form(self, f):
        if isinstance(f, RatFunc):
            if not self.gb:
                return f
            den = self.reduce(f.den)
            if not den:
                raise NonRegularElement(
                    f"non-regular element of F_I: denominator {poly_literal(f.den)} lies in the constraint ideal")
            if f.den == 1:
                return RatFunc(self.reduce(f.num), _normalized=True)
            return RatFunc(self.reduce(f.num), f.den)
        return self.reduce(f)

    def is_trivial(self, f):
        if isinstance(f, RatFunc):
            if self.gb and not self.reduce(f.den):
                raise NonRegularElement(
                    f"non-regular element of F_I: denominator {poly_literal(f.den)} lies in the constraint ideal")
            return not self.reduce(f.num)
        return not self.reduce(f)

    def radical_contains(self, p):
        """f in sqrt(I) via 1 in <I, 1 - t f> (Rabinowitsch)."""
        if not p:
            return True
        if not self.gb:
            return False
        if not self.reduce(p):
            return True
        if p.is_ground:
            return False
        ring = self.reg.ring
        ext_ring = _make_ring(tuple(str(s) for s in ring.symbols) + ("_rabinowitsch",))
        t = ext_ring.gens[-1]
        gens = [g.set_ring(ext_ring) for g in self.gb] + [1 - t * p.set_ring(ext_ring)]
        G = _sympy_groebner(gens, ext_ring)
        return len(G) == 1 and G[0].is_ground

    # cofactors ------------------------------------------------------------
    def lift(self, p):
        """Cofactors c with p = sum c_i * generators[i], or None when p is not a member."""
        if not p:
            return [self.reg.ring.zero for _ in self.generators]
        if not self.generators:
            return None
        if self._tracked is None:
            self._tracked = _tracked_buchberger(self.generators, self.reg.ring)
        rem, cof = _tracked_reduce(p, self._tracked, len(self.generators), self.reg.ring)
        if rem:
            return None
        return cof


def groebner(gens, reg, order="grevlex"):
    if order != "grevlex":
        raise ValueError("only graded reverse-lexicographic order is supported")
    gens = [g for g in gens if g]
    if not gens:
        raise ValueError("groebner needs at least one nonzero generator")
    return ConstraintIdeal(reg, gens)


def normal_form(f, ideal):
    return ideal.normal_form(f)


def is_trivial(f, ideal):
    return ideal.is_trivial(f)


def _term(ring, monom, coeff):
    return ring.from_dict({monom: coeff})


def _tracked_reduce(p, basis, ngen, ring):
    cof = [ring.zero] * ngen
    rem = ring.zero
    p = p.copy()
    while p:
        lm, lc = p.LM, p.LC
        for g, gc in basis:
            q = monomial_div(lm, g.LM)
            if q is not None:
                t = _term(ring, q, lc / g.LC)
                p = p - t * g
                for i in range(ngen):
                    if gc[i]:
                        cof[i] += t * gc[i]
                break
        else:
            lt = _term(ring, lm, lc)
            rem += lt
            p = p - lt
    return rem, cof


def _tracked_buchberger(gens, ring):
    n = len(gens)
    basis = []
    for i, g in enumerate(gens):
        c = [ring.zero] * n
        c[i] = ring.one
        basis.append((g, c))
    pairs = [(i, j) for j in range(len(basis)) for i in range(j)]
    while pairs:
        i, j = pairs.pop(0)
        (f, fc), (g, gc) = basis[i], basis[j]
        lcm = monomial_lcm(f.LM, g.LM)
        if lcm == tuple(a + b for a, b in zip(f.LM, g.LM)):
            continue
        tf = _term(ring, monomial_div(lcm, f.LM), 1 / f.LC)
        tg = _term(ring, monomial_div(lcm, g.LM), 1 / g.LC)
        s = tf * f - tg * g
        sc = [tf * a - tg * b for a, b in zip(fc, gc)]
        rem, rc = _tracked_reduce(s, basis, n, ring)
        if rem:
            k = len(basis)
            basis.append((rem, [a - b for a, b in zip(sc, rc)]))
            pairs.extend((m, k) for m in range(k))
    return basis
