"""Twisted Laurent arithmetic over the embedded Grothendieck lattice.

Monomials X^a (a an integer vector of length m) multiply by

    X^a * X^b = v^{Lambda(a*, b*)} X^{a+b}

with the integral skew form Lambda of the pair, so the twist exponent is the
precomputed bilinear form pair.twist.  Coefficients live in Z[v^{ated 1}]
(BarLaurent); the bar involution sends v to v^{-1} and fixes monomials.

GradedSeries adds precision tracking for the completed torus: each monomial
carries the grade psi(a) = u' . Btilde^{-1} a (a rational with denominator
dividing d, stored d-scaled as an integer), and a series of precision P
promises that every monomial of grade <= P is present with its exact
coefficient.  Operations may lower but never overstate precision.  Elements
with a unique grade-minimal corner term can be inverted by a Neumann series
on the positively graded offsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    InsufficientPrecision,
    NotConic,
    NoUniqueCorner,
    PairMismatch,
)
from .kzero import (
    CompatiblePair,
    is_effective,
    mat_vec,
    psi_scaled,
    twist_form,
    vec_add,
    vec_scale,
)


class BarLaurent:
    """A finite Z-combination of integer powers of v."""

    __slots__ = ("_c",)

    def __init__(self, coeffs=None):
        c = {}
        if coeffs:
            for e, x in coeffs.items():
                if x:
                    c[int(e)] = c.get(int(e), 0) + int(x)
        self._c = {e: x for e, x in c.items() if x}

    @classmethod
    def nu(cls, exp: int = 1, coeff: int = 1) -> "BarLaurent":
        return cls({exp: coeff})

    @classmethod
    def const(cls, n: int) -> "BarLaurent":
        return cls({0: n})

    def items(self):
        return sorted(self._c.items())

    def __bool__(self):
        return bool(self._c)

    def __eq__(self, other):
        if isinstance(other, int):
            other = BarLaurent.const(other)
        return isinstance(other, BarLaurent) and self._c == other._c

    def __hash__(self):
        return hash(tuple(sorted(self._c.items())))

    def __add__(self, other):
        if isinstance(other, int):
            other = BarLaurent.const(other)
        out = dict(self._c)
        for e, x in other._c.items():
            out[e] = out.get(e, 0) + x
        return BarLaurent(out)

    __radd__ = __add__

    def __neg__(self):
        return BarLaurent({e: -x for e, x in self._c.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = BarLaurent.const(other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return BarLaurent({e: x * other for e, x in self._c.items()})
        out: dict[int, int] = {}
        for e1, x1 in self._c.items():
            for e2, x2 in other._c.items():
                e = e1 + e2
                out[e] = out.get(e, 0) + x1 * x2
        return BarLaurent(out)

    __rmul__ = __mul__

    def shift(self, k: int) -> "BarLaurent":
        """Multiplication by v^k."""
        return BarLaurent({e + k: x for e, x in self._c.items()})

    def bar(self) -> "BarLaurent":
        return BarLaurent({-e: x for e, x in self._c.items()})

    def is_bar_invariant(self) -> bool:
        return self.bar() == self

    def min_exp(self):
        return min(self._c) if self._c else None

    def max_exp(self):
        return max(self._c) if self._c else None

    def is_unit_monomial(self) -> bool:
        """True when the coefficient is a single +-v^j."""
        return len(self._c) == 1 and abs(next(iter(self._c.values()))) == 1

    def in_nonneg_powers(self) -> bool:
        return all(e >= 0 for e in self._c)

    def evaluate_sqrt(self, q: int) -> "QuadraticNumber":
        """Exact value at v = sqrt(q) in Q(sqrt(q))."""
        a = Fraction(0)
        b = Fraction(0)
        for e, x in self._c.items():
            if e % 2 == 0:
                a += x * Fraction(q) ** (e // 2)
            else:
                b += x * Fraction(q) ** ((e - 1) // 2)
        return QuadraticNumber(a, b, q)

    def __repr__(self):
        if not self._c:
            return "0"
        parts = []
        for e, x in self.items():
            if e == 0:
                parts.append(f"{x}")
            else:
                mono = "v" if e == 1 else f"v^{e}"
                if x == 1:
                    parts.append(mono)
                elif x == -1:
                    parts.append(f"-{mono}")
                else:
                    parts.append(f"{x}*{mono}")
        out = " + ".join(parts)
        return out.replace("+ -", "- ")


BL_ONE = BarLaurent.const(1)
BL_ZERO = BarLaurent()


def qint(n: int, step: int) -> BarLaurent:
    """The quantum integer [n] in base v^step: 1 + v^step + ... + v^{step(n-1)};
    zero for n <= 0."""
    if n <= 0:
        return BarLaurent()
    return BarLaurent({step * k: 1 for k in range(n)})


@dataclass(frozen=True)
class QuadraticNumber:
    """Exact a + b*sqrt(q) with rational a, b."""

    a: Fraction
    b: Fraction
    q: int

    def __add__(self, other):
        self._same(other)
        return QuadraticNumber(self.a + other.a, self.b + other.b, self.q)

    def __mul__(self, other):
        self._same(other)
        return QuadraticNumber(
            self.a * other.a + self.q * self.b * other.b,
            self.a * other.b + self.b * other.a,
            self.q,
        )

    def _same(self, other):
        if self.q != other.q:
            raise ValueError("mixed base prime powers")

    def is_integer(self) -> bool:
        return self.b == 0 and self.a.denominator == 1

    def __repr__(self):
        if self.b == 0:
            return f"{self.a}"
        return f"{self.a} + {self.b}*sqrt({self.q})"


# ---------------------------------------------------------------------------

def _mul_terms(pair, ta, tb, cap):
    """Twisted product of term dicts.

    The grade is additive, so with a cap only pairs with
    psi(a) + psi(b) <= cap are formed; both supports are walked in
    ascending grade with early exit.
    """
    out: dict[tuple, BarLaurent] = {}
    grade = pair.grade_scaled
    tw = pair.twist
    if cap is None:
        for a, ca in ta.items():
            row = tuple(sum(x * y for x, y in zip(a, col)) for col in zip(*tw))
            for b, cb in tb.items():
                e = vec_add(a, b)
                c = (ca * cb).shift(sum(x * y for x, y in zip(row, b)))
                cur = out.get(e)
                out[e] = cur + c if cur is not None else c
        return out
    bl = sorted(
        (sum(x * y for x, y in zip(grade, b)), b, cb) for b, cb in tb.items()
    )
    al = sorted(
        (sum(x * y for x, y in zip(grade, a)), a, ca) for a, ca in ta.items()
    )
    if not bl or not al:
        return out
    bmin = bl[0][0]
    for pa, a, ca in al:
        lim = cap - pa
        if bmin > lim:
            break
        row = tuple(sum(x * y for x, y in zip(a, col)) for col in zip(*tw))
        for pb, b, cb in bl:
            if pb > lim:
                break
            e = vec_add(a, b)
            c = (ca * cb).shift(sum(x * y for x, y in zip(row, b)))
            cur = out.get(e)
            out[e] = cur + c if cur is not None else c
    return out


def _minmerge(*vals):
    """min over values where None means +infinity; None if all are None."""
    best = None
    for v in vals:
        if v is None:
            continue
        if best is None or v < best:
            best = v
    return best


class TorusElement:
    """Finite Z[v^{+-1}]-combination of twisted monomials X^a."""

    __slots__ = ("pair", "terms")

    def __init__(self, pair: CompatiblePair, terms=None):
        self.pair = pair
        t: dict[tuple, BarLaurent] = {}
        if terms:
            for a, c in terms.items():
                if c:
                    a = pair.check_vec(a)
                    cur = t.get(a)
                    t[a] = cur + c if cur is not None else c
        self.terms = {a: c for a, c in t.items() if c}

    @classmethod
    def zero(cls, pair):
        return cls(pair)

    @classmethod
    def one(cls, pair):
        return cls(pair, {(0,) * pair.m: BL_ONE})

    @classmethod
    def monomial(cls, pair, exp, coeff=BL_ONE):
        if isinstance(coeff, int):
            coeff = BarLaurent.const(coeff)
        return cls(pair, {tuple(exp): coeff})

    def _same(self, other):
        if self.pair != other.pair:
            raise PairMismatch("elements live over different pairs")

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, TorusElement)
            and self.pair == other.pair
            and self.terms == other.terms
        )

    def __add__(self, other):
        self._same(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            cur = out.get(a)
            out[a] = cur + c if cur is not None else c
        return TorusElement(self.pair, out)

    def __neg__(self):
        return TorusElement(self.pair, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, coeff) -> "TorusElement":
        if isinstance(coeff, int):
            coeff = BarLaurent.const(coeff)
        return TorusElement(self.pair, {a: coeff * c for a, c in self.terms.items()})

    def __mul__(self, other):
        self._same(other)
        return TorusElement(self.pair, _mul_terms(self.pair, self.terms, other.terms, None))

    def bar(self) -> "TorusElement":
        """Coefficientwise v -> v^{-1}; an anti-automorphism of the torus."""
        return TorusElement(self.pair, {a: c.bar() for a, c in self.terms.items()})

    def is_bar_invariant(self) -> bool:
        return all(c.is_bar_invariant() for c in self.terms.values())

    def support(self):
        return sorted(self.terms)

    def min_psi_scaled(self):
        if not self.terms:
            return None
        return min(psi_scaled(self.pair, a) for a in self.terms)

    def coefficient(self, exp) -> BarLaurent:
        return self.terms.get(tuple(exp), BL_ZERO)

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for a in self.support():
            c = self.terms[a]
            cs = repr(c)
            if len(c.items()) > 1:
                cs = f"({cs})"
            bits.append(f"{cs}*X{list(a)}")
        return " + ".join(bits)


# conic inverses are expensive; engine walks re-invert the same seed
# variables many times, so completed inverses are kept keyed by identity
_INVERSE_CACHE: dict[int, tuple] = {}


class GradedSeries:
    """A torus element known exactly up to a completion grade.

    prec_scaled is d*P as an integer, or None for an exact (fully known)
    element.  Every stored monomial has grade <= P; anything above P has
    been discarded and is not claimed.
    """

    __slots__ = ("elt", "prec_scaled")

    def __init__(self, elt: TorusElement, prec_scaled):
        if prec_scaled is not None:
            pruned = {
                a: c
                for a, c in elt.terms.items()
                if psi_scaled(elt.pair, a) <= prec_scaled
            }
            if len(pruned) != len(elt.terms):
                elt = TorusElement(elt.pair, pruned)
        self.elt = elt
        self.prec_scaled = prec_scaled

    @property
    def pair(self):
        return self.elt.pair

    @classmethod
    def exact(cls, elt: TorusElement):
        return cls(elt, None)

    @classmethod
    def zero(cls, pair, prec_scaled=None):
        return cls(TorusElement.zero(pair), prec_scaled)

    @classmethod
    def one(cls, pair, prec_scaled=None):
        return cls(TorusElement.one(pair), prec_scaled)

    def _same(self, other):
        if self.pair != other.pair:
            raise PairMismatch("series live over different pairs")

    def truncate(self, prec_scaled) -> "GradedSeries":
        new = _minmerge(self.prec_scaled, prec_scaled)
        return GradedSeries(self.elt, new)

    def __add__(self, other):
        if isinstance(other, TorusElement):
            other = GradedSeries.exact(other)
        self._same(other)
        return GradedSeries(self.elt + other.elt, _minmerge(self.prec_scaled, other.prec_scaled))

    def __sub__(self, other):
        if isinstance(other, TorusElement):
            other = GradedSeries.exact(other)
        return self + (-other)

    def __neg__(self):
        return GradedSeries(-self.elt, self.prec_scaled)

    def scale(self, coeff) -> "GradedSeries":
        return GradedSeries(self.elt.scale(coeff), self.prec_scaled)

    def __mul__(self, other):
        return self.mul_capped(other, None)

    def mul_capped(self, other, cap) -> "GradedSeries":
        """Product truncated at min(cap, natural precision)."""
        if isinstance(other, TorusElement):
            other = GradedSeries.exact(other)
        self._same(other)
        # error terms: known_f * tail_g > low_f + P_g, tail_f * known_g >
        # P_f + low_g, tail_f * tail_g > P_f + P_g
        lf, lg = self.elt.min_psi_scaled(), other.elt.min_psi_scaled()
        cands = []
        if self.prec_scaled is not None:
            if lg is not None:
                cands.append(self.prec_scaled + lg)
            if other.prec_scaled is not None:
                cands.append(self.prec_scaled + other.prec_scaled)
        if other.prec_scaled is not None and lf is not None:
            cands.append(other.prec_scaled + lf)
        prec = _minmerge(*(cands + ([cap] if cap is not None else [])))
        terms = _mul_terms(self.pair, self.elt.terms, other.elt.terms, prec)
        return GradedSeries(TorusElement(self.pair, terms), prec)

    def bar(self) -> "GradedSeries":
        return GradedSeries(self.elt.bar(), self.prec_scaled)

    def is_bar_invariant(self) -> bool:
        return self.elt.is_bar_invariant()

    def __eq__(self, other):
        return (
            isinstance(other, GradedSeries)
            and self.pair == other.pair
            and self.prec_scaled == other.prec_scaled
            and self.elt == other.elt
        )

    def __repr__(self):
        p = "exact" if self.prec_scaled is None else f"prec {self.prec_scaled}/{self.pair.d}"
        return f"<{self.elt!r} ({p})>"

    # -- inversion ----------------------------------------------------------

    def _corner(self):
        """The unique grade-minimal support point; NotConic otherwise."""
        if not self.elt.terms:
            raise NotConic("the zero series has no corner")
        pair = self.pair
        graded = sorted((psi_scaled(pair, a), a) for a in self.elt.terms)
        if len(graded) > 1 and graded[0][0] == graded[1][0]:
            raise NotConic("no unique grade-minimal corner")
        g, corner = graded[0]
        coeff = self.elt.terms[corner]
        if not coeff.is_unit_monomial():
            raise NotConic("corner coefficient is not a unit monomial +-v^j")
        return g, corner, coeff

    def conic_invert(self, target_scaled: int) -> "GradedSeries":
        """Two-sided inverse to the requested precision by a Neumann series
        off the grade-minimal corner."""
        cached = _INVERSE_CACHE.get(id(self))
        if cached is not None and cached[0] is self and cached[1] >= target_scaled:
            return cached[2].truncate(target_scaled)
        out = self._conic_invert(target_scaled)
        _INVERSE_CACHE[id(self)] = (self, target_scaled, out)
        return out

    def _conic_invert(self, target_scaled: int) -> "GradedSeries":
        g, corner, coeff = self._corner()
        pair = self.pair
        if self.prec_scaled is not None:
            achievable = self.prec_scaled - 2 * g
            if target_scaled > achievable:
                raise InsufficientPrecision(
                    f"inverse is only supported to {achievable}/{pair.d}, "
                    f"requested {target_scaled}/{pair.d}"
                )
        (j, x), = coeff.items()
        inv_corner = TorusElement.monomial(pair, vec_scale(-1, corner), BarLaurent.nu(-j, x))
        # f = u(1 + r) with r = u^{-1}(f - u); every r-term has grade > 0.
        # The Neumann part is computed at target + grade(corner) so that the
        # closing multiply by u^{-1} lands exactly on the target.
        work = target_scaled + g
        u_inv = GradedSeries(inv_corner, None)
        rest = GradedSeries(
            TorusElement(pair, {a: c for a, c in self.elt.terms.items() if a != corner}),
            self.prec_scaled,
        )
        r = u_inv.mul_capped(rest, work)
        moff = r.elt.min_psi_scaled()
        out = GradedSeries.one(pair, work)
        if moff is not None:
            if moff <= 0:
                raise NotConic("corner offsets are not strictly positively graded")
            power = GradedSeries.one(pair, work)
            k = 1
            while k * moff <= work:
                power = power.mul_capped(r, work)
                out = out + power.scale(BarLaurent.const((-1) ** k))
                k += 1
        return out.mul_capped(u_inv, target_scaled)

    # -- corners and specialization ------------------------------------------

    def divide_right(self, denom: "GradedSeries", cap=None) -> "GradedSeries":
        """The solution Q of Q * denom = self, by long division against the
        grade-minimal corner of denom, truncated at min(cap, natural).

        Equivalent to self * denom.conic_invert(...) but never builds the
        inverse, whose support is much larger than the quotient's.  A cap is
        required when both operands are exact (the quotient need not be).
        """
        self._same(denom)
        g, corner, coeff = denom._corner()
        pair = self.pair
        (j, x), = coeff.items()
        u_inv = GradedSeries(
            TorusElement.monomial(pair, vec_scale(-1, corner), BarLaurent.nu(-j, x)), None
        )
        inv_prec = None if denom.prec_scaled is None else denom.prec_scaled - 2 * g
        low_num = self.elt.min_psi_scaled()
        cands = []
        if cap is not None:
            cands.append(cap)
        if self.prec_scaled is not None:
            cands.append(self.prec_scaled - g)
            if inv_prec is not None:
                cands.append(self.prec_scaled + inv_prec)
        if inv_prec is not None and low_num is not None:
            cands.append(inv_prec + low_num)
        p_out = _minmerge(*cands) if cands else None
        if p_out is None and denom.elt.terms != {corner: coeff}:
            raise InsufficientPrecision("exact division by a non-monomial needs a cap")
        rest = GradedSeries(
            TorusElement(pair, {a: c for a, c in denom.elt.terms.items() if a != corner}),
            denom.prec_scaled,
        )
        moff = rest.elt.min_psi_scaled()
        if moff is not None and moff - g <= 0:
            raise NotConic("corner offsets of the divisor are not strictly positive")
        quot = GradedSeries.zero(pair, p_out)
        res = self if p_out is None else self.truncate(p_out + g)
        while res.elt.terms:
            low = res.elt.min_psi_scaled()
            if p_out is not None and low - g > p_out:
                break
            chunk = res.mul_capped(u_inv, p_out)
            if not chunk.elt.terms:
                break
            quot = quot + chunk
            back = chunk.mul_capped(rest, None if p_out is None else p_out + g)
            res = -back if p_out is None else (-back).truncate(p_out + g)
        return GradedSeries(quot.elt, p_out)

    def corner_exponents(self, class_coords=None) -> dict:
        """The two distinguished character corners.

        Returns {"max_degree": -*m, "min_degree": -m*} where m is the class
        of the (product of) characters.  When class_coords is omitted the
        class is inferred from the grade-minimal support point; inference
        requires one of the two corner roles to produce an effective (or
        zero) class.
        """
        from .kzero import star_left, star_right, unstar_right, mat_vec as _mv

        pair = self.pair
        if class_coords is None:
            if not self.elt.terms:
                raise NoUniqueCorner("empty series")
            graded = sorted((psi_scaled(pair, a), a) for a in self.elt.terms)
            if len(graded) > 1 and graded[0][0] == graded[1][0]:
                raise NoUniqueCorner("no unique grade-minimal support point")
            corner = graded[0][1]
            candidates = []
            for inv in (pair.Etilde_t_inv, pair.Etilde_inv):
                pre = mat_vec(inv, vec_scale(-1, corner))
                if all(x.denominator == 1 for x in pre):
                    mm = tuple(int(x) for x in pre)
                    if all(x == 0 for x in mm) or is_effective(pair, mm):
                        candidates.append(mm)
            candidates = sorted(set(candidates))
            if len(candidates) != 1:
                raise NoUniqueCorner(
                    "cannot infer the character class from the corner; pass class_coords"
                )
            class_coords = candidates[0]
        m = pair.check_vec(class_coords)
        lo = vec_scale(-1, star_right(pair, m))
        hi = vec_scale(-1, star_left(pair, m))
        for want in (lo, hi):
            c = self.elt.terms.get(want)
            if c is None or not c.is_unit_monomial():
                raise NoUniqueCorner(f"corner {list(want)} is missing or not a unit monomial")
        return {"max_degree": hi, "min_degree": lo}

    def specialize(self, q: int) -> dict:
        """Exact evaluation of every coefficient at v = sqrt(q)."""
        return {a: c.evaluate_sqrt(q) for a, c in sorted(self.elt.terms.items())}

    def to_json(self) -> dict:
        prec = self.prec_scaled
        return {
            "pair": {"p": list(self.pair.p.p)},
            "precision": None if prec is None else {"num": prec, "den": self.pair.d},
            "terms": [
                {"exp": list(a), "coeff": [[e, c] for e, c in self.elt.terms[a].items()]}
                for a in self.elt.support()
            ],
        }


def series_from_json(pair: CompatiblePair, obj) -> GradedSeries:
    terms = {
        tuple(t["exp"]): BarLaurent({int(e): int(c) for e, c in t["coeff"]})
        for t in obj["terms"]
    }
    prec = obj.get("precision")
    return GradedSeries(TorusElement(pair, terms), None if prec is None else int(prec["num"]))
