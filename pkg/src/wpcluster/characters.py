"""Quantum cluster characters.

A sheaf of class m contributes, for each subsheaf class s with quotient
class e = m - s, the term

    v^{-d<s, e>} (#subobjects of class s)_{v^{2d}} X^{-s* - *e}

where the subobject count of a line bundle of degree l below a line bundle
of degree x is the quantum integer [h0(x - l)] in base v^{2d}.  On the
projective line this closed form is the series

    X_{O(l)} = X^{-(1+l, -1)} + sum_{r >= -l} v^{-2(l+r)} [l+r+1]_{v^4}
               X^{-(l+2r+1, 1)}

and the torsion characters are finite: a degree-k simple gives
X^{-(k,0)} + X^{-(-k,0)}, the length-n indecomposable at a degree-one point
gives sum_{l=0}^{n} X^{-(n-2l, 0)}.  The two-term seed characters of the
tube simples and the Chebyshev recursions generating the torsion part are
also provided, together with the ordered-product basis families.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product as iproduct

from .errors import IndexOutOfRange, NotCharacterShaped
from .kzero import (
    ClassVector,
    CompatiblePair,
    GradeVector,
    build_pair,
    euler_pairing,
    h0,
    line_bundle_class,
    mat_vec,
    psi_scaled,
    star_left,
    star_right,
    twist_form,
    vec_add,
    vec_scale,
    vec_sub,
)
from .qtorus import BL_ONE, BarLaurent, GradedSeries, TorusElement, qint


@lru_cache(maxsize=None)
def p1_pair() -> CompatiblePair:
    return build_pair((1, 1))


def _neg(v):
    return vec_scale(-1, v)


# ---------------------------------------------------------------------------
# closed forms on the projective line

@lru_cache(maxsize=4096)
def p1_line_bundle_char(l: int, precision: int) -> GradedSeries:
    """The degree-l line bundle series on the projective line."""
    pair = p1_pair()
    prec = precision * pair.d
    terms = {}
    top = _neg((1 + l, -1))
    if psi_scaled(pair, top) <= prec:
        terms[top] = BL_ONE
    r = -l
    while True:
        exp = _neg((l + 2 * r + 1, 1))
        if psi_scaled(pair, exp) > prec:
            break
        c = qint(l + r + 1, 4).shift(-2 * (l + r))
        terms[exp] = c
        r += 1
    return GradedSeries(TorusElement(pair, terms), prec)


def p1_torsion_char(kind: str, param: int) -> TorusElement:
    """Finite torsion characters on the projective line.

    kind "simple": degree-param simple point, X^{-(k,0)} + X^{-(-k,0)};
    kind "indec":  length-param indecomposable at a degree-one point;
    kind "ndelta": the two-monomial element X^{-(n,0)} + X^{-(-n,0)}
                   (equal to 2 for n = 0).
    """
    pair = p1_pair()
    if kind == "simple":
        if param < 1:
            raise IndexOutOfRange("a simple point has degree >= 1")
        return TorusElement(
            pair, {_neg((param, 0)): BL_ONE, (param, 0): BL_ONE}
        )
    if kind == "indec":
        if param < 0:
            raise IndexOutOfRange("torsion length must be >= 0")
        terms = {}
        for l in range(param + 1):
            e = _neg((param - 2 * l, 0))
            terms[e] = terms.get(e, BarLaurent()) + 1
        return TorusElement(pair, terms)
    if kind == "ndelta":
        if param < 0:
            raise IndexOutOfRange("ndelta takes n >= 0")
        terms = {}
        for e in (_neg((param, 0)), (param, 0)):
            terms[e] = terms.get(e, BarLaurent()) + 1
        return TorusElement(pair, terms)
    raise IndexOutOfRange(f"unknown torsion kind {kind!r}")


def x_delta() -> TorusElement:
    return p1_torsion_char("ndelta", 1)


# ---------------------------------------------------------------------------
# Chebyshev-type recursions for the torsion part

def chebyshev(kind: str, n: int) -> list[int]:
    """Coefficient list (low to high) of the n-th polynomial.

    First kind:  F0=1, F1=x, F2=x^2-2, F_{n+1} = x*F_n - F_{n-1};
    second kind: G0=1, G1=x, G2=x^2-1, G_{n+1} = x*G_n - G_{n-1}.
    """
    if n < 0:
        raise IndexOutOfRange("polynomial index must be >= 0")
    if kind == "first":
        seq = [[1], [0, 1], [-2, 0, 1]]
    elif kind == "second":
        seq = [[1], [0, 1], [-1, 0, 1]]
    else:
        raise IndexOutOfRange(f"unknown Chebyshev kind {kind!r}")
    while len(seq) <= n:
        prev, cur = seq[-2], seq[-1]
        nxt = [0] + cur
        for k, c in enumerate(prev):
            nxt[k] -= c
        seq.append(nxt)
    return seq[n]


def poly_eval_torus(coeffs, z: TorusElement) -> TorusElement:
    out = TorusElement.zero(z.pair)
    power = TorusElement.one(z.pair)
    for c in coeffs:
        if c:
            out = out + power.scale(c)
        power = power * z
    return out


def chebyshev_eval(kind: str, n: int) -> TorusElement:
    """The n-th polynomial evaluated at the degree-one delta element."""
    return poly_eval_torus(chebyshev(kind, n), x_delta())


# ---------------------------------------------------------------------------
# seed characters for general weight data

def line_bundle_char(pair: CompatiblePair, l: int, precision: int) -> GradedSeries:
    """Series of the line bundle of degree l*c on any weight tuple.

    Sums over subsheaf degrees r = l*c - s, s >= 0, with the quotient-class
    exponent -C(r)* - *(m - C(r)) and coefficient
    v^{-d<C(r), m - C(r)>} [h0(s)]_{v^{2d}}, plus the zero-subsheaf term
    X^{-*m}.
    """
    prec = precision * pair.d
    tilde = pair.ptilde
    m = line_bundle_class(pair, GradeVector(l, (0,) * tilde.N)).coords
    d = pair.d
    terms = {}
    top = _neg(star_left(pair, m))
    if psi_scaled(pair, top) <= prec:
        terms[top] = BL_ONE
    ranges = [range(tilde.p[i]) for i in range(tilde.N)]
    s0 = 0
    while True:
        emitted = False
        for si in iproduct(*ranges):
            s = GradeVector(s0, si)
            r = GradeVector(l - s0, tuple(-x for x in si))
            sub = line_bundle_class(pair, r).coords
            e = vec_sub(m, sub)
            exp = vec_sub(_neg(star_right(pair, sub)), star_left(pair, e))
            if psi_scaled(pair, exp) > prec:
                continue
            emitted = True
            c = qint(h0(pair, s), 2 * d).shift(-d * euler_pairing(pair, sub, e))
            terms[exp] = terms.get(exp, BarLaurent()) + c
        if not emitted:
            break
        s0 += 1
    return GradedSeries(TorusElement(pair, terms), prec)


def simple_seed_char(pair: CompatiblePair, k: int) -> TorusElement:
    """Two-term character X^{-e_k* + Btilde e_k} + X^{-e_k*} of the k-th
    (0-based, k >= 2) seed simple."""
    ek = tuple(int(t == k) for t in range(pair.m))
    lo = _neg(star_right(pair, ek))
    hi = vec_add(lo, mat_vec(pair.Btilde, ek))
    return TorusElement(pair, {lo: BL_ONE, hi: BL_ONE})


@lru_cache(maxsize=4096)
def seed_char(pair: CompatiblePair, i: int, precision: int) -> GradedSeries:
    """Character of the i-th initial seed summand (1-based).

    i = 1 and 2 are the line bundles of degree 0 and c; the rest are the
    tube simples in starred order, whose characters are exact.
    """
    if not 1 <= i <= pair.m:
        raise IndexOutOfRange(f"seed index must be in 1..{pair.m}")
    if i <= 2:
        return line_bundle_char(pair, i - 1, precision)
    return GradedSeries.exact(simple_seed_char(pair, i - 1))


def seed_classes(pair: CompatiblePair) -> list[ClassVector]:
    """Classes of the initial seed summands, in starred order."""
    out = [
        line_bundle_class(pair, GradeVector(0, (0,) * pair.ptilde.N)),
        line_bundle_class(pair, GradeVector(1, (0,) * pair.ptilde.N)),
    ]
    for k in range(2, pair.m):
        out.append(ClassVector(tuple(int(t == k) for t in range(pair.m)), pair))
    return out


# ---------------------------------------------------------------------------
# coefficient extraction and basis families

def fpoly_extract(f: GradedSeries, class_coords) -> dict:
    """Recovers the subobject-count coefficients of a character of class m.

    Every support exponent must be of the form -m* + Btilde.e with integral
    e; the result maps e to the count polynomial after stripping the
    v^{-d<m-e, e>} prefactor.
    """
    pair = f.pair
    m = pair.check_vec(class_coords)
    mstar = star_right(pair, m)
    d = pair.d
    out = {}
    for a, c in f.elt.terms.items():
        pre = mat_vec(pair.Btilde_inv, vec_add(a, mstar))
        if any(x.denominator != 1 for x in pre):
            raise NotCharacterShaped(f"exponent {list(a)} has no integral quotient class")
        e = tuple(int(x) for x in pre)
        out[e] = c.shift(d * euler_pairing(pair, vec_sub(m, e), e))
    return out


def ordered_product(factors, precision: int | None = None) -> GradedSeries:
    """Left-to-right product of series/elements over a common pair."""
    out = None
    for f in factors:
        if isinstance(f, TorusElement):
            f = GradedSeries.exact(f)
        out = f if out is None else out * f
    if out is None:
        raise ValueError("empty product has no pair")
    if precision is not None:
        out = out.truncate(precision * out.pair.d)
    return out


def basis_family(family: str, params, precision: int = 12):
    """Basis elements of the projective-line algebra.

    family "C":    (r, l, dd) -> X_{O(l)}^dd X_{O(l+1)}^{r-dd}
    family "barB": the same with the bar-normalizing prefactor v^{dd(r-dd)}
    family "tor1": r -> the degree-r two-monomial delta element
    family "tor2": r -> the r-th power of the degree-one delta element
    family "tor3": r -> the length-r indecomposable torsion character
    """
    if family in ("C", "barB"):
        r, l, dd = params
        if not 1 <= dd <= r:
            raise IndexOutOfRange("need 1 <= d <= r")
        fs = [p1_line_bundle_char(l, precision + abs(l) + r)] * dd + [
            p1_line_bundle_char(l + 1, precision + abs(l) + r)
        ] * (r - dd)
        out = ordered_product(fs, precision)
        if family == "barB":
            out = out.scale(BarLaurent.nu(dd * (r - dd)))
        return out
    (r,) = params if isinstance(params, tuple) else (params,)
    if family == "tor1":
        return GradedSeries.exact(p1_torsion_char("ndelta", r))
    if family == "tor2":
        return ordered_product([x_delta()] * r) if r else GradedSeries.exact(
            TorusElement.one(p1_pair())
        )
    if family == "tor3":
        return GradedSeries.exact(p1_torsion_char("indec", r))
    raise IndexOutOfRange(f"unknown family {family!r}")


def independence_window_check(r_max: int, l_max: int) -> dict:
    """Maps each (r, l, d) product and each delta power to its top corner
    -*(class) and checks the assignment is injective over the window."""
    pair = p1_pair()
    corners = {}
    for r in range(1, r_max + 1):
        for l in range(-l_max, l_max + 1):
            for dd in range(1, r + 1):
                cls = vec_add(vec_scale(dd, (1, l)), vec_scale(r - dd, (1, l + 1)))
                corners[(r, l, dd)] = _neg(star_left(pair, cls))
    for nn in range(0, r_max + 1):
        corners[(0, 0, nn)] = _neg(star_left(pair, (0, nn)))
    seen = {}
    collisions = []
    for key, c in corners.items():
        if c in seen:
            collisions.append((seen[c], key, c))
        seen[c] = key
    return {
        "injective": not collisions,
        "count": len(corners),
        "collisions": collisions,
        "corners": corners,
    }
