"""Grothendieck-group data of a weighted projective line.

A weight tuple p = (p_1, ..., p_N) determines a rank n = 2 + sum(p_i - 1)
lattice with ordered basis

    O, Sx, S[1,2], ..., S[1,p_1], S[2,2], ..., S[N,p_N]

(O the structure sheaf class, Sx a degree-one generic torsion class, S[i,j]
the torsion simples of the i-th tube; the j = 1 simple of each tube is
eliminated through S[i,1] = Sx - sum_{j>=2} S[i,j]).  The Euler form on this
basis is encoded by an integer matrix E with <a, b> = a^t E b.

Weights are made odd by bumping every even p_i to p_i + 1.  The bumped
lattice carries a reordered ("starred") basis in which each new simple
S[i,2] is moved to the tail, so that the original E sits in the upper-left
corner.  On the starred basis, Btilde = Etilde^t - Etilde is invertible and
Lambda = -d * Btilde^{-1} is the minimal integral skew form with
Lambda * Btilde = -d * I.  A CompatiblePair packages all of this together
with the grading data used by the series completion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DimensionMismatch, SingularMatrix

Matrix = tuple[tuple[int, ...], ...]
Vector = tuple[int, ...]

# basis labels: ("O",), ("Sx",), ("S", tube_index, j)
Label = tuple


# ---------------------------------------------------------------------------
# small exact linear algebra helpers (integer / Fraction matrices as tuples)

def mat_transpose(a) -> tuple:
    return tuple(zip(*a))


def mat_sub(a, b) -> tuple:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_neg(a) -> tuple:
    return tuple(tuple(-x for x in row) for row in a)


def mat_mul(a, b) -> tuple:
    bt = mat_transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_vec(a, v) -> tuple:
    if len(a) and len(a[0]) != len(v):
        raise DimensionMismatch(f"matrix is {len(a)}x{len(a[0])}, vector has length {len(v)}")
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def vec_mat(v, a) -> tuple:
    return mat_vec(mat_transpose(a), v)


def vec_add(u, v) -> tuple:
    return tuple(x + y for x, y in zip(u, v))


def vec_sub(u, v) -> tuple:
    return tuple(x - y for x, y in zip(u, v))


def vec_scale(c, v) -> tuple:
    return tuple(c * x for x in v)


def mat_inverse(a) -> tuple:
    """Exact inverse over Q by Gauss-Jordan elimination.

    Raises SingularMatrix when no inverse exists.
    """
    n = len(a)
    m = [[Fraction(x) for x in row] for row in a]
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrix("matrix is singular over the rationals")
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            inv[col], inv[pivot] = inv[pivot], inv[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        inv[col] = [x / p for x in inv[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return tuple(tuple(row) for row in inv)


def mat_det_sign(a) -> int:
    """Returns sign of the determinant (0 for singular); exact."""
    n = len(a)
    m = [[Fraction(x) for x in row] for row in a]
    sign = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            sign = -sign
        if m[col][col] < 0:
            sign = -sign
        for r in range(col + 1, n):
            if m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return sign


def mat_is_unimodular(a) -> bool:
    n = len(a)
    m = [[Fraction(x) for x in row] for row in a]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return False
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return det in (1, -1)


def matrix_to_json(a) -> dict:
    return {"rows": len(a), "cols": len(a[0]) if a else 0, "data": [list(r) for r in a]}


def matrix_from_json(obj) -> Matrix:
    data = tuple(tuple(int(x) for x in row) for row in obj["data"])
    if len(data) != obj["rows"] or any(len(r) != obj["cols"] for r in data):
        raise DimensionMismatch("matrix JSON shape does not match its data")
    return data


# ---------------------------------------------------------------------------
# weights and the grading group

@dataclass(frozen=True)
class WeightSpec:
    """A tuple of weights p_i >= 1; labels are display metadata only."""

    p: tuple[int, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(int(x) for x in self.p))
        if any(x < 1 for x in self.p):
            raise ValueError("all weights must be >= 1")
        if self.labels is not None and len(self.labels) != len(self.p):
            raise ValueError("labels, when given, must match the number of weights")

    @property
    def N(self) -> int:
        return len(self.p)

    @property
    def rank(self) -> int:
        return 2 + sum(pi - 1 for pi in self.p)

    @property
    def tubes(self) -> tuple[int, ...]:
        """Indices of weights that contribute torsion simples (p_i >= 2)."""
        return tuple(i for i, pi in enumerate(self.p) if pi >= 2)


@dataclass(frozen=True)
class GradeVector:
    """Element l0*c + sum l_i*x_i of the grading group L(p)."""

    l0: int
    li: tuple[int, ...]

    def normalize(self, spec: WeightSpec) -> "GradeVector":
        """Normal form with 0 <= l_i < p_i, using p_i*x_i = c."""
        if len(self.li) != spec.N:
            raise DimensionMismatch("grade vector length does not match the weight count")
        l0 = self.l0
        li = []
        for c, p in zip(self.li, spec.p):
            l0 += c // p
            li.append(c % p)
        return GradeVector(l0, tuple(li))

    def add(self, other: "GradeVector") -> "GradeVector":
        return GradeVector(self.l0 + other.l0, vec_add(self.li, other.li))

    def sub(self, other: "GradeVector") -> "GradeVector":
        return GradeVector(self.l0 - other.l0, vec_sub(self.li, other.li))


def grade_c(spec: WeightSpec) -> GradeVector:
    return GradeVector(1, (0,) * spec.N)


def grade_omega(spec: WeightSpec) -> GradeVector:
    """The dualizing degree (N-2)*c - sum x_i."""
    return GradeVector(spec.N - 2, (-1,) * spec.N)


# ---------------------------------------------------------------------------
# Euler matrices

def _base_labels(spec: WeightSpec) -> tuple[Label, ...]:
    labels: list[Label] = [("O",), ("Sx",)]
    for i in spec.tubes:
        labels.extend(("S", i, j) for j in range(2, spec.p[i] + 1))
    return tuple(labels)


def _euler_entry(spec: WeightSpec, u: Label, v: Label, chirality: int = 1) -> int:
    """One Euler-form entry.

    chirality +1 is the published convention (extensions run up the tube
    index); -1 is its Serre-consistent mirror (extensions run down, matching
    the twist action S[i,j](x_i) = S[i,j+1] of the rotation by x_i).  The two
    differ only inside tube blocks and are unimodularly congruent.
    """
    if u[0] == "O":
        if v[0] == "O":
            return 1
        if v[0] == "Sx":
            return 1
        return 1 if v[2] == spec.p[v[1]] else 0
    if u[0] == "Sx":
        return -1 if v[0] == "O" else 0
    # u is a tube simple S[i,j], j >= 2
    if v[0] == "O":
        return -1 if u[2] == 1 else 0
    if v[0] == "Sx":
        return 0
    if u[1] != v[1]:
        return 0
    p = spec.p[u[1]]
    nxt = (u[2] - 1 + chirality) % p + 1
    return (1 if u[2] == v[2] else 0) - (1 if v[2] == nxt else 0)


def euler_matrix(spec: WeightSpec) -> Matrix:
    """Euler-form matrix E on the reduced basis, <a,b> = a^t E b."""
    labels = _base_labels(spec)
    return tuple(tuple(_euler_entry(spec, u, v) for v in labels) for u in labels)


def skew_matrix(spec: WeightSpec) -> Matrix:
    """B = E^t - E."""
    e = euler_matrix(spec)
    return mat_sub(mat_transpose(e), e)


def oddify(spec: WeightSpec) -> tuple[WeightSpec, tuple[int, ...]]:
    """Bump every even weight by one; returns (new spec, bumped indices)."""
    bumped = tuple(i for i, pi in enumerate(spec.p) if pi % 2 == 0)
    p = tuple(pi + 1 if pi % 2 == 0 else pi for pi in spec.p)
    return WeightSpec(p, spec.labels), bumped


def _starred_labels(tilde: WeightSpec, bumped: tuple[int, ...]) -> tuple[Label, ...]:
    """Starred order: new simples S[i,2] of bumped tubes move to the tail."""
    labels: list[Label] = [("O",), ("Sx",)]
    for i in tilde.tubes:
        first = 3 if i in bumped else 2
        labels.extend(("S", i, j) for j in range(first, tilde.p[i] + 1))
    labels.extend(("S", i, 2) for i in bumped)
    return tuple(labels)


# ---------------------------------------------------------------------------
# the compatible pair

@dataclass(frozen=True)
class CompatiblePair:
    """All exact matrix data attached to a weight tuple.

    E is the n x n Euler matrix of p; Etilde the m x m Euler matrix of the
    odd weights ptilde in the starred basis, so that E is its upper-left
    block.  Btilde = Etilde^t - Etilde, Lambda = -d * Btilde^{-1} with d
    minimal making Lambda integral.  The quantum torus twists monomial
    exponents by Lambda itself (twist), while class vectors pair through
    Lambda(x*, y*) = x^t Etilde Lambda Etilde^t y (star_form); the two agree
    on the bare projective line.  grade_scaled is the integer row vector
    with psi(a) = grade_scaled . a / d defining the series grading.
    """

    p: WeightSpec
    ptilde: WeightSpec
    bumped: tuple[int, ...]
    n: int
    m: int
    E: Matrix
    Etilde: Matrix
    Btilde: Matrix
    Lambda: Matrix
    d: int
    basis: tuple[Label, ...]
    frozen: tuple[int, ...]
    uprime: tuple[int, ...]
    grade_scaled: tuple[int, ...]
    Btilde_inv: tuple[tuple[Fraction, ...], ...] = field(repr=False)
    Etilde_t_inv: tuple[tuple[Fraction, ...], ...] = field(repr=False)
    Etilde_inv: tuple[tuple[Fraction, ...], ...] = field(repr=False)
    twist: Matrix = field(repr=False)
    star_form: Matrix = field(repr=False)

    @property
    def col(self) -> dict[Label, int]:
        return {lab: k for k, lab in enumerate(self.basis)}

    def check_vec(self, v) -> tuple[int, ...]:
        v = tuple(int(x) for x in v)
        if len(v) != self.m:
            raise DimensionMismatch(f"expected a vector of length {self.m}, got {len(v)}")
        return v

    def to_json(self) -> dict:
        return {
            "p": list(self.p.p),
            "ptilde": list(self.ptilde.p),
            "n": self.n,
            "m": self.m,
            "d": self.d,
            "E": matrix_to_json(self.E),
            "Etilde": matrix_to_json(self.Etilde),
            "B": matrix_to_json(skew_matrix(self.p)),
            "Btilde": matrix_to_json(self.Btilde),
            "Lambda": matrix_to_json(self.Lambda),
            "frozen": [k + 1 for k in self.frozen],
            "grade_row": {"num": list(self.grade_scaled), "den": self.d},
            "basis": [list(lab) for lab in self.basis],
        }


def solve_lambda(btilde: Matrix) -> tuple[Matrix, int]:
    """Minimal integral skew form: Lambda = -d * Btilde^{-1}, Lambda*Btilde = -d*I."""
    inv = mat_inverse(btilde)
    d = 1
    for row in inv:
        for x in row:
            d = d * x.denominator // math.gcd(d, x.denominator)
    lam = tuple(tuple(int(-d * x) for x in row) for row in inv)
    return lam, d


def oddify_and_embed(spec: WeightSpec):
    """Builds (ptilde, Etilde in starred order, Btilde, bumped indices)."""
    tilde, bumped = oddify(spec)
    base = euler_matrix(tilde)
    base_labels = _base_labels(tilde)
    pos = {lab: k for k, lab in enumerate(base_labels)}
    order = [pos[lab] for lab in _starred_labels(tilde, bumped)]
    etilde = tuple(tuple(base[u][v] for v in order) for u in order)
    btilde = mat_sub(mat_transpose(etilde), etilde)
    return tilde, bumped, etilde, btilde


def build_pair(p, labels=None) -> CompatiblePair:
    """Constructs the full CompatiblePair of a weight tuple."""
    spec = WeightSpec(tuple(p), tuple(labels) if labels else None)
    tilde, bumped, etilde, btilde = oddify_and_embed(spec)
    n, m = spec.rank, tilde.rank
    lam, d = solve_lambda(btilde)
    basis = _starred_labels(tilde, bumped)
    umax = max(max(tilde.p, default=2), 2)
    uprime = tuple(1 if lab[0] != "Sx" else umax for lab in basis)
    # d * psi = u' . (d * Btilde^{-1}) = -u' . Lambda
    grade_scaled = tuple(-x for x in vec_mat(uprime, lam))
    e = euler_matrix(spec)
    etilde_t = mat_transpose(etilde)
    return CompatiblePair(
        p=spec,
        ptilde=tilde,
        bumped=bumped,
        n=n,
        m=m,
        E=e,
        Etilde=etilde,
        Btilde=btilde,
        Lambda=lam,
        d=d,
        basis=basis,
        frozen=tuple(range(n, m)),
        uprime=uprime,
        grade_scaled=grade_scaled,
        Btilde_inv=mat_inverse(btilde),
        Etilde_t_inv=mat_inverse(etilde_t),
        Etilde_inv=mat_inverse(etilde),
        twist=lam,
        star_form=mat_mul(etilde, mat_mul(lam, etilde_t)),
    )


# ---------------------------------------------------------------------------
# linear operations on classes

def star_right(pair: CompatiblePair, v) -> Vector:
    """v* = Etilde^t . v"""
    return mat_vec(mat_transpose(pair.Etilde), pair.check_vec(v))


def star_left(pair: CompatiblePair, v) -> Vector:
    """*v = Etilde . v"""
    return mat_vec(pair.Etilde, pair.check_vec(v))


def unstar_right(pair: CompatiblePair, w) -> Vector:
    """Inverse of star_right; raises if the preimage is not integral."""
    out = mat_vec(pair.Etilde_t_inv, w)
    if any(x.denominator != 1 for x in out):
        raise DimensionMismatch("vector is not in the image of the star map over Z")
    return tuple(int(x) for x in out)


def euler_pairing(pair: CompatiblePair, a, b) -> int:
    """<a,b> = a^t E b; accepts length-n (E) or length-m (Etilde) vectors."""
    a, b = tuple(a), tuple(b)
    if len(a) != len(b):
        raise DimensionMismatch("euler pairing needs vectors of equal length")
    if len(a) == pair.m:
        mat = pair.Etilde
    elif len(a) == pair.n:
        mat = pair.E
    else:
        raise DimensionMismatch(f"vectors must have length {pair.n} or {pair.m}")
    return sum(x * y for x, y in zip(a, mat_vec(mat, b)))


def lambda_form(pair: CompatiblePair, x, y) -> int:
    """Lambda(x, y) with the integral Lambda."""
    return sum(a * b for a, b in zip(pair.check_vec(x), mat_vec(pair.Lambda, pair.check_vec(y))))


def twist_form(pair: CompatiblePair, a, b) -> int:
    """The torus twist exponent of X^a X^b: Lambda applied to the exponents.

    On every weight tuple this is the unique scaling under which the
    integration of rigid direct sums is multiplicative (the corner of
    X_M X_N carries Lambda(m*, n*) on the classes).
    """
    return sum(x * y for x, y in zip(pair.check_vec(a), mat_vec(pair.twist, pair.check_vec(b))))


def star_lambda_form(pair: CompatiblePair, x, y) -> int:
    """Lambda(x*, y*) = x^t (Etilde Lambda Etilde^t) y on class vectors; the
    exponent governing commutation ratios and exchange coefficients."""
    return sum(
        a * b for a, b in zip(pair.check_vec(x), mat_vec(pair.star_form, pair.check_vec(y)))
    )


def psi_scaled(pair: CompatiblePair, a) -> int:
    """d * psi(a); psi is the completion grade of the monomial X^a."""
    return sum(x * y for x, y in zip(pair.grade_scaled, pair.check_vec(a)))


@dataclass(frozen=True)
class ClassVector:
    """An element of the embedded Grothendieck lattice in the starred basis."""

    coords: tuple[int, ...]
    pair: CompatiblePair

    def __post_init__(self):
        object.__setattr__(self, "coords", self.pair.check_vec(self.coords))

    @property
    def rank(self) -> int:
        return self.coords[0]

    def __add__(self, other):
        self._same(other)
        return ClassVector(vec_add(self.coords, other.coords), self.pair)

    def __sub__(self, other):
        self._same(other)
        return ClassVector(vec_sub(self.coords, other.coords), self.pair)

    def __neg__(self):
        return ClassVector(vec_scale(-1, self.coords), self.pair)

    def scale(self, c: int):
        return ClassVector(vec_scale(c, self.coords), self.pair)

    def _same(self, other):
        if self.pair != other.pair:
            raise DimensionMismatch("class vectors belong to different pairs")


def simple_class(pair: CompatiblePair, i: int, j: int) -> Vector:
    """Class of the tube simple S[i,j], 1 <= j <= ptilde_i, in starred coords.

    j = 1 is expanded through S[i,1] = Sx - sum_{j>=2} S[i,j].
    """
    p = pair.ptilde.p[i]
    if not 1 <= j <= p:
        raise DimensionMismatch(f"tube {i} has simples j = 1..{p}")
    col = pair.col
    v = [0] * pair.m
    if j == 1:
        v[1] = 1
        for jj in range(2, p + 1):
            v[col[("S", i, jj)]] -= 1
    else:
        v[col[("S", i, j)]] = 1
    return tuple(v)


def line_bundle_class(pair: CompatiblePair, x: GradeVector) -> ClassVector:
    """Class of the line bundle of degree x in L(ptilde):
    O + l0*Sx + sum_i sum_{j<=l_i} S[i,j], after normalization."""
    xn = x.normalize(pair.ptilde)
    v = [0] * pair.m
    v[0] = 1
    v[1] = xn.l0
    for i in pair.ptilde.tubes:
        for j in range(1, xn.li[i] + 1):
            v = list(vec_add(v, simple_class(pair, i, j)))
    return ClassVector(tuple(v), pair)


def h0(pair: CompatiblePair, x: GradeVector) -> int:
    """Dimension of the degree-x section space: l0 + 1 when the normal form
    has l0 >= 0, else 0."""
    xn = x.normalize(pair.ptilde)
    return xn.l0 + 1 if xn.l0 >= 0 else 0


def is_effective(pair: CompatiblePair, v) -> bool:
    """Whether v is the class of a nonzero sheaf: positive rank, or rank zero
    and a nonnegative nonzero combination of the full simple torsion classes
    {Sx, S[i,j] all j} (solved exactly in closed form)."""
    v = pair.check_vec(v)
    if v[0] > 0:
        return True
    if v[0] < 0 or all(x == 0 for x in v):
        return False
    # v = c0*Sx + sum c_{i,1}*S[i,1] + sum_{j>=2} c_{i,j}*S[i,j], all c >= 0.
    # Eliminating S[i,1] = Sx - sum_{j>=2} S[i,j]: need c_{i,1} >= t_i :=
    # max(0, -min_j v_{i,j}) per tube and then c0 = v_Sx - sum t_i >= 0.
    col = pair.col
    need = 0
    for i in pair.ptilde.tubes:
        worst = min(v[col[("S", i, j)]] for j in range(2, pair.ptilde.p[i] + 1))
        need += max(0, -worst)
    return v[1] >= need
