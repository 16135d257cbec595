"""The valued-tree mutation engine.

A cluster state carries a quiver arrow-count matrix R (R[u][v] arrows
u -> v), one class vector and one series per vertex, and the frozen tail.
Mutation at a mutable vertex i reads the counts a_j = R[j][i] (arrows into
i) and b_j = R[i][j] (arrows out of i), forms the two candidate classes

    u = sum_j a_j d_j - d_i,      w = sum_j b_j d_j - d_i,

and picks the side whose difference is an effective class: if u - w is
effective the new class is u and

    X' X_i = v^{L(u, d_i)} M(a) + v^{L(u, d_i) - d} M(b),

if w - u is effective the new class is w and

    X' X_i = v^{L(w, d_i) + d} M(a) + v^{L(w, d_i)} M(b),

where L is the twist form Lambda(x*, y*) and M(c) is the order-normalized
monomial v^{-sum_{l<r} c_l c_r L(d_l, d_r)} X_1^{c_1} ... X_m^{c_m}.  The
new series is obtained by conic inversion of X_i.  The quiver moves by the
standard matrix mutation rule on R - R^t.

The initial quiver is the canonical one: a chain of p_i arrows from the
degree-c vertex through the i-th tube's simples to the degree-0 vertex,
weight-one entries contributing a direct arrow, plus max(N-2, 0) return
arrows; mutual arrows between the two line-bundle vertices cancel (the
quiver-with-potential reduction).  A Kronecker engine over the plain
two-variable quantum torus is included for the rank-two comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

from .characters import seed_char, seed_classes
from .errors import (
    IndexOutOfRange,
    InsufficientPrecision,
    NoEffectiveDirection,
    TwoCycleCreated,
)
from .kzero import (
    ClassVector,
    CompatiblePair,
    WeightSpec,
    euler_matrix,
    is_effective,
    mat_inverse,
    mat_mul,
    mat_sub,
    mat_transpose,
    solve_lambda,
    star_lambda_form,
    vec_add,
    vec_scale,
    vec_sub,
)
from .qtorus import BL_ONE, BarLaurent, GradedSeries, TorusElement

# Tube chains run from the degree-c vertex through decreasing simple index
# j = p_i, ..., 2 to the degree-0 vertex; calibrated so that the exchange
# classes at the chain ends are the line-bundle classes they must be.
CHAIN_DESCENDING = True


@dataclass(frozen=True)
class QuiverState:
    """Nonnegative arrow-count matrix; loop-free and 2-cycle-free."""

    R: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        m = len(self.R)
        for u in range(m):
            if self.R[u][u]:
                raise TwoCycleCreated("quiver has a loop")
            for v in range(u):
                if self.R[u][v] and self.R[v][u]:
                    raise TwoCycleCreated(f"2-cycle between vertices {v + 1} and {u + 1}")

    @property
    def m(self) -> int:
        return len(self.R)

    def arrows_in(self, i: int):
        return tuple(self.R[j][i] for j in range(self.m))

    def arrows_out(self, i: int):
        return tuple(self.R[i][j] for j in range(self.m))


def mutate_quiver(q: QuiverState, i: int) -> QuiverState:
    """Matrix mutation of S = R - R^t at vertex i, re-read as arrow counts."""
    m = q.m
    s = [[q.R[u][v] - q.R[v][u] for v in range(m)] for u in range(m)]
    new = [[0] * m for _ in range(m)]
    for u in range(m):
        for v in range(m):
            if u == i or v == i:
                new[u][v] = -s[u][v]
            else:
                new[u][v] = s[u][v] + (abs(s[u][i]) * s[i][v] + s[u][i] * abs(s[i][v])) // 2
    r = tuple(tuple(max(x, 0) for x in row) for row in new)
    return QuiverState(r)


def initial_quiver(pair: CompatiblePair) -> QuiverState:
    """The canonical seed quiver in starred vertex order."""
    m = len(pair.basis)
    R = [[0] * m for _ in range(m)]
    col = pair.col
    tilde = pair.ptilde
    direct = max(2 - tilde.N, 0)
    for i, p in enumerate(tilde.p):
        if p == 1:
            direct += 1
            continue
        js = list(range(2, p + 1))
        if CHAIN_DESCENDING:
            js.reverse()
        chain = [1] + [col[("S", i, j)] for j in js] + [0]
        for a, b in zip(chain, chain[1:]):
            R[a][b] += 1
    rho = max(tilde.N - 2, 0)
    cancel = min(direct, rho)
    R[1][0] += direct - cancel
    R[0][1] += rho - cancel
    return QuiverState(tuple(tuple(row) for row in R))


@dataclass(frozen=True)
class ClusterState:
    """Immutable snapshot of a cluster: quiver, classes, series, history."""

    pair: CompatiblePair
    quiver: QuiverState
    dims: tuple[ClassVector, ...]
    vars: tuple[GradedSeries, ...]
    frozen: tuple[int, ...]
    path: tuple[int, ...] = ()
    edge_labels: tuple = ()

    @property
    def m(self) -> int:
        return self.pair.m

    def to_json(self) -> dict:
        return {
            "quiver": [list(r) for r in self.quiver.R],
            "dims": [list(dv.coords) for dv in self.dims],
            "vars": [x.to_json() for x in self.vars],
            "frozen": [k + 1 for k in self.frozen],
            "path": list(self.path),
            "edge_labels": [[list(a), list(b)] for a, b in self.edge_labels],
        }


def initial_state(pair: CompatiblePair, precision: int) -> ClusterState:
    return ClusterState(
        pair=pair,
        quiver=initial_quiver(pair),
        dims=tuple(seed_classes(pair)),
        vars=tuple(seed_char(pair, i, precision) for i in range(1, pair.m + 1)),
        frozen=pair.frozen,
    )


def normalized_monomial(state: ClusterState, counts) -> GradedSeries:
    """M(c) = v^{-sum_{l<r} c_l c_r L(d_l, d_r)} X_1^{c_1} ... X_m^{c_m};
    the normalization makes the product independent of factor order."""
    pair = state.pair
    shift = 0
    for l in range(state.m):
        if not counts[l]:
            continue
        for r in range(l + 1, state.m):
            if counts[r]:
                shift -= counts[l] * counts[r] * star_lambda_form(
                    pair, state.dims[l].coords, state.dims[r].coords
                )
    out = GradedSeries.exact(TorusElement.one(pair))
    for j in range(state.m):
        for _ in range(counts[j]):
            out = out * state.vars[j]
    return out.scale(BarLaurent.nu(shift))


def mutate_at(state: ClusterState, index: int, precision: int) -> ClusterState:
    """One mutation step at the 1-based mutable index; the new variable is
    computed to at least the requested precision."""
    i = index - 1
    if not 0 <= i < state.m:
        raise IndexOutOfRange(f"index must be in 1..{state.m}")
    if i in state.frozen:
        raise IndexOutOfRange(f"index {index} is frozen")
    pair = state.pair
    a = state.quiver.arrows_in(i)
    b = state.quiver.arrows_out(i)
    di = state.dims[i]
    u = -di
    w = -di
    for j in range(state.m):
        if a[j]:
            u = u + state.dims[j].scale(a[j])
        if b[j]:
            w = w + state.dims[j].scale(b[j])
    diff = (u - w).coords
    if is_effective(pair, diff):
        dnew = u
        base = star_lambda_form(pair, u.coords, di.coords)
        ca, cb = base, base - pair.d
    elif is_effective(pair, vec_scale(-1, diff)):
        dnew = w
        base = star_lambda_form(pair, w.coords, di.coords)
        ca, cb = base + pair.d, base
    else:
        raise NoEffectiveDirection(
            f"neither exchange class at index {index} is an effective difference"
        )
    rhs = normalized_monomial(state, a).scale(BarLaurent.nu(ca)) + normalized_monomial(
        state, b
    ).scale(BarLaurent.nu(cb))
    goal = precision * pair.d
    xnew = rhs.divide_right(state.vars[i], cap=goal)
    if xnew.prec_scaled is not None and xnew.prec_scaled < goal:
        raise InsufficientPrecision(
            f"new variable only known to {xnew.prec_scaled}/{pair.d}, "
            f"needed {goal}/{pair.d}"
        )
    new_vars = list(state.vars)
    new_vars[i] = xnew
    new_dims = list(state.dims)
    new_dims[i] = dnew
    return ClusterState(
        pair=pair,
        quiver=mutate_quiver(state.quiver, i),
        dims=tuple(new_dims),
        vars=tuple(new_vars),
        frozen=state.frozen,
        path=state.path + (index,),
        edge_labels=state.edge_labels + ((a, b),),
    )


def run_path(pair: CompatiblePair, path, precision: int) -> ClusterState:
    """Left fold of mutate_at over a 1-based index path, with automatic
    seed-precision headroom so the final state meets the request."""
    path = tuple(path)
    headroom = precision + 4 * len(path)
    for _ in range(4):
        try:
            state = initial_state(pair, headroom)
            for k, idx in enumerate(path):
                goal = precision + 4 * (len(path) - 1 - k)
                state = mutate_at(state, idx, goal)
            return state
        except InsufficientPrecision:
            headroom *= 2
    raise InsufficientPrecision(
        f"could not reach precision {precision} along path {list(path)}"
    )


# ---------------------------------------------------------------------------
# the rank-two Kronecker engine

@lru_cache(maxsize=None)
def kronecker_pair() -> CompatiblePair:
    """Pair data of the two-arrow quiver: E counts paths, the torus twist is
    the skew form itself (no star twisting)."""
    e = ((1, 0), (-2, 1))
    et = mat_transpose(e)
    b = mat_sub(et, e)
    lam, d = solve_lambda(b)
    spec = WeightSpec((1, 1))
    uprime = (1, 2)
    grade_scaled = tuple(
        -sum(uprime[k] * lam[k][j] for k in range(2)) for j in range(2)
    )
    return CompatiblePair(
        p=spec,
        ptilde=spec,
        bumped=(),
        n=2,
        m=2,
        E=e,
        Etilde=e,
        Btilde=b,
        Lambda=lam,
        d=d,
        basis=(("e", 1), ("e", 2)),
        frozen=(),
        uprime=uprime,
        grade_scaled=grade_scaled,
        Btilde_inv=mat_inverse(b),
        Etilde_t_inv=mat_inverse(et),
        Etilde_inv=mat_inverse(e),
        twist=lam,
        star_form=mat_mul(e, mat_mul(lam, mat_transpose(e))),
    )


@lru_cache(maxsize=None)
def kronecker_var(l: int) -> TorusElement:
    """The l-th cluster variable of the rank-two tower, exact and finite.

    Seeds are the torus coordinates (l = 1, 2); l = 0 and 3 come from the
    defining exchange relations by monomial division, and the rest by the
    three-term recursion through the delta element."""
    pair = kronecker_pair()
    mono = lambda e, c=BL_ONE: TorusElement.monomial(pair, e, c)
    if l == 1:
        return mono((0, 1))
    if l == 2:
        return mono((1, 0))
    if l == 0:
        # X_{V(0)} X_{V(2)} = v^2 X_{V(1)}^2 + 1, divided by x1 on the right
        sq = kronecker_var(1) * kronecker_var(1)
        return (sq.scale(BarLaurent.nu(2)) + TorusElement.one(pair)) * mono((-1, 0))
    if l == 3:
        # X_{V(1)} X_{V(3)} = v^2 X_{V(2)}^2 + 1, divided by x2 on the left
        sq = kronecker_var(2) * kronecker_var(2)
        return mono((0, -1)) * (sq.scale(BarLaurent.nu(2)) + TorusElement.one(pair))
    z = kronecker_delta()
    if l > 3:
        return (z * kronecker_var(l - 1)).scale(BarLaurent.nu(1)) - kronecker_var(
            l - 2
        ).scale(BarLaurent.nu(2))
    return (z * kronecker_var(l + 1)).scale(BarLaurent.nu(-1)) - kronecker_var(
        l + 2
    ).scale(BarLaurent.nu(-2))


@lru_cache(maxsize=None)
def kronecker_delta() -> TorusElement:
    """The delta element: z X_{V(1)} = v X_{V(0)} + v^{-1} X_{V(2)}."""
    pair = kronecker_pair()
    s = kronecker_var(0).scale(BarLaurent.nu(1)) + kronecker_var(2).scale(
        BarLaurent.nu(-1)
    )
    return s * TorusElement.monomial(pair, (0, -1))


def kronecker_dim(l: int):
    """Denominator vector of the l-th variable: preprojective (1-l, -l) for
    l <= 0, preinjective (l-3, l-2) for l >= 3, shifted coordinates else."""
    if l <= 0:
        return (1 - l, -l)
    if l >= 3:
        return (l - 3, l - 2)
    return (0, -1) if l == 1 else (-1, 0)


@dataclass(frozen=True)
class KroneckerState:
    """Cluster of the rank-two engine: slot k holds the tower index ls[k]."""

    ls: tuple[int, int]
    path: tuple[int, ...] = ()

    @property
    def vars(self):
        return tuple(kronecker_var(l) for l in self.ls)

    @property
    def dims(self):
        return tuple(kronecker_dim(l) for l in self.ls)

    def to_json(self) -> dict:
        return {
            "slots": list(self.ls),
            "dims": [list(d) for d in self.dims],
            "vars": [GradedSeries.exact(v).to_json() for v in self.vars],
            "path": list(self.path),
        }


def kronecker_state() -> KroneckerState:
    return KroneckerState(ls=(2, 1))


def kronecker_mutate(state: KroneckerState, index: int) -> KroneckerState:
    """Exchange in slot `index` (1-based): the tower index reflects through
    the other slot's."""
    k = index - 1
    if k not in (0, 1):
        raise IndexOutOfRange("rank-two engine has slots 1 and 2")
    other = state.ls[1 - k]
    ls = list(state.ls)
    ls[k] = 2 * other - ls[k]
    return KroneckerState(ls=tuple(ls), path=state.path + (index,))


def kronecker_run_path(path) -> KroneckerState:
    state = kronecker_state()
    for idx in path:
        state = kronecker_mutate(state, idx)
    return state
