"""Inverting maps ``F = X + H`` by alternating sums of iterated differences.

With ``P_0 = X`` and ``P_{k+1} = P_k o F - P_k`` the partial sums
``A_m = sum_{k<m} (-1)^k P_k`` converge to the formal inverse of ``F``.
Because ``ord P_k^i >= (k-1)(t-1) + t_i`` (``t_i = ord H_i``, ``t = min t_i``),
``m0`` steps already fix every coefficient up to the target degree.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    InternalVerificationError,
    InvalidParameterError,
    NotNormalFormError,
    NotOriginPreservingError,
    PrecisionError,
    ShapeError,
    SingularLinearPartError,
)
from .field import FieldElement, FieldSpec
from .series import (
    INFINITY,
    PowerTable,
    SeriesMap,
    TruncatedSeries,
    identity_map,
    map_compose,
    ps_add,
    ps_homogeneous,
    ps_order,
    ps_scale,
    ps_sub,
)


@dataclass(frozen=True)
class InversionProblem:
    F: SeriesMap
    H: SeriesMap
    t_per_component: tuple
    t: int | float
    degree: int

    @property
    def n(self) -> int:
        return len(self.F)


@dataclass
class InversionTrace:
    iterates: list[SeriesMap]
    partial_sums: list[SeriesMap]  # partial_sums[m - 1] is A_m
    m0: int
    orders: list[list[int | float]] = field(default_factory=list)

    def partial_sum(self, m: int) -> SeriesMap:
        return self.partial_sums[m - 1]


def validate_problem(F: SeriesMap, s: int) -> InversionProblem:
    """Check that ``F`` fixes the origin and has identity linear part.

    ``F`` is truncated to degree ``s``; it must be known at least that far.
    """
    if not isinstance(s, int) or s < 1:
        raise InvalidParameterError(f"target degree must be a positive integer, got {s!r}")
    if not F.is_square:
        raise ShapeError(f"map has {len(F)} components in {F.nvars} variables")
    if F.max_degree < s:
        raise PrecisionError(f"map is only known through degree {F.max_degree}, need {s}")
    F = F.truncate(s)
    for i, Fi in enumerate(F):
        if Fi.constant_term():
            raise NotOriginPreservingError(
                f"F{i + 1}(0) = {Fi.constant_term()} != 0; the map must fix the origin"
            )
    H = F - identity_map(len(F), s, F.spec)
    ts = tuple(ps_order(h) for h in H)
    for i, ti in enumerate(ts):
        if ti == 1:
            raise NotNormalFormError(
                f"H{i + 1} = F{i + 1} - X{i + 1} has a linear term; the linear part of F "
                "must be the identity (see normalize_linear)"
            )
    finite = [ti for ti in ts if ti != INFINITY]
    t = min(finite) if finite else INFINITY
    return InversionProblem(F=F, H=H, t_per_component=ts, t=t, degree=s)


def steps_needed(s: int, t: int | float) -> int:
    """Smallest ``m`` with ``(m - 2)(t - 1) + t > s``."""
    if t == INFINITY:
        return 1
    if t < 2:
        raise InvalidParameterError(f"t must be at least 2, got {t}")
    if s < t:
        return 2
    return 2 + (s - t) // (t - 1) + 1


def order_bound(k: int, t, ti):
    """Guaranteed lower bound on ``ord P_k^i`` for ``k >= 1``."""
    if ti == INFINITY:
        return INFINITY
    return (k - 1) * (t - 1) + ti


def delta_step(P: SeriesMap, F: SeriesMap, table: PowerTable | None = None) -> SeriesMap:
    """``P o F - P``; pass a :class:`PowerTable` for ``F`` to reuse its powers."""
    if len(P) != F.nvars:
        raise ShapeError(f"{len(P)}-component map cannot be composed with {F.nvars}-variable F")
    if table is None:
        table = PowerTable(F)
    return SeriesMap(ps_sub(table.compose(p), p) for p in P)


def iterates(F: SeriesMap, count: int) -> list[SeriesMap]:
    """``[P_0, ..., P_count]`` at ``F``'s precision."""
    table = PowerTable(F)
    P = identity_map(len(F), F.max_degree, F.spec)
    out = [P]
    for _ in range(count):
        P = delta_step(P, F, table)
        out.append(P)
    return out


def alternating_sum(ps: list[SeriesMap]) -> SeriesMap:
    acc = ps[0]
    for k, P in enumerate(ps[1:], start=1):
        acc = acc - P if k % 2 else acc + P
    return acc


def invert_series(prob: InversionProblem, audit: bool = False) -> tuple[SeriesMap, InversionTrace]:
    """Run ``m0`` steps and return the inverse through ``prob.degree``.

    With ``audit`` the iterate ``P_m0`` is computed too, so the order bound
    can be checked one step past the stopping index.
    """
    F = prob.F
    m0 = steps_needed(prob.degree, prob.t)
    table = PowerTable(F)
    P = identity_map(prob.n, prob.degree, F.spec)
    its = [P]
    sums = [P]
    for k in range(1, m0 + (1 if audit else 0)):
        P = delta_step(P, F, table)
        its.append(P)
        if k < m0:
            sums.append(sums[-1] - P if k % 2 else sums[-1] + P)
    G = sums[-1]
    trace = InversionTrace(
        iterates=its, partial_sums=sums, m0=m0, orders=[P.orders() for P in its]
    )
    check = verify_inverse(F, G)
    if not check.ok:
        raise InternalVerificationError(f"computed inverse fails verification: {check.witness}")
    return G, trace


def fixed_point_invert(prob: InversionProblem) -> SeriesMap:
    """Independent oracle: iterate ``G <- X - H o G`` from ``G = X``."""
    ident = identity_map(prob.n, prob.degree, prob.F.spec)
    G = ident
    for _ in range(prob.degree):
        nxt = ident - map_compose(prob.H, G)
        if nxt == G:
            break
        G = nxt
    return G


@dataclass(frozen=True)
class Witness:
    check: str  # "G o F" or "F o G"
    component: int  # 0-based
    exponents: tuple
    coefficient: FieldElement  # coefficient of (composite - identity)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def __str__(self):
        return (
            f"{self.check} differs from the identity in component {self.component + 1} "
            f"at exponent {self.exponents} (degree {self.degree}): excess {self.coefficient}"
        )


@dataclass(frozen=True)
class VerificationResult:
    ok: bool
    degree: int
    witness: Witness | None = None

    def __bool__(self):
        return self.ok


def _first_difference(name: str, got: SeriesMap, ident: SeriesMap) -> Witness | None:
    best = None
    for i, (a, b) in enumerate(zip(got, ident)):
        diff = ps_sub(a, b)
        if diff.is_zero():
            continue
        exps, c = diff.items()[0]
        cand = Witness(name, i, exps, c)
        if best is None or cand.degree < best.degree:
            best = cand
    return best


def verify_inverse(F: SeriesMap, G: SeriesMap) -> VerificationResult:
    """Check ``G o F = X`` and ``F o G = X`` through the shared precision."""
    if len(F) != len(G) or F.nvars != G.nvars or not F.is_square:
        raise ShapeError("F and G must be square maps of the same size")
    if F.spec != G.spec:
        raise ShapeError(f"fields differ: {F.spec} vs {G.spec}")
    d = min(F.max_degree, G.max_degree)
    F, G = F.truncate(d), G.truncate(d)
    ident = identity_map(len(F), d, F.spec)
    for name, M in (("F", F), ("G", G)):
        for i, c in enumerate(M):
            if c.constant_term():
                exps = (0,) * M.nvars
                return VerificationResult(
                    False, d, Witness(f"{name}(0)", i, exps, c.constant_term())
                )
    for name, outer, inner in (("G o F", G, F), ("F o G", F, G)):
        w = _first_difference(name, map_compose(outer, inner), ident)
        if w is not None:
            return VerificationResult(False, d, w)
    return VerificationResult(True, d)


# ---------------------------------------------------------------------------
# linear normalization


def linear_part(F: SeriesMap) -> list[list[FieldElement]]:
    n = F.nvars
    rows = []
    for Fi in F:
        row = []
        for j in range(n):
            exps = tuple(1 if k == j else 0 for k in range(n))
            row.append(Fi.coeff(exps) if F.max_degree >= 1 else FieldElement(F.spec, 0))
        rows.append(row)
    return rows


def invert_matrix(M: list[list[FieldElement]], spec: FieldSpec) -> list[list[FieldElement]]:
    """Gauss-Jordan elimination over the field."""
    n = len(M)
    A = [[spec.coerce(x) for x in row] + [spec.one if i == j else spec.zero for j in range(n)]
         for i, row in enumerate(M)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if A[r][col]), None)
        if pivot is None:
            raise SingularLinearPartError("the linear part of F is singular (det J_F(0) = 0)")
        A[col], A[pivot] = A[pivot], A[col]
        inv = spec.inv(A[col][col])
        A[col] = [spec.reduce(x * inv) for x in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                f = A[r][col]
                A[r] = [spec.reduce(x - f * y) for x, y in zip(A[r], A[col])]
    return [[FieldElement(spec, x) for x in row[n:]] for row in A]


def apply_linear(M: list[list[FieldElement]], F: SeriesMap) -> SeriesMap:
    """The map ``M o F``, i.e. row ``i`` of ``M`` combined with the components of ``F``."""
    out = []
    for row in M:
        acc = TruncatedSeries.zero(F.nvars, F.max_degree, F.spec)
        for c, Fj in zip(row, F):
            if c:
                acc = ps_add(acc, ps_scale(Fj, c))
        out.append(acc)
    return SeriesMap(out)


def normalize_linear(F: SeriesMap) -> tuple[list[list[FieldElement]], SeriesMap]:
    """Split ``F = L o Ftilde`` with ``L`` linear and ``Ftilde = X + O(X^2)``."""
    if not F.is_square:
        raise ShapeError(f"map has {len(F)} components in {F.nvars} variables")
    for i, Fi in enumerate(F):
        if Fi.constant_term():
            raise NotOriginPreservingError(f"F{i + 1}(0) = {Fi.constant_term()} != 0")
    L = linear_part(F)
    Linv = invert_matrix(L, F.spec)
    return L, apply_linear(Linv, F)


def is_identity_matrix(M: list[list[FieldElement]]) -> bool:
    return all((x == 1) if i == j else (not x) for i, row in enumerate(M) for j, x in enumerate(row))


@dataclass
class InversionResult:
    G: SeriesMap
    trace: InversionTrace
    problem: InversionProblem
    linear_part: list[list[FieldElement]] | None = None  # set when F was normalized


def invert_map(F: SeriesMap, s: int, audit: bool = False) -> InversionResult:
    """Invert ``F`` through degree ``s``, normalizing an invertible linear part first."""
    L = None
    target = F
    if F.is_square and F.max_degree >= 1 and all(not c.constant_term() for c in F):
        lin = linear_part(F)
        if not is_identity_matrix(lin):
            L, target = normalize_linear(F)
    prob = validate_problem(target, s)
    G, trace = invert_series(prob, audit=audit)
    if L is not None:
        # F = L o Ftilde, so F^-1 = Ftilde^-1 o L^-1
        Linv = invert_matrix(L, F.spec)
        G = map_compose(G, apply_linear(Linv, identity_map(len(F), s, F.spec)))
        check = verify_inverse(F.truncate(s), G)
        if not check.ok:
            raise InternalVerificationError(f"de-normalized inverse fails: {check.witness}")
    return InversionResult(G=G, trace=trace, problem=prob, linear_part=L)


# ---------------------------------------------------------------------------
# audits of the guarantees


def order_violations(prob: InversionProblem, trace: InversionTrace) -> list[tuple[int, int, object, object]]:
    """``(k, i, ord P_k^i, bound)`` for every iterate below its order bound."""
    bad = []
    for k in range(1, len(trace.iterates)):
        for i, ti in enumerate(prob.t_per_component):
            o = trace.orders[k][i]
            b = order_bound(k, prob.t, ti)
            if o < b:
                bad.append((k, i, o, b))
    return bad


def stabilization_violations(
    prob: InversionProblem, trace: InversionTrace, G: SeriesMap
) -> list[tuple[int, int, int]]:
    """``(m, i, degree)`` where ``A_m`` disagrees with ``G`` below its fixed range."""
    bad = []
    for m in range(2, trace.m0 + 1):
        A = trace.partial_sum(m)
        for i, ti in enumerate(prob.t_per_component):
            limit = order_bound(m - 1, prob.t, ti)
            top = prob.degree if limit == INFINITY else min(prob.degree, limit - 1)
            for d in range(0, int(top) + 1):
                if ps_homogeneous(A[i], d) != ps_homogeneous(G[i], d):
                    bad.append((m, i, d))
    return bad


def telescoping_residual(prob: InversionProblem, trace: InversionTrace, m: int) -> SeriesMap:
    """``sum_{k<m} (-1)^k P_k o F + (-1)^m P_m - X``; zero whenever the identity holds."""
    table = PowerTable(prob.F)
    acc = SeriesMap(table.compose(c) for c in trace.iterates[0])
    for k in range(1, m):
        comp = SeriesMap(table.compose(c) for c in trace.iterates[k])
        acc = acc - comp if k % 2 else acc + comp
    Pm = trace.iterates[m]
    acc = acc - Pm if m % 2 else acc + Pm
    return acc - identity_map(prob.n, prob.degree, prob.F.spec)

