"""Maps whose inverse is a polynomial of known degree ``D``.

If ``G = F^-1`` has degree ``D``, the partial sums split as
``A_m = G + R_m`` once ``m >= mu_i``, with ``R_m`` of order above ``D``.  The
candidate inverse is therefore the degree-``<= D`` part of ``A_mu``.  The
helpers below extract that candidate and check, at a finite working degree,
the identities tying the iterates ``P_k`` of ``F`` to the iterates ``Q_s`` of
``G``.  Nothing here proves a series is polynomial: every positive answer
holds through the working degree only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

from .errors import InvalidParameterError, PrecisionError, ShapeError
from .inverter import (
    InversionProblem,
    VerificationResult,
    Witness,
    alternating_sum,
    iterates,
    validate_problem,
    verify_inverse,
)
from .series import (
    INFINITY,
    PowerTable,
    SeriesMap,
    identity_map,
    map_compose,
    ps_order,
    ps_sub,
    ps_truncate,
)

PASS = "pass"
FAIL = "fail"
INSUFFICIENT = "insufficient-precision"


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    witness: Witness | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def __str__(self):
        out = f"[{self.status}] {self.name}"
        if self.detail:
            out += f": {self.detail}"
        if self.witness is not None:
            out += f" ({self.witness})"
        return out


@dataclass
class SymmetryReport:
    D: int
    mu_per_component: list[int]
    mu: int
    candidate_G: SeriesMap
    verification: VerificationResult
    working_degree: int
    residuals: dict[int, SeriesMap] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verification.ok

    @property
    def message(self) -> str:
        if self.certified:
            return (
                f"polynomial inverse of degree <= {self.D} certified through "
                f"degree {self.working_degree}"
            )
        return (
            f"no polynomial inverse of degree <= {self.D} certified at this precision "
            f"(working degree {self.working_degree})"
        )


def mu_indices(prob: InversionProblem, D: int) -> tuple[list[int], int]:
    """Per-component step counts after which the degree-``<= D`` part is fixed."""
    t = prob.t
    if t == INFINITY:
        mus = [1] * prob.n
        return mus, 1
    if D < t:
        raise InvalidParameterError(
            f"a nontrivial map with t = {t} cannot have an inverse of degree D = {D} < t"
        )
    mus = []
    for ti in prob.t_per_component:
        if ti == INFINITY:
            mus.append(1)
        else:
            # floor((D - t_i)/(t - 1) + 1) + 1, kept >= 1 when t_i > D
            mus.append(max(1, (D - ti + t - 1) // (t - 1) + 1))
    return mus, max(mus)


def _compare(name: str, lhs: SeriesMap, rhs: SeriesMap, vacuous_ok: bool) -> Check:
    for i, (a, b) in enumerate(zip(lhs, rhs)):
        diff = ps_sub(a, b)
        if not diff.is_zero():
            exps, c = diff.items()[0]
            return Check(name, FAIL, Witness("lhs - rhs", i, exps, c))
    if lhs.is_zero() and not vacuous_ok:
        return Check(
            name,
            INSUFFICIENT,
            detail=f"both sides vanish through degree {lhs.max_degree}",
        )
    return Check(name, PASS)


def _candidate(ps: list[SeriesMap], mus: list[int], D: int, W: int) -> SeriesMap:
    comps = []
    for i, mu_i in enumerate(mus):
        acc = ps_truncate(ps[0][i], D)
        for k in range(1, mu_i):
            term = ps_truncate(ps[k][i], D)
            acc = ps_sub(acc, term) if k % 2 else acc + term
        comps.append(acc)
    return SeriesMap(comps).with_max_degree(W)


def extract_polynomial_inverse(
    prob: InversionProblem, D: int, residual_ms: tuple[int, ...] | None = None
) -> SymmetryReport:
    """Read the degree-``<= D`` inverse candidate off ``A_mu`` and verify it.

    ``prob.degree`` is the working degree.  It must be at least ``D``, and
    should be larger so that the residuals show nonzero terms.
    """
    W = prob.degree
    if D < 1:
        raise InvalidParameterError("D must be positive")
    if W < D:
        raise PrecisionError(f"working degree {W} is below D = {D}")
    mus, mu = mu_indices(prob, D)
    residual_ms = tuple(residual_ms) if residual_ms else (mu,)
    top = max(mu + 1, max(residual_ms))
    ps = iterates(prob.F, top)
    G = _candidate(ps, mus, D, W)
    verification = verify_inverse(prob.F, G)
    report = SymmetryReport(
        D=D,
        mu_per_component=mus,
        mu=mu,
        candidate_G=G,
        verification=verification,
        working_degree=W,
    )
    for m in residual_ms:
        report.residuals[m] = alternating_sum(ps[:m]) - G

    report.checks.append(
        Check(
            f"G o F = F o G = X through degree {W}",
            PASS if verification.ok else FAIL,
            verification.witness,
        )
    )
    # the degree-<=D part of A_m no longer moves once m >= mu_i
    stable = True
    for i, mu_i in enumerate(mus):
        base = ps_truncate(alternating_sum(ps[:mu_i])[i], D)
        later = ps_truncate(alternating_sum(ps[: mu_i + 1])[i], D)
        stable = stable and base == later
    report.checks.append(Check("degree <= D part of A_m fixed for m >= mu_i", PASS if stable else FAIL))
    if verification.ok:
        R = report.residuals.get(mu, alternating_sum(ps[:mu]) - G)
        sign = 1 if (mu + 1) % 2 == 0 else -1
        lhs = map_compose(R, prob.F)
        rhs = ps[mu].scale(sign)
        report.checks.append(_compare("R_mu o F = (-1)^(mu+1) P_mu", lhs, rhs, vacuous_ok=True))
    return report


def symmetry_residual(prob: InversionProblem, G: SeriesMap, m: int) -> SeriesMap:
    """``R_m = A_m - G``."""
    if m < 1:
        raise InvalidParameterError("m must be at least 1")
    if len(G) != prob.n or G.nvars != prob.F.nvars:
        raise ShapeError("G does not match the problem's shape")
    ps = iterates(prob.F, m - 1)
    return alternating_sum(ps) - G


def q_sequence(G: SeriesMap, count: int) -> list[SeriesMap]:
    """``[Q_0, ..., Q_count]`` with ``Q_0 = X`` and ``Q_{s+1} = Q_s o G - Q_s``."""
    validate_problem(G, G.max_degree)
    return iterates(G, count)


def map_power(G: SeriesMap, j: int) -> SeriesMap:
    """``G o G o ... o G`` (``j`` times; the identity for ``j = 0``)."""
    out = identity_map(len(G), G.max_degree, G.spec)
    for _ in range(j):
        out = map_compose(G, out)
    return out


def q_decomposition_check(
    F: SeriesMap,
    G: SeriesMap,
    D: int,
    s_max: int,
    working_degree: int | None = None,
    max_shift: int = 3,
    collapsed_beyond_mu: bool = False,
) -> list[Check]:
    """Check the identities linking ``Q_s`` (iterates of ``G``) to ``P_k`` (of ``F``).

    For every ``1 <= s <= s_max`` the binomial form::

        Q_s = sum_{k=0}^{mu-2} (-1)^(k+s) P_{k+s} o G^(s-1)
              + (-1)^mu sum_{l<s} C(s-1, l) (-1)^l P_mu o G^(s-l)

    and, for ``s <= mu``, its collapsed form::

        Q_s = (-1)^s sum_{k<mu-s} (-1)^k P_{s+k} o G^(s-1) + (-1)^mu P_mu o G^s

    which at ``s = mu`` reads ``Q_mu = -R_mu o G^(mu-1)``.  The collapsed form
    does not hold past ``mu`` (already ``Q_3 != P_2 o G^3`` for ``G = Y + Y^2``);
    ``collapsed_beyond_mu`` evaluates it there anyway, and those checks fail.

    Also checked: ``R_mu = (-1)^(mu+1) P_mu o G`` and the binomial expansions
    of ``P_{mu+l} o G^(s-1)`` for ``l, r <= max_shift``.  A check whose two
    sides both vanish through the working degree (while ``G`` is not the
    identity) is reported as insufficient precision, never as a pass.
    """
    W = min(F.max_degree, working_degree if working_degree is not None else F.max_degree)
    if s_max < 1:
        raise InvalidParameterError("s_max must be at least 1")
    if any(ps_order(c) != INFINITY and c.degree() > D for c in G):
        raise InvalidParameterError(f"G has terms above degree D = {D}")
    if D > W:
        raise PrecisionError(f"working degree {W} is below D = {D}")
    G = G.truncate(W) if G.max_degree >= W else G.with_max_degree(W)
    prob = validate_problem(F, W)
    _, mu = mu_indices(prob, D)
    trivial = G == identity_map(len(G), W, G.spec)

    checks = []
    inv = verify_inverse(prob.F, G)
    checks.append(Check(f"F and G mutually inverse through degree {W}", PASS if inv.ok else FAIL, inv.witness))

    ps = iterates(prob.F, max(mu + max_shift, s_max + mu))
    qs = q_sequence(G, s_max)
    powers = [identity_map(len(G), W, G.spec)]
    for _ in range(s_max):
        powers.append(map_compose(G, powers[-1]))
    tables: dict[int, PowerTable] = {}

    def comp(P: SeriesMap, j: int) -> SeriesMap:
        if j not in tables:
            tables[j] = PowerTable(powers[j])
        return SeriesMap(tables[j].compose(c) for c in P)

    def signed(P: SeriesMap, e: int) -> SeriesMap:
        return P if e % 2 == 0 else -P

    zero = identity_map(len(G), W, G.spec).scale(0)
    R_mu = alternating_sum(ps[:mu]) - G
    checks.append(
        _compare("R_mu = (-1)^(mu+1) P_mu o G", R_mu, signed(comp(ps[mu], 1), mu + 1), trivial)
    )
    for s in range(1, s_max + 1):
        general = zero
        for k in range(0, mu - 1):
            general = general + signed(comp(ps[k + s], s - 1), k + s)
        for l in range(s):
            general = general + signed(comp(ps[mu], s - l), mu + l).scale(comb(s - 1, l))
        checks.append(_compare(f"Q_{s} binomial form", qs[s], general, trivial))
        if s <= mu or collapsed_beyond_mu:
            collapsed = zero
            for k in range(0, mu - s):
                collapsed = collapsed + signed(comp(ps[s + k], s - 1), s + k)
            collapsed = collapsed + signed(comp(ps[mu], s), mu)
            checks.append(_compare(f"Q_{s} collapsed form", qs[s], collapsed, trivial))
        if s == mu or (s > mu and collapsed_beyond_mu):
            checks.append(
                _compare(f"Q_{s} = -R_mu o G^{s - 1}", qs[s], -comp(R_mu, s - 1), trivial)
            )
    for s in range(1, s_max + 1):
        for l in range(1, max_shift + 1):
            if s - 1 - l < 0:
                continue
            lhs = comp(ps[mu + l], s - 1)
            rhs = zero
            for j in range(l + 1):
                rhs = rhs + signed(comp(ps[mu], s - 1 - j), l - j).scale(comb(l, j))
            checks.append(_compare(f"P_(mu+{l}) o G^{s - 1} binomial expansion", lhs, rhs, trivial))
        for r in range(0, max_shift + 1):
            if s - 1 - r < 0:
                continue
            lhs = zero
            for l in range(r + 1):
                lhs = lhs + signed(comp(ps[mu + l], s - 1), l)
            rhs = zero
            for j in range(r + 1):
                rhs = rhs + signed(comp(ps[mu], s - 1 - j), j).scale(comb(r + 1, j + 1))
            checks.append(_compare(f"sum_(l<={r}) (-1)^l P_(mu+l) o G^{s - 1} binomial collapse", lhs, rhs, trivial))
    return checks
