import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fpsinv import (
    INFINITY,
    QQ,
    CompositionDomainError,
    FieldSpec,
    InvalidParameterError,
    PowerTable,
    PrecisionError,
    SeriesMap,
    ShapeError,
    TruncatedSeries,
    expand_elementary,
    identity_map,
    map_compose,
    parse_map,
    ps_add,
    ps_compose,
    ps_distance,
    ps_homogeneous,
    ps_mul,
    ps_order,
    ps_pow,
    ps_sub,
    ps_truncate,
)
from fpsinv.series import pack, unpack
from golden import CATALAN_INVERSE, CATALAN_P0_MINUS_P1, CATALAN_P1, CATALAN_P2, Q_SEQUENCE, SIN_PARTIAL_SUMS
from oracles import from_udict, naive_compose, naive_mul, to_dict, to_udict

F7 = FieldSpec.prime(7)


def u(d, max_degree=6, spec=QQ):
    return from_udict(d, max_degree, spec)


def poly(text, max_degree=6, spec=QQ):
    return parse_map(text, spec, max_degree)[0]


# --- examples ---------------------------------------------------------------


def test_add_p0_minus_p1():
    P0 = u({1: 1})
    P1 = u(CATALAN_P1)
    assert ps_sub(P0, P1) == u(CATALAN_P0_MINUS_P1)
    assert ps_add(P0, -P1) == u(CATALAN_P0_MINUS_P1)


def test_add_identity_and_cancellation():
    a = u(CATALAN_P2)
    assert ps_add(a, TruncatedSeries.zero(1, 6, QQ)) == a
    xy = parse_map("vars: X, Y\nF1 = X + Y\nF2 = X - Y", QQ, 3)
    assert ps_add(xy[0], xy[1]) == TruncatedSeries(2, 3, QQ, {(1, 0): 2})


def test_mul_examples():
    g = poly("F1 = Y + Y^2")
    assert ps_mul(g, g) == poly("F1 = Y^2 + 2*Y^3 + Y^4")
    # Q_2 = G(Y)^2 ... = (Y + Y^2)^2 - Y^2 would need Q_1 o G; here: G^2 - Y^2 = 2Y^3 + Y^4
    assert ps_sub(ps_mul(g, g), poly("F1 = Y^2")) == u(Q_SEQUENCE[2])
    one = TruncatedSeries.constant(1, 1, 6, QQ)
    assert ps_mul(g, one) == g
    assert ps_mul(u(CATALAN_INVERSE), TruncatedSeries.zero(1, 6, QQ)).is_zero()


def test_mul_truncates():
    x = TruncatedSeries.variable(0, 1, 3, QQ)
    assert ps_pow(x, 4).is_zero()
    assert ps_pow(x, 0) == TruncatedSeries.constant(1, 1, 3, QQ)


def test_compose_sin_of_sum():
    sin = expand_elementary("sin", 9, QQ)
    xy = identity_map(2, 9, QQ)
    arg = SeriesMap([ps_add(xy[0], xy[1])])
    out = ps_compose(sin, arg)
    assert out.coeff((2, 1)) == Fraction(-1, 2)
    assert out.coeff((3, 2)) == Fraction(1, 12)


def test_compose_examples():
    g = poly("F1 = Y + Y^2")
    f = u(CATALAN_INVERSE)
    assert ps_compose(g, SeriesMap([f])) == poly("F1 = X")
    assert ps_compose(f, identity_map(1, 6, QQ)) == f
    G = SeriesMap([g])
    assert map_compose(G, G) == SeriesMap([poly("F1 = Y + 2*Y^2 + 2*Y^3 + Y^4")])
    I2 = identity_map(2, 5, QQ)
    assert map_compose(I2, I2) == I2


def test_compose_requires_origin():
    with pytest.raises(CompositionDomainError):
        ps_compose(poly("F1 = X^2"), SeriesMap([poly("F1 = 1 + X")]))


def test_order_examples():
    assert ps_order(u(Q_SEQUENCE[3], 8)) == 4
    assert ps_order(TruncatedSeries.zero(2, 4, QQ)) == INFINITY
    assert ps_order(u(CATALAN_P2)) == 3


def test_truncate_examples():
    assert ps_truncate(u(CATALAN_P0_MINUS_P1), 2) == u({1: 1, 2: 1}, 2)
    f = u(CATALAN_P2)
    assert ps_truncate(f, f.max_degree) == f
    assert ps_truncate(u({3: 1}), 2).is_zero()
    assert ps_truncate(f, 20) == f  # never raises precision


def test_homogeneous_examples():
    assert ps_homogeneous(u(CATALAN_P2), 3) == u({3: 2})
    assert ps_homogeneous(poly("F1 = X + X^2"), 0).is_zero()
    f = u(CATALAN_P2)
    total = TruncatedSeries.zero(1, 6, QQ)
    for d in range(7):
        total = total + ps_homogeneous(f, d)
    assert total == f
    with pytest.raises(PrecisionError):
        ps_homogeneous(f, 7)


def test_distance_examples():
    x = poly("F1 = X")
    assert ps_distance(x, poly("F1 = X + X^3"), 2) == Fraction(1, 8)
    assert ps_distance(x, x) == 0
    A2 = u(SIN_PARTIAL_SUMS[2], 29)
    A3 = u(SIN_PARTIAL_SUMS[3], 29)
    # the partial sums agree through degree 3 and first differ at degree 5
    assert ps_distance(A2, A3, 2) == Fraction(1, 32)
    assert ps_distance(x, poly("F1 = X + X^2"), 2.5) == pytest.approx(2.5**-2)
    with pytest.raises(InvalidParameterError):
        ps_distance(x, x, 1)


def test_identity_map():
    assert [to_dict(c) for c in identity_map(1, 3, QQ)] == [{(1,): 1}]
    I2 = identity_map(2, 3, QQ)
    assert [to_dict(c) for c in I2] == [{(1, 0): 1}, {(0, 1): 1}]
    assert I2.orders() == [1, 1]


def test_display_order():
    f = poly("vars: X, Y\nF1 = Y^2 + X*Y + X^2 + Y + X + 1\nF2 = X", 3)
    assert [e for e, _ in f.items()] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_mixed_precision_uses_minimum():
    a = u({1: 1, 5: 1}, 6)
    b = u({1: 1}, 3)
    assert ps_add(a, b).max_degree == 3
    assert ps_mul(a, b).max_degree == 3


def test_shape_and_field_mismatch():
    with pytest.raises(ShapeError):
        ps_add(TruncatedSeries.zero(1, 3, QQ), TruncatedSeries.zero(2, 3, QQ))
    with pytest.raises(Exception):
        ps_add(TruncatedSeries.zero(1, 3, QQ), TruncatedSeries.zero(1, 3, F7))
    with pytest.raises(ShapeError):
        SeriesMap([TruncatedSeries.zero(1, 3, QQ), TruncatedSeries.zero(1, 4, QQ)])


def test_stored_zeros_dropped_and_reduced():
    f = TruncatedSeries(1, 3, F7, {(1,): 7, (2,): 8, (5,): 1})
    assert to_dict(f) == {(2,): 1}
    f.check_invariants()


def test_pack_roundtrip():
    for exps in [(0,), (3, 0, 7), (0, 0, 0, 12), (30000, 1)]:
        assert unpack(pack(exps), len(exps)) == exps


def test_immutability():
    f = poly("F1 = X")
    with pytest.raises(AttributeError):
        f.max_degree = 3


def test_power_table_matches_repeated_products():
    G = parse_map("vars: X, Y\nF1 = X + Y^2\nF2 = Y - X*Y + X^3", QQ, 8)
    table = PowerTable(G)
    for alpha in [(0, 0), (1, 0), (2, 3), (4, 1), (0, 5)]:
        expected = TruncatedSeries.constant(1, 2, 8, QQ)
        for gi, k in zip(G, alpha):
            expected = ps_mul(expected, ps_pow(gi, k))
        assert table.power(alpha) == expected


# --- properties -------------------------------------------------------------


def random_series(rng, n, d, spec=QQ, min_order=0, density=0.5):
    import itertools

    terms = {}
    for exps in itertools.product(range(d + 1), repeat=n):
        if min_order <= sum(exps) <= d and rng.random() < density:
            c = rng.randint(-5, 5)
            if spec.is_rational:
                c = Fraction(c, rng.randint(1, 4))
            terms[exps] = c
    return TruncatedSeries(n, d, spec, terms)


series_params = st.tuples(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 6), st.sampled_from([QQ, F7]))


@settings(max_examples=60, deadline=None)
@given(series_params)
def test_ring_axioms(params):
    seed, n, d, spec = params
    rng = random.Random(seed)
    a, b, c = (random_series(rng, n, d, spec) for _ in range(3))
    assert ps_mul(ps_mul(a, b), c) == ps_mul(a, ps_mul(b, c))
    assert ps_mul(a, b) == ps_mul(b, a)
    assert ps_mul(a, ps_add(b, c)) == ps_add(ps_mul(a, b), ps_mul(a, c))
    assert ps_sub(a, a).is_zero()
    for s in (a, b, ps_mul(a, b), ps_add(a, c)):
        s.check_invariants()


@settings(max_examples=60, deadline=None)
@given(series_params)
def test_mul_matches_naive_oracle(params):
    seed, n, d, spec = params
    rng = random.Random(seed)
    a, b = random_series(rng, n, d, QQ), random_series(rng, n, d, QQ)
    assert to_dict(ps_mul(a, b)) == naive_mul(to_dict(a), to_dict(b), d)


@settings(max_examples=40, deadline=None)
@given(series_params)
def test_compose_matches_naive_oracle(params):
    seed, n, d, spec = params
    rng = random.Random(seed)
    d = min(d, 5)
    f = random_series(rng, n, d, QQ, density=0.4)
    G = SeriesMap(random_series(rng, n, d, QQ, min_order=1, density=0.4) for _ in range(n))
    got = ps_compose(f, G)
    assert to_dict(got) == naive_compose(to_dict(f), [to_dict(g) for g in G], n, d)
    got.check_invariants()


@settings(max_examples=40, deadline=None)
@given(series_params)
def test_compose_associative(params):
    seed, n, d, spec = params
    rng = random.Random(seed)
    d = min(d, 5)
    f = random_series(rng, n, d, spec, density=0.4)
    G = SeriesMap(random_series(rng, n, d, spec, min_order=1, density=0.4) for _ in range(n))
    K = SeriesMap(random_series(rng, n, d, spec, min_order=1, density=0.4) for _ in range(n))
    assert ps_compose(ps_compose(f, G), K) == ps_compose(f, map_compose(G, K))


@settings(max_examples=80, deadline=None)
@given(series_params)
def test_ultrametric(params):
    seed, n, d, spec = params
    rng = random.Random(seed)
    a, b, c = (random_series(rng, n, d, spec, density=0.3) for _ in range(3))
    assert ps_distance(a, c) <= max(ps_distance(a, b), ps_distance(b, c))


@settings(max_examples=80, deadline=None)
@given(series_params)
def test_order_rules(params):
    seed, n, d, spec = params
    rng = random.Random(seed)
    a, b = random_series(rng, n, d, spec, density=0.3), random_series(rng, n, d, spec, density=0.3)
    assert ps_order(ps_add(a, b)) >= min(ps_order(a), ps_order(b))
    oa, ob = ps_order(a), ps_order(b)
    if oa + ob <= d:
        assert ps_order(ps_mul(a, b)) == oa + ob


def test_univariate_helpers_roundtrip():
    f = u(CATALAN_P2)
    assert to_udict(f) == CATALAN_P2
