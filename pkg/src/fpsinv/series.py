"""Sparse truncated multivariate power series over a :class:`FieldSpec`.

A :class:`TruncatedSeries` stores its nonzero terms of total degree at most
``max_degree``; everything above is unknown (``O(X)^(max_degree+1)``).

Monomials are packed into Python ints: each exponent gets a ``_BITS``-wide
slot, variable 0 in the most significant one, and the total degree sits above
all of them.  Multiplying monomials is then integer addition, and the degree
of a key is a single shift.  No slot can overflow as long as every degree
involved stays at or below ``MAX_SUPPORTED_DEGREE``, which callers guarantee
by checking the degree before adding keys.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (
    CompositionDomainError,
    InvalidParameterError,
    PrecisionError,
    ShapeError,
)
from .field import FieldElement, FieldSpec

_BITS = 16
_MASK = (1 << _BITS) - 1
MAX_SUPPORTED_DEGREE = (1 << (_BITS - 1)) - 1

INFINITY = math.inf


def pack(exps: Sequence[int]) -> int:
    key = sum(exps)
    for e in exps:
        if e < 0:
            raise InvalidParameterError(f"negative exponent in {tuple(exps)}")
        key = (key << _BITS) | e
    return key


def unpack(key: int, nvars: int) -> tuple[int, ...]:
    out = [0] * nvars
    for i in range(nvars - 1, -1, -1):
        out[i] = key & _MASK
        key >>= _BITS
    return tuple(out)


def _unit_key(i: int, nvars: int) -> int:
    return (1 << (_BITS * nvars)) | (1 << (_BITS * (nvars - 1 - i)))


def _term_sort_key(exps: tuple[int, ...]):
    # ascending total degree, then X1-heavy monomials first
    return (sum(exps), tuple(-e for e in exps))


class TruncatedSeries:
    """A multivariate power series known through total degree ``max_degree``.

    ``terms`` maps exponent tuples to coefficients (ints, Fractions, mpq or
    :class:`FieldElement`); zero coefficients are dropped and terms above
    ``max_degree`` are discarded.
    """

    __slots__ = ("nvars", "max_degree", "spec", "_terms", "_shift")

    def __init__(
        self,
        nvars: int,
        max_degree: int,
        spec: FieldSpec,
        terms: Mapping[Sequence[int], object] | None = None,
    ):
        if nvars < 1:
            raise InvalidParameterError("a series needs at least one variable")
        if not 0 <= max_degree <= MAX_SUPPORTED_DEGREE:
            raise InvalidParameterError(f"max_degree must lie in [0, {MAX_SUPPORTED_DEGREE}]")
        raw = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != nvars:
                raise ShapeError(f"exponent {exps} does not have {nvars} entries")
            if sum(exps) > max_degree:
                continue
            v = spec.coerce(c)
            if v:
                key = pack(exps)
                raw[key] = spec.reduce(raw.get(key, 0) + v)
        self._init(nvars, max_degree, spec, {k: v for k, v in raw.items() if v})

    def _init(self, nvars, max_degree, spec, raw):
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "max_degree", max_degree)
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "_terms", raw)
        object.__setattr__(self, "_shift", _BITS * nvars)

    @classmethod
    def _from_raw(cls, nvars, max_degree, spec, raw) -> TruncatedSeries:
        # caller guarantees canonical, nonzero, in-range values
        obj = cls.__new__(cls)
        obj._init(nvars, max_degree, spec, raw)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedSeries is immutable")

    # construction helpers ----------------------------------------------

    @classmethod
    def zero(cls, nvars, max_degree, spec) -> TruncatedSeries:
        return cls._from_raw(nvars, max_degree, spec, {})

    @classmethod
    def constant(cls, value, nvars, max_degree, spec) -> TruncatedSeries:
        v = spec.coerce(value)
        return cls._from_raw(nvars, max_degree, spec, {0: v} if v else {})

    @classmethod
    def variable(cls, i, nvars, max_degree, spec) -> TruncatedSeries:
        if not 0 <= i < nvars:
            raise InvalidParameterError(f"variable index {i} out of range")
        if max_degree < 1:
            return cls.zero(nvars, max_degree, spec)
        return cls._from_raw(nvars, max_degree, spec, {_unit_key(i, nvars): spec.one})

    def _like(self, raw, max_degree=None) -> TruncatedSeries:
        md = self.max_degree if max_degree is None else max_degree
        return TruncatedSeries._from_raw(self.nvars, md, self.spec, raw)

    # inspection ----------------------------------------------------------

    @property
    def terms(self) -> dict[tuple[int, ...], FieldElement]:
        return {
            unpack(k, self.nvars): FieldElement(self.spec, v)
            for k, v in self._terms.items()
        }

    def items(self) -> list[tuple[tuple[int, ...], FieldElement]]:
        """Terms in canonical display order."""
        return sorted(self.terms.items(), key=lambda kv: _term_sort_key(kv[0]))

    def coeff(self, exps: Sequence[int]) -> FieldElement:
        exps = tuple(exps)
        if len(exps) != self.nvars:
            raise ShapeError(f"exponent {exps} does not have {self.nvars} entries")
        if sum(exps) > self.max_degree:
            raise PrecisionError(f"degree {sum(exps)} is beyond max_degree {self.max_degree}")
        return FieldElement(self.spec, self._terms.get(pack(exps), self.spec.zero))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def constant_term(self) -> FieldElement:
        return FieldElement(self.spec, self._terms.get(0, self.spec.zero))

    def degree(self) -> int | float:
        """Highest stored total degree (-inf for zero)."""
        if not self._terms:
            return -INFINITY
        return max(self._terms) >> self._shift

    def check_invariants(self) -> None:
        """Debug validator for the sparse canonical form."""
        spec = self.spec
        for k, v in self._terms.items():
            exps = unpack(k, self.nvars)
            assert pack(exps) == k, f"corrupt key {k}"
            assert sum(exps) <= self.max_degree, f"{exps} beyond max_degree"
            assert v, f"stored zero at {exps}"
            if spec.modulus is None:
                assert type(v).__name__ == "mpq", f"non-mpq coefficient {v!r}"
            else:
                assert isinstance(v, int) and 0 <= v < spec.modulus, f"non-canonical {v!r}"

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.nvars == other.nvars
            and self.max_degree == other.max_degree
            and self.spec == other.spec
            and self._terms == other._terms
        )

    def __hash__(self):
        return hash((self.nvars, self.max_degree, self.spec, frozenset(self._terms.items())))

    def __repr__(self):
        from .lang import format_series

        return f"TruncatedSeries({format_series(self)!r}, field={self.spec})"

    # operators -----------------------------------------------------------

    def __add__(self, other):
        return ps_add(self, self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ps_sub(self, self._lift(other))

    def __rsub__(self, other):
        return ps_sub(self._lift(other), self)

    def __neg__(self):
        return ps_neg(self)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return ps_mul(self, other)
        return ps_scale(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return ps_pow(self, k)

    def _lift(self, other) -> TruncatedSeries:
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries.constant(other, self.nvars, self.max_degree, self.spec)


def _check_pair(a: TruncatedSeries, b: TruncatedSeries):
    if a.nvars != b.nvars:
        raise ShapeError(f"variable counts differ: {a.nvars} vs {b.nvars}")
    if a.spec != b.spec:
        raise ShapeError(f"fields differ: {a.spec} vs {b.spec}")


def _drop_above(raw: dict, shift: int, max_degree: int) -> dict:
    limit = (max_degree + 1) << shift
    return {k: v for k, v in raw.items() if k < limit}


def ps_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    _check_pair(a, b)
    md = min(a.max_degree, b.max_degree)
    red = a.spec.reduce
    out = dict(a._terms)
    for k, v in b._terms.items():
        s = red(out.get(k, 0) + v)
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    if md < max(a.max_degree, b.max_degree):
        out = _drop_above(out, a._shift, md)
    return a._like(out, md)


def ps_neg(a: TruncatedSeries) -> TruncatedSeries:
    red = a.spec.reduce
    return a._like({k: red(-v) for k, v in a._terms.items()})


def ps_sub(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return ps_add(a, ps_neg(b))


def ps_scale(a: TruncatedSeries, c) -> TruncatedSeries:
    c = a.spec.coerce(c)
    if not c:
        return a._like({})
    red = a.spec.reduce
    return a._like({k: red(v * c) for k, v in a._terms.items()})


def _mul_raw(a_terms: dict, b_terms: dict, shift: int, max_degree: int, reduce) -> dict:
    if not a_terms or not b_terms:
        return {}
    if len(a_terms) < len(b_terms):
        a_terms, b_terms = b_terms, a_terms
    b_items = sorted(b_terms.items())
    b_degs = [k >> shift for k, _ in b_items]
    out: dict = {}
    get = out.get
    for ka, ca in a_terms.items():
        room = max_degree - (ka >> shift)
        if room < 0:
            continue
        for kb, cb in b_items[: bisect_right(b_degs, room)]:
            k = ka + kb
            out[k] = get(k, 0) + ca * cb
    res = {}
    for k, v in out.items():
        v = reduce(v)
        if v:
            res[k] = v
    return res


def ps_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    _check_pair(a, b)
    md = min(a.max_degree, b.max_degree)
    return a._like(_mul_raw(a._terms, b._terms, a._shift, md, a.spec.reduce), md)


def ps_pow(a: TruncatedSeries, k: int) -> TruncatedSeries:
    if k < 0:
        raise InvalidParameterError("series powers must be non-negative")
    result = TruncatedSeries.constant(1, a.nvars, a.max_degree, a.spec)
    base = a
    while k:
        if k & 1:
            result = ps_mul(result, base)
        k >>= 1
        if k:
            base = ps_mul(base, base)
    return result


def ps_order(f: TruncatedSeries) -> int | float:
    """Lowest total degree carrying a nonzero coefficient; ``math.inf`` for 0."""
    if not f._terms:
        return INFINITY
    return min(f._terms) >> f._shift


def ps_truncate(f: TruncatedSeries, degree: int) -> TruncatedSeries:
    if degree < 0:
        raise InvalidParameterError("truncation degree must be non-negative")
    md = min(f.max_degree, degree)
    return f._like(_drop_above(f._terms, f._shift, md), md)


def ps_homogeneous(f: TruncatedSeries, d: int) -> TruncatedSeries:
    """The degree-``d`` layer of ``f`` (same ``max_degree`` as ``f``)."""
    if d < 0:
        raise InvalidParameterError("degree must be non-negative")
    if d > f.max_degree:
        raise PrecisionError(f"degree {d} is beyond max_degree {f.max_degree}")
    s = f._shift
    return f._like({k: v for k, v in f._terms.items() if k >> s == d})


def ps_distance(a: TruncatedSeries, b: TruncatedSeries, base=2):
    """``base ** -ord(a - b)``, exact when ``base`` is rational.

    Both operands are compared through their shared precision, so series that
    agree wherever both are known are at distance 0.
    """
    if isinstance(base, bool) or not base > 1:
        raise InvalidParameterError(f"metric base must exceed 1, got {base!r}")
    o = ps_order(ps_sub(a, b))
    if o == INFINITY:
        return 0 if not isinstance(base, float) else 0.0
    if isinstance(base, (int, Fraction)):
        return Fraction(1) / Fraction(base) ** o
    return float(base) ** -o


# ---------------------------------------------------------------------------
# maps


class SeriesMap:
    """A tuple of series sharing variables, precision and field.

    Maps used as inverses are square (as many components as variables), but
    substitution also accepts rectangular ones, e.g. a single ``X + Y`` in two
    variables.
    """

    __slots__ = ("components",)

    def __init__(self, components: Iterable[TruncatedSeries]):
        comps = tuple(components)
        if not comps:
            raise ShapeError("a map needs at least one component")
        first = comps[0]
        for c in comps[1:]:
            if (c.nvars, c.max_degree, c.spec) != (first.nvars, first.max_degree, first.spec):
                raise ShapeError("map components must share nvars, max_degree and field")
        object.__setattr__(self, "components", comps)

    def __setattr__(self, name, value):
        raise AttributeError("SeriesMap is immutable")

    @property
    def nvars(self) -> int:
        return self.components[0].nvars

    @property
    def max_degree(self) -> int:
        return self.components[0].max_degree

    @property
    def spec(self) -> FieldSpec:
        return self.components[0].spec

    @property
    def is_square(self) -> bool:
        return len(self.components) == self.nvars

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __eq__(self, other):
        if not isinstance(other, SeriesMap):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"SeriesMap({list(self.components)!r})"

    def __add__(self, other: SeriesMap) -> SeriesMap:
        _check_maps(self, other)
        return SeriesMap(ps_add(a, b) for a, b in zip(self, other))

    def __sub__(self, other: SeriesMap) -> SeriesMap:
        _check_maps(self, other)
        return SeriesMap(ps_sub(a, b) for a, b in zip(self, other))

    def __neg__(self) -> SeriesMap:
        return SeriesMap(ps_neg(a) for a in self)

    def scale(self, c) -> SeriesMap:
        return SeriesMap(ps_scale(a, c) for a in self)

    def truncate(self, degree: int) -> SeriesMap:
        return SeriesMap(ps_truncate(a, degree) for a in self)

    def orders(self) -> list[int | float]:
        return [ps_order(a) for a in self]

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self)

    def with_max_degree(self, degree: int) -> SeriesMap:
        """Re-tag precision; only valid for maps that are exact polynomials."""
        if any(a.degree() > degree for a in self):
            raise PrecisionError("map has terms above the requested degree")
        return SeriesMap(
            TruncatedSeries._from_raw(a.nvars, degree, a.spec, dict(a._terms)) for a in self
        )


def _check_maps(a: SeriesMap, b: SeriesMap):
    if len(a) != len(b):
        raise ShapeError(f"component counts differ: {len(a)} vs {len(b)}")


def identity_map(n: int, max_degree: int, spec: FieldSpec) -> SeriesMap:
    if n < 1:
        raise InvalidParameterError("identity map needs n >= 1")
    return SeriesMap(TruncatedSeries.variable(i, n, max_degree, spec) for i in range(n))


class PowerTable:
    """Memoized monomials ``g^alpha`` of a substitution ``g``, truncated.

    ``alpha`` keys use the packing of the *outer* series (``len(g)``
    variables); the cached series live in ``g``'s variables.  One table can
    serve any number of compositions with the same ``g``.
    """

    def __init__(self, g: SeriesMap | Sequence[TruncatedSeries], max_degree: int | None = None):
        g = g if isinstance(g, SeriesMap) else SeriesMap(g)
        for i, gi in enumerate(g):
            if gi.constant_term():
                raise CompositionDomainError(
                    f"substituted component {i + 1} has nonzero constant term {gi.constant_term()}"
                )
        self.g = g
        self.k = len(g)
        self.max_degree = g.max_degree if max_degree is None else min(max_degree, g.max_degree)
        self.spec = g.spec
        self._outer_shift = _BITS * self.k
        self._inner_shift = _BITS * g.nvars
        self._units = [_unit_key(i, self.k) for i in range(self.k)]
        self._cache = {0: {0: g.spec.one}}

    def power(self, alpha: Sequence[int]) -> TruncatedSeries:
        """``g^alpha`` (``alpha`` an exponent tuple) through ``max_degree``."""
        if len(alpha) != self.k:
            raise ShapeError(f"exponent {tuple(alpha)} does not have {self.k} entries")
        raw = self._power_raw(pack(alpha))
        return TruncatedSeries._from_raw(self.g.nvars, self.max_degree, self.spec, dict(raw))

    def _power_raw(self, alpha: int) -> dict:
        # raw terms of g^alpha for a packed exponent key
        cache = self._cache
        hit = cache.get(alpha)
        if hit is not None:
            return hit
        # peel one factor off the first variable with a positive exponent
        stack = [alpha]
        while stack:
            a = stack[-1]
            if a in cache:
                stack.pop()
                continue
            j = self._first_var(a)
            prev = a - self._units[j]
            if prev not in cache:
                stack.append(prev)
                continue
            cache[a] = _mul_raw(
                cache[prev], self.g[j]._terms, self._inner_shift, self.max_degree, self.spec.reduce
            )
            stack.pop()
        return cache[alpha]

    def _first_var(self, alpha: int) -> int:
        for j in range(self.k):
            if (alpha >> (_BITS * (self.k - 1 - j))) & _MASK:
                return j
        raise AssertionError("unit monomial has no variable")

    def compose(self, f: TruncatedSeries) -> TruncatedSeries:
        if f.nvars != self.k:
            raise ShapeError(f"series in {f.nvars} variables cannot take {self.k} substitutions")
        if f.spec != self.spec:
            raise ShapeError(f"fields differ: {f.spec} vs {self.spec}")
        md = min(f.max_degree, self.max_degree)
        out: dict = {}
        get = out.get
        oshift = self._outer_shift
        limit = (md + 1) << self._inner_shift
        for alpha, c in f._terms.items():
            if alpha >> oshift > md:
                continue
            for k, v in self._power_raw(alpha).items():
                if k < limit:
                    out[k] = get(k, 0) + c * v
        red = self.spec.reduce
        raw = {}
        for k, v in out.items():
            v = red(v)
            if v:
                raw[k] = v
        return TruncatedSeries._from_raw(self.g.nvars, md, self.spec, raw)


def ps_compose(f: TruncatedSeries, g: SeriesMap | Sequence[TruncatedSeries]) -> TruncatedSeries:
    """Substitute ``g[i]`` for the i-th variable of ``f``."""
    table = PowerTable(g)
    return table.compose(f)


def map_compose(f: SeriesMap, g: SeriesMap) -> SeriesMap:
    """The map ``f o g``: every component of ``f`` evaluated at ``g``."""
    table = PowerTable(g)
    return SeriesMap(table.compose(fi) for fi in f)
