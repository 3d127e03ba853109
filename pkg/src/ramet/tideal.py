"""Multilinear T-ideal components, echelon normal forms, and membership.

For a variety given by multilinear identity templates, the component at
degree d is the span, inside the multilinear monomial space on x1..xd, of
every substitution instance of the identities wrapped in arbitrary monomial
contexts.  Two generation strategies are implemented:

* :func:`consequences` enumerates the classical spanning set directly (block
  substitutions into each identity times a one-hole context over the leftover
  variables).  It is exhaustive and used as the low-degree oracle.

* :func:`component_basis` builds the component degree by degree: the span at
  degree d is generated by the pure identity instances of degree d together
  with the images of the degree d-1 span under right/left multiplication by
  a new generator and under the leaf expansions x_u -> (x_u x_v),
  (x_v x_u).  Every context/substitution generator decomposes along a cherry
  or a root leaf of its tree into such an image, so the recursion spans the
  same component while only ever touching short echelon rows.

Rows live in an incrementally maintained reduced row-echelon form over the
canonical term order (pivot = least monomial).  Tails of stored rows contain
no pivot columns, which keeps rows short (pivot + at most one entry per
quotient dimension) and makes single-pass reduction sound.

Everything is exact.  The construction is faithful over the rationals and
over F_p with p greater than the working degree, where full linearization is
reversible; :meth:`FieldSpec.check_degree` guards the prime case.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import struct
from dataclasses import dataclass
from fractions import Fraction

from .freealg import (
    Poly,
    format_term,
    multilinear_count,
    multilinear_monomials,
    multilinear_ordinal,
    multilinear_term,
    term_key,
    term_map_leaves,
    term_relabel,
)
from .scalar import QQ, FieldSpec

DEFAULT_DEGREE_CAP = 7

_HOLE = 0  # context-hole sentinel; real generators start at 1


class DegreeCapError(ValueError):
    """A computation would exceed the configured degree cap."""


# ---------------------------------------------------------------------------
# identity systems


def right_alt_identity() -> Poly:
    """(x1,x2,x3) + (x1,x3,x2): associators symmetrized in the last two slots."""
    from .freealg import associator

    x1, x2, x3 = Poly.gen(1), Poly.gen(2), Poly.gen(3)
    return associator(x1, x2, x3) + associator(x1, x3, x2)


def metabelian_identity() -> Poly:
    """(x1 x2)(x3 x4)."""
    return Poly.monomial(((1, 2), (3, 4)))


def lie_nilpotent_identity(s: int) -> Poly:
    """Left-normed commutator [[..[x1,x2],..], x_{s+1}] of step s >= 1."""
    from .freealg import commutator

    if s < 1:
        raise ValueError("Lie-nilpotency step must be >= 1")
    out = commutator(Poly.gen(1), Poly.gen(2))
    for i in range(3, s + 2):
        out = commutator(out, Poly.gen(i))
    return out


class Variety:
    """An identity system; the built-ins are ra2 and ral<s>."""

    def __init__(self, name: str, identities, s: int | None = None):
        self.name = name
        self.s = s
        normalized = []
        for f in identities:
            if not f.is_multilinear():
                f = f.multilinearize()
            md = f.multidegree()
            fwd = {g: i + 1 for i, g in enumerate(sorted(md))}
            normalized.append(f.relabel(fwd))
        normalized.sort(key=lambda f: (f.degree(), sorted(map(term_key, f.coeffs))))
        self.identities = tuple(normalized)

    @classmethod
    def ra2(cls) -> "Variety":
        return cls("ra2", [right_alt_identity(), metabelian_identity()])

    @classmethod
    def ral(cls, s: int) -> "Variety":
        return cls(
            f"ral{s}",
            [right_alt_identity(), metabelian_identity(), lie_nilpotent_identity(s)],
            s=s,
        )

    @classmethod
    def parse(cls, text: str) -> "Variety":
        text = text.strip().lower()
        if text == "ra2":
            return cls.ra2()
        if text.startswith("ral:"):
            return cls.ral(int(text[4:]))
        raise ValueError(f"unknown variety {text!r} (expected 'ra2' or 'ral:<s>')")

    def identity_hash(self) -> str:
        blob = []
        for f in self.identities:
            blob.append(
                ";".join(
                    f"{QQ.format_value(c)}*{format_term(t)}" for t, c in f.sorted_items()
                )
            )
        digest = hashlib.sha256("|".join(blob).encode()).hexdigest()
        return digest[:16]

    def __repr__(self):
        return f"Variety({self.name})"


# ---------------------------------------------------------------------------
# sparse reduced row echelon form, maintained incrementally
#
# ``pivots`` maps a pivot column to its full row (pivot coefficient 1); tails
# never contain pivot columns, so reducing an incoming row is a single pass
# over the pivot columns it starts with.  ``tails`` indexes, per column, the
# pivots whose row tail touches it, so newly won pivots back-substitute in
# time proportional to the rows actually affected.


def _reduce_row(row: dict, pivots: dict, p) -> dict:
    hits = [c for c in row if c in pivots]
    if p is None:
        for lead in hits:
            c = row.pop(lead)
            for col, v in pivots[lead].items():
                if col == lead:
                    continue
                nv = row.get(col, 0) - c * v
                if nv:
                    row[col] = nv
                else:
                    del row[col]
    else:
        for lead in hits:
            c = row.pop(lead)
            for col, v in pivots[lead].items():
                if col == lead:
                    continue
                nv = (row.get(col, 0) - c * v) % p
                if nv:
                    row[col] = nv
                else:
                    del row[col]
    return row


def _insert_row(row: dict, pivots: dict, tails: dict, p, one) -> int | None:
    """Reduce ``row`` and, if independent, adopt it as a new pivot row."""
    _reduce_row(row, pivots, p)
    if not row:
        return None
    lead = min(row)
    c = row.pop(lead)
    if p is None:
        if c != 1:
            row = {col: v / c for col, v in row.items()}
    else:
        inv = pow(c, -1, p)
        if inv != 1:
            row = {col: v * inv % p for col, v in row.items()}
    affected = tails.pop(lead, None)
    if affected:
        for pcol in affected:
            prow = pivots[pcol]
            cc = prow.pop(lead)
            if p is None:
                for col, v in row.items():
                    nv = prow.get(col, 0) - cc * v
                    if nv:
                        if col not in prow:
                            tails.setdefault(col, set()).add(pcol)
                        prow[col] = nv
                    else:
                        del prow[col]
                        tails[col].discard(pcol)
            else:
                for col, v in row.items():
                    nv = (prow.get(col, 0) - cc * v) % p
                    if nv:
                        if col not in prow:
                            tails.setdefault(col, set()).add(pcol)
                        prow[col] = nv
                    else:
                        del prow[col]
                        tails[col].discard(pcol)
    row[lead] = one
    pivots[lead] = row
    for col in row:
        if col != lead:
            tails.setdefault(col, set()).add(lead)
    return lead


class Basis:
    """Echelonized multilinear T-ideal component at one degree."""

    __slots__ = ("variety_name", "identity_hash", "degree", "field", "pivots", "n_monomials")

    def __init__(self, variety_name, identity_hash, degree, field, pivots):
        self.variety_name = variety_name
        self.identity_hash = identity_hash
        self.degree = degree
        self.field = field
        self.pivots = pivots
        self.n_monomials = multilinear_count(degree)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def dim(self) -> int:
        """Dimension of the quotient (relatively free) component."""
        return self.n_monomials - self.rank

    def reduce_vec(self, vec: dict) -> dict:
        p = self.field.p if self.field.kind == "fp" else None
        return _reduce_row(dict(vec), self.pivots, p)

    def contains_vec(self, vec: dict) -> bool:
        return not self.reduce_vec(vec)

    def __repr__(self):
        return (
            f"Basis({self.variety_name}, d={self.degree}, {self.field.name}, "
            f"rank={self.rank}, dim={self.dim})"
        )


# ---------------------------------------------------------------------------
# degree-by-degree construction


def _degree_rows(V: Variety, d: int, lower: Basis | None, field: FieldSpec):
    for tmpl in V.identities:
        if tmpl.degree() != d:
            continue
        items = [(t, field.normalize(c)) for t, c in tmpl.coeffs.items()]
        for perm in itertools.permutations(range(1, d + 1)):
            mapping = {i + 1: perm[i] for i in range(d)}
            yield {
                multilinear_ordinal(term_relabel(t, mapping)): c for t, c in items
            }
    if lower is None or not lower.pivots:
        return
    dm1 = d - 1
    base = [
        [(multilinear_term(o, dm1), c) for o, c in prow.items()]
        for prow in lower.pivots.values()
    ]
    for v in range(1, d + 1):
        others = [i for i in range(1, d + 1) if i != v]
        mapping = {j + 1: others[j] for j in range(dm1)}
        for entry in base:
            terms = [(term_relabel(t, mapping), c) for t, c in entry]
            yield {multilinear_ordinal((t, v)): c for t, c in terms}
            yield {multilinear_ordinal((v, t)): c for t, c in terms}
            for u in others:
                for grown in ((u, v), (v, u)):
                    yield {
                        multilinear_ordinal(
                            term_map_leaves(t, lambda i: grown if i == u else i)
                        ): c
                        for t, c in terms
                    }


_BASIS_MEMO: dict[tuple, Basis] = {}


def _memo_key(V: Variety, d: int, field: FieldSpec):
    return (V.name, V.identity_hash(), d, field.name)


def _peek(V, d, field, cache_dir) -> Basis | None:
    b = _BASIS_MEMO.get(_memo_key(V, d, field))
    if b is not None:
        if cache_dir and not os.path.exists(
            basis_cache_path(cache_dir, V.name, d, field)
        ):
            save_basis_cache(b, cache_dir)
        return b
    if cache_dir:
        b = load_basis_cache(V, d, field, cache_dir)
        if b is not None:
            _BASIS_MEMO[_memo_key(V, d, field)] = b
    return b


def component_basis(
    V: Variety,
    d: int,
    field: FieldSpec = QQ,
    *,
    cache_dir: str | None = None,
    degree_cap: int = DEFAULT_DEGREE_CAP,
    allow_small_prime: bool = False,
) -> Basis:
    """Echelonized T-ideal component plus quotient dimension at degree d."""
    if d < 1:
        raise ValueError("degree must be >= 1")
    if d > degree_cap:
        raise DegreeCapError(f"degree {d} exceeds the cap {degree_cap}")
    field.check_degree(d, allow_small_prime)
    start, lower = 0, None
    for dd in range(d, 0, -1):
        b = _peek(V, dd, field, cache_dir)
        if b is not None:
            start, lower = dd, b
            break
    p = field.p if field.kind == "fp" else None
    one = field.one()
    for dd in range(start + 1, d + 1):
        pivots: dict = {}
        tails: dict = {}
        for row in _degree_rows(V, dd, lower, field):
            _insert_row(row, pivots, tails, p, one)
        lower = Basis(V.name, V.identity_hash(), dd, field, pivots)
        if cache_dir:
            save_basis_cache(lower, cache_dir)
        _BASIS_MEMO[_memo_key(V, dd, field)] = lower
    return lower


# ---------------------------------------------------------------------------
# direct consequence enumeration (oracle-grade, small degrees)


def consequences(
    V: Variety, multidegree, *, degree_cap: int = DEFAULT_DEGREE_CAP
) -> list[Poly]:
    """Spanning set of the T-ideal component at the given multidegree.

    For each identity f(y1..yk): every assignment of the degree slots to the
    k substitution blocks (all nonempty) or to the surrounding context, every
    choice of multilinear monomials on the blocks, and every one-hole
    monomial context over the context slots.  Repeated generators in the
    multidegree are handled by enumerating on occurrence labels and
    identifying afterwards, which is faithful whenever the characteristic
    exceeds the degree.
    """
    md = tuple(sorted(multidegree))
    d = len(md)
    if d > degree_cap:
        raise DegreeCapError(f"multidegree size {d} exceeds the cap {degree_cap}")
    identify = {i + 1: md[i] for i in range(d)}
    out = []
    for tmpl in V.identities:
        k = tmpl.degree()
        if k > d:
            continue
        for assignment in itertools.product(range(k + 1), repeat=d):
            blocks = [
                [i + 1 for i, a in enumerate(assignment) if a == j]
                for j in range(1, k + 1)
            ]
            if any(not b for b in blocks):
                continue
            ctx_vars = [i + 1 for i, a in enumerate(assignment) if a == 0]
            contexts = _one_hole_contexts(ctx_vars)
            for monos in itertools.product(*(multilinear_monomials(b) for b in blocks)):
                inst = tmpl.substitute(
                    {j + 1: Poly.monomial(monos[j]) for j in range(k)}
                )
                for ctx in contexts:
                    g = _apply_context(ctx, inst)
                    g = g.relabel(identify)
                    if not g.is_zero():
                        out.append(g)
    return out


def _one_hole_contexts(ctx_vars) -> list:
    """Monomial contexts with one hole and the given leaves, all shapes/orders."""
    return multilinear_monomials([_HOLE] + list(ctx_vars)) if ctx_vars else [_HOLE]


def _apply_context(ctx, p: Poly) -> Poly:
    out = {}
    for t, c in p.coeffs.items():
        out[term_map_leaves(ctx, lambda i: t if i == _HOLE else i)] = c
    return Poly(out, p.field, _trusted=True)


# ---------------------------------------------------------------------------
# membership and normal forms


def _vectorize(f: Poly) -> tuple[int, dict, dict]:
    """Relabel a multilinear f onto x1..xd; returns (d, vec, inverse map)."""
    md = f.multidegree()
    if md is None:
        raise ValueError("need a multihomogeneous polynomial")
    if len(md) != len(set(md)):
        raise ValueError("need a multilinear polynomial")
    fwd = {g: i + 1 for i, g in enumerate(md)}
    back = {i + 1: g for i, g in enumerate(md)}
    vec = {
        multilinear_ordinal(term_relabel(t, fwd)): c for t, c in f.coeffs.items()
    }
    return len(md), vec, back


def normal_form(
    f: Poly,
    V: Variety,
    field: FieldSpec | None = None,
    **kwargs,
) -> Poly:
    """Residue of f against the echelonized T-ideal component; idempotent."""
    if field is None:
        field = f.field
    if f.field != field:
        f = f.map_field(field)
    if f.is_zero():
        return f
    d, vec, back = _vectorize(f)
    basis = component_basis(V, d, field, **kwargs)
    residue = basis.reduce_vec(vec)
    out = {
        term_relabel(multilinear_term(o, d), back): c for o, c in residue.items()
    }
    return Poly(out, field, _trusted=True)


def member(f: Poly, V: Variety, field: FieldSpec | None = None, **kwargs) -> bool:
    """True iff f lies in the multilinear T-ideal component of V."""
    if field is None:
        field = f.field
    if f.field != field:
        f = f.map_field(field)
    if f.is_zero():
        return True
    d, vec, _ = _vectorize(f)
    basis = component_basis(V, d, field, **kwargs)
    return basis.contains_vec(vec)


def approx_zero(
    f: Poly, V: Variety, k: int = 1, field: FieldSpec | None = None, **kwargs
) -> bool:
    """The vanishing-after-right-multiplications relation.

    True iff f * R_{y1} ... R_{y2k} lies in the T-ideal component, where the
    y's are the 2k smallest generator indices not occurring in f.  The
    operand indices are taken pairwise distinct: with a repeated operand the
    test would be vacuous, since any f * R_y R_y already lies in the ideal.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if f.is_zero():
        return True
    if not f.is_multilinear():
        raise ValueError("the relation is tested on multilinear polynomials")
    support = f.support()
    fresh = []
    i = 1
    while len(fresh) < 2 * k:
        if i not in support:
            fresh.append(i)
        i += 1
    g = f
    for y in fresh:
        g = g * Poly.gen(y, f.field)
    return member(g, V, field, **kwargs)


# ---------------------------------------------------------------------------
# extra generator families (operator ideals, seed-applied)


def _apply_letter(p: Poly, sym: str, v: int) -> Poly:
    g = Poly.gen(v, p.field)
    if sym == "R":
        return p * g
    if sym == "L":
        return g * p
    if sym == "H":
        return p * g - g * p
    raise ValueError(f"unknown operator symbol {sym!r}")


@dataclass(frozen=True)
class GeneratorFamily:
    """Spanning families adjoined to the T-ideal component.

    kind 'tideal' adjoins nothing; 'left_ideal' spans the seed-applied
    operator words that begin with a left multiplication; 'h_ideal' spans the
    seed-applied two-sided operator ideal generated by contiguous blocks of n
    H-letters on distinct variables, with context words bounded by the fixed
    multidegree.
    """

    kind: str
    seed: tuple[int, int] | None = None
    operator_vars: tuple[int, ...] = ()
    n: int | None = None

    def polynomials(self, field: FieldSpec = QQ) -> list[Poly]:
        if self.kind == "tideal":
            return []
        if self.seed is None:
            raise ValueError("family needs a seed pair")
        a, b = self.seed
        seed_poly = Poly.gen(a, field) * Poly.gen(b, field)
        if self.kind == "left_ideal":
            return self._left_ideal(seed_poly)
        if self.kind == "h_ideal":
            return self._h_ideal(seed_poly)
        raise ValueError(f"unknown family kind {self.kind!r}")

    def _left_ideal(self, seed_poly: Poly) -> list[Poly]:
        out = []
        for c in self.operator_vars:
            rest = [v for v in self.operator_vars if v != c]
            head = Poly.gen(c, seed_poly.field) * seed_poly
            for order in itertools.permutations(rest):
                for syms in itertools.product("RLH", repeat=len(rest)):
                    g = head
                    for sym, v in zip(syms, order):
                        g = _apply_letter(g, sym, v)
                    out.append(g)
        return out

    def _h_ideal(self, seed_poly: Poly) -> list[Poly]:
        if not self.n or self.n < 1:
            raise ValueError("h_ideal family needs a block length n >= 1")
        out = []
        for block in itertools.permutations(self.operator_vars, self.n):
            rest = [v for v in self.operator_vars if v not in block]
            for order in itertools.permutations(rest):
                for cut in range(len(rest) + 1):
                    prefix, suffix = order[:cut], order[cut:]
                    for syms in itertools.product("RLH", repeat=len(rest)):
                        g = seed_poly
                        for sym, v in zip(syms[:cut], prefix):
                            g = _apply_letter(g, sym, v)
                        for v in block:
                            g = _apply_letter(g, "H", v)
                        for sym, v in zip(syms[cut:], suffix):
                            g = _apply_letter(g, sym, v)
                        out.append(g)
        return out


def member_with_extra_generators(
    f: Poly,
    V: Variety,
    extras,
    field: FieldSpec | None = None,
    **kwargs,
) -> bool:
    """Membership in span(T-ideal component + extra generators).

    ``extras`` is a GeneratorFamily or an iterable of polynomials sharing the
    multidegree of f.
    """
    if field is None:
        field = f.field
    if isinstance(extras, GeneratorFamily):
        extra_polys = extras.polynomials(QQ)
    else:
        extra_polys = list(extras)
    if f.field != field:
        f = f.map_field(field)
    if f.is_zero():
        return True
    md = f.multidegree()
    d, vec, _ = _vectorize(f)
    basis = component_basis(V, d, field, **kwargs)
    fwd = {g: i + 1 for i, g in enumerate(md)}
    p = field.p if field.kind == "fp" else None
    one = field.one()
    pivots: dict = {}
    tails: dict = {}
    for g in extra_polys:
        if g.is_zero():
            continue
        g = g.map_field(field) if g.field != field else g
        if g.multidegree() != md:
            raise ValueError(
                "extra generators must share the multidegree of the tested polynomial"
            )
        gvec = {
            multilinear_ordinal(term_relabel(t, fwd)): c for t, c in g.coeffs.items()
        }
        _insert_row(basis.reduce_vec(gvec), pivots, tails, p, one)
    residue = basis.reduce_vec(vec)
    return not _reduce_row(residue, pivots, p)


# ---------------------------------------------------------------------------
# basis cache files
#
# Layout (documented, portable):
#   line 1: JSON header {"format": "ramet-basis", "version": 1, "variety",
#           "identity_hash", "degree", "field", "monomials", "rank"} + "\n"
#   then, for each pivot row in increasing pivot order:
#       u32 little-endian entry count, then per entry a u32 term ordinal
#       followed by the scalar: u64 residue over fp, or a u32 length-prefixed
#       ASCII "num/den" fraction over q.


CACHE_VERSION = 1


def basis_cache_path(cache_dir: str, variety_name: str, degree: int, field: FieldSpec) -> str:
    return os.path.join(cache_dir, f"{variety_name}-d{degree}-{field.name}.basis")


def save_basis_cache(basis: Basis, cache_dir: str) -> str:
    os.makedirs(cache_dir, exist_ok=True)
    path = basis_cache_path(cache_dir, basis.variety_name, basis.degree, basis.field)
    tmp = f"{path}.tmp.{os.getpid()}"
    header = {
        "format": "ramet-basis",
        "version": CACHE_VERSION,
        "variety": basis.variety_name,
        "identity_hash": basis.identity_hash,
        "degree": basis.degree,
        "field": basis.field.name,
        "monomials": basis.n_monomials,
        "rank": basis.rank,
    }
    is_fp = basis.field.kind == "fp"
    with open(tmp, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        for pivot in sorted(basis.pivots):
            row = basis.pivots[pivot]
            fh.write(struct.pack("<I", len(row)))
            for col in sorted(row):
                fh.write(struct.pack("<I", col))
                if is_fp:
                    fh.write(struct.pack("<Q", row[col]))
                else:
                    frac = Fraction(row[col])
                    blob = f"{frac.numerator}/{frac.denominator}".encode()
                    fh.write(struct.pack("<I", len(blob)) + blob)
    os.replace(tmp, path)
    return path


def load_basis_cache(
    V: Variety, degree: int, field: FieldSpec, cache_dir: str
) -> Basis | None:
    """Load a cached basis; stale or corrupt files read as a miss."""
    path = basis_cache_path(cache_dir, V.name, degree, field)
    try:
        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode())
            if (
                header.get("format") != "ramet-basis"
                or header.get("version") != CACHE_VERSION
                or header.get("variety") != V.name
                or header.get("identity_hash") != V.identity_hash()
                or header.get("degree") != degree
                or header.get("field") != field.name
            ):
                return None
            is_fp = field.kind == "fp"
            pivots = {}
            for _ in range(header["rank"]):
                (count,) = struct.unpack("<I", fh.read(4))
                row = {}
                for _ in range(count):
                    (col,) = struct.unpack("<I", fh.read(4))
                    if is_fp:
                        (val,) = struct.unpack("<Q", fh.read(8))
                        row[col] = val
                    else:
                        (length,) = struct.unpack("<I", fh.read(4))
                        num, den = fh.read(length).decode().split("/")
                        row[col] = Fraction(int(num), int(den))
                pivots[min(row)] = row
            if len(pivots) != header["rank"]:
                return None
            basis = Basis(V.name, V.identity_hash(), degree, field, pivots)
            if basis.n_monomials != header["monomials"]:
                return None
            return basis
    except (OSError, ValueError, KeyError, struct.error, json.JSONDecodeError):
        return None


def clear_memo() -> None:
    """Drop the in-process basis memo (used by tests)."""
    _BASIS_MEMO.clear()
