"""Free nonassociative algebra on generators x1, x2, ...

A term is a full binary tree: a leaf is its generator index (an int >= 1),
an internal node is the pair ``(left, right)``.  Polynomials are sparse maps
from terms to nonzero field values, always homogeneity-agnostic at the data
level; multidegree and multilinearity are derived properties.

Terms carry a canonical total order: by degree, then by tree shape (preorder
encoding, internal node 0 / leaf 1), then by the left-to-right leaf sequence.
For the multilinear monomials on x1..xd this order is materialized as a dense
ordinal range 0 .. Catalan(d-1)*d! - 1, which is what the elimination engine
indexes columns by.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction

from .scalar import QQ, FieldSpec

# ---------------------------------------------------------------------------
# terms


def term_degree(t) -> int:
    if isinstance(t, int):
        return 1
    # iterative: trees are tiny but parser input is untrusted
    total, stack = 0, [t]
    while stack:
        node = stack.pop()
        if isinstance(node, int):
            total += 1
        else:
            stack.append(node[0])
            stack.append(node[1])
    return total


def term_leaves(t) -> tuple:
    """Leaf indices in left-to-right order."""
    out, stack = [], [t]
    while stack:
        node = stack.pop()
        if isinstance(node, int):
            out.append(node)
        else:
            stack.append(node[1])
            stack.append(node[0])
    return tuple(out)


def term_shape(t) -> tuple:
    """Preorder shape encoding: 0 = internal node, 1 = leaf."""
    out, stack = [], [t]
    while stack:
        node = stack.pop()
        if isinstance(node, int):
            out.append(1)
        else:
            out.append(0)
            stack.append(node[1])
            stack.append(node[0])
    return tuple(out)


def term_key(t):
    """Canonical total-order key: (degree, shape, leaf sequence)."""
    return (term_degree(t), term_shape(t), term_leaves(t))


def term_map_leaves(t, fn):
    """Rebuild the tree with every leaf i replaced by fn(i) (a leaf or a term)."""
    if isinstance(t, int):
        return fn(t)
    return (term_map_leaves(t[0], fn), term_map_leaves(t[1], fn))


def term_relabel(t, mapping: dict):
    return term_map_leaves(t, lambda i: mapping[i])


def format_term(t) -> str:
    if isinstance(t, int):
        return f"x{t}"
    return f"({format_term(t[0])} {format_term(t[1])})"


class TermSyntaxError(ValueError):
    """Malformed term or polynomial input, with 1-based position."""

    def __init__(self, message, line=1, col=1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


def parse_term(text: str, line: int = 1):
    """Parse  term := "x"<digits> | "(" term " " term ")"  (binary only)."""
    pos = 0
    n = len(text)

    def err(msg, at):
        raise TermSyntaxError(msg, line, at + 1)

    def skip_ws():
        nonlocal pos
        while pos < n and text[pos] in " \t":
            pos += 1

    def parse_one():
        nonlocal pos
        skip_ws()
        if pos >= n:
            err("unexpected end of input", pos)
        ch = text[pos]
        if ch == "x":
            start = pos
            pos += 1
            digits = pos
            while pos < n and text[pos].isdigit():
                pos += 1
            if pos == digits:
                err("expected generator index after 'x'", start)
            idx = int(text[digits:pos])
            if idx < 1:
                err("generator indices start at 1", start)
            return idx
        if ch == "(":
            open_at = pos
            pos += 1
            left = parse_one()
            if pos >= n or text[pos] not in " \t":
                err("expected space between the two factors", pos)
            right = parse_one()
            skip_ws()
            if pos >= n:
                err("missing ')'", open_at)
            if text[pos] != ")":
                err("term nodes are binary: expected ')'", pos)
            pos += 1
            return (left, right)
        err(f"unexpected character {ch!r}", pos)

    result = parse_one()
    skip_ws()
    if pos != n:
        err(f"trailing input {text[pos:]!r}", pos)
    return result


# ---------------------------------------------------------------------------
# multilinear ordinals: rank/unrank for the monomials on x1..xd

_SHAPES: dict[int, list] = {}
_SHAPE_INDEX: dict[int, dict] = {}


def _skeletons(d: int) -> list:
    """All tree shapes with d leaves, leaves labeled by position 0..d-1,
    sorted by the canonical shape encoding."""
    if d in _SHAPES:
        return _SHAPES[d]
    if d == 1:
        shapes = [0]
    else:
        shapes = []
        for i in range(1, d):
            for left in _skeletons(i):
                for right in _skeletons(d - i):
                    shifted = term_map_leaves(right, lambda k: k + i)
                    shapes.append((left, shifted))
    shapes.sort(key=term_shape)
    _SHAPES[d] = shapes
    _SHAPE_INDEX[d] = {term_shape(s): k for k, s in enumerate(shapes)}
    return shapes


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def multilinear_count(d: int) -> int:
    """Number of multilinear monomials on x1..xd."""
    return catalan(d - 1) * math.factorial(d)


def _perm_rank(perm: tuple) -> int:
    """Lehmer rank of a permutation of 1..d in lexicographic order."""
    d = len(perm)
    rank = 0
    fact = math.factorial(d - 1) if d else 1
    items = list(range(1, d + 1))
    for i, v in enumerate(perm):
        rank += items.index(v) * fact
        items.remove(v)
        if i < d - 1:
            fact //= d - 1 - i
    return rank


def _perm_unrank(rank: int, d: int) -> tuple:
    items = list(range(1, d + 1))
    out = []
    fact = math.factorial(d - 1) if d else 1
    for i in range(d):
        idx, rank = divmod(rank, fact)
        out.append(items.pop(idx))
        if i < d - 1:
            fact //= d - 1 - i
    return tuple(out)


def multilinear_ordinal(t) -> int:
    """Rank of a multilinear monomial on x1..xd in the canonical term order."""
    d = term_degree(t)
    _skeletons(d)
    shape_idx = _SHAPE_INDEX[d][term_shape(t)]
    return shape_idx * math.factorial(d) + _perm_rank(term_leaves(t))


def multilinear_term(ordinal: int, d: int):
    """Inverse of multilinear_ordinal at degree d."""
    shapes = _skeletons(d)
    shape_idx, rank = divmod(ordinal, math.factorial(d))
    perm = _perm_unrank(rank, d)
    return term_map_leaves(shapes[shape_idx], lambda pos: perm[pos])


def multilinear_monomials(variables) -> list:
    """All multilinear monomials on the given distinct generator indices."""
    vs = tuple(variables)
    if len(vs) != len(set(vs)):
        raise ValueError("variables must be distinct")
    out = []
    for skel in _skeletons(len(vs)):
        for perm in itertools.permutations(vs):
            out.append(term_map_leaves(skel, lambda pos: perm[pos]))
    return out


# ---------------------------------------------------------------------------
# polynomials


class Poly:
    """Exact polynomial of the free nonassociative algebra."""

    __slots__ = ("field", "coeffs")

    def __init__(self, coeffs=None, field: FieldSpec = QQ, _trusted=False):
        self.field = field
        if not coeffs:
            self.coeffs = {}
        elif _trusted:
            self.coeffs = coeffs
        else:
            zero = field.zero()
            clean = {}
            for t, c in coeffs.items():
                c = field.normalize(c)
                if c != zero:
                    clean[t] = c
            self.coeffs = clean

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, field: FieldSpec = QQ) -> "Poly":
        return cls({}, field)

    @classmethod
    def gen(cls, i: int, field: FieldSpec = QQ) -> "Poly":
        if i < 1:
            raise ValueError("generator indices start at 1")
        return cls({i: field.one()}, field, _trusted=True)

    @classmethod
    def monomial(cls, term, coeff=1, field: FieldSpec = QQ) -> "Poly":
        return cls({term: coeff}, field)

    # -- ring structure ---------------------------------------------------

    def _check_field(self, other: "Poly"):
        if other.field != self.field:
            raise ValueError(
                f"mixed fields: {self.field.name} and {other.field.name}"
            )

    def __add__(self, other: "Poly") -> "Poly":
        self._check_field(other)
        fld = self.field
        zero = fld.zero()
        out = dict(self.coeffs)
        for t, c in other.coeffs.items():
            v = fld.add(out.get(t, zero), c)
            if v != zero:
                out[t] = v
            else:
                out.pop(t, None)
        return Poly(out, fld, _trusted=True)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __neg__(self) -> "Poly":
        fld = self.field
        return Poly({t: fld.neg(c) for t, c in self.coeffs.items()}, fld, _trusted=True)

    def scale(self, c) -> "Poly":
        fld = self.field
        c = fld.normalize(c)
        if c == fld.zero():
            return Poly.zero(fld)
        return Poly({t: fld.mul(v, c) for t, v in self.coeffs.items()}, fld, _trusted=True)

    def __mul__(self, other):
        """Poly * Poly is the bilinear tree-grafting product; Poly * scalar scales."""
        if isinstance(other, Poly):
            self._check_field(other)
            fld = self.field
            zero = fld.zero()
            out = {}
            for s, a in self.coeffs.items():
                for t, b in other.coeffs.items():
                    key = (s, t)
                    v = fld.add(out.get(key, zero), fld.mul(a, b))
                    if v != zero:
                        out[key] = v
                    else:
                        out.pop(key, None)
            return Poly(out, fld, _trusted=True)
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.field, frozenset(self.coeffs.items())))

    def is_zero(self) -> bool:
        return not self.coeffs

    def __len__(self):
        return len(self.coeffs)

    def __bool__(self):
        return bool(self.coeffs)

    # -- structure queries -------------------------------------------------

    def support(self) -> set:
        """Generator indices occurring in the polynomial."""
        out = set()
        for t in self.coeffs:
            out.update(term_leaves(t))
        return out

    def multidegree(self):
        """Common multidegree as a sorted leaf tuple, or None if mixed/zero."""
        md = None
        for t in self.coeffs:
            this = tuple(sorted(term_leaves(t)))
            if md is None:
                md = this
            elif md != this:
                return None
        return md

    def degree(self):
        """Common total degree, or None if mixed/zero."""
        deg = None
        for t in self.coeffs:
            d = term_degree(t)
            if deg is None:
                deg = d
            elif deg != d:
                return None
        return deg

    def is_multilinear(self) -> bool:
        md = self.multidegree()
        return md is not None and len(md) == len(set(md))

    # -- substitution and linearization -------------------------------------

    def substitute(self, sigma: dict) -> "Poly":
        """Simultaneous substitution x_i -> sigma[i], expanded multilinearly."""
        missing = self.support() - sigma.keys()
        if missing:
            raise ValueError(f"substitution undefined on generators {sorted(missing)}")
        fld = self.field
        out = Poly.zero(fld)
        cache = {}

        def image(t):
            if t in cache:
                return cache[t]
            if isinstance(t, int):
                res = sigma[t]
            else:
                res = image(t[0]) * image(t[1])
            cache[t] = res
            return res

        for t, c in self.coeffs.items():
            out = out + image(t).scale(c)
        return out

    def relabel(self, mapping: dict) -> "Poly":
        """Rename generators through an index map (merging if not injective)."""
        fld = self.field
        zero = fld.zero()
        out = {}
        for t, c in self.coeffs.items():
            nt = term_relabel(t, mapping)
            v = fld.add(out.get(nt, zero), c)
            if v != zero:
                out[nt] = v
            else:
                out.pop(nt, None)
        return Poly(out, fld, _trusted=True)

    def multilinearize(self) -> "Poly":
        """Full polarization of a homogeneous polynomial.

        Each generator of multiplicity m is replaced by a family of m
        generators (itself plus m-1 fresh ones, smallest unused indices,
        allocated in increasing generator order) and all m! placements are
        summed.  Already-multilinear input comes back unchanged.
        """
        if self.is_zero():
            return self
        md = self.multidegree()
        if md is None:
            raise ValueError("multilinearize needs a multihomogeneous polynomial")
        mults = Counter(md)
        if all(m == 1 for m in mults.values()):
            return self
        used = set(md)
        fresh = (i for i in itertools.count(1) if i not in used)
        families = {}
        for g in sorted(mults):
            fam = [g]
            fam.extend(next(fresh) for _ in range(mults[g] - 1))
            families[g] = fam

        fld = self.field
        zero = fld.zero()
        out = {}
        gens = sorted(mults)
        for t, c in self.coeffs.items():
            leaves = term_leaves(t)
            skeleton_positions = {g: [k for k, v in enumerate(leaves) if v == g] for g in gens}
            for placement in itertools.product(
                *(itertools.permutations(families[g]) for g in gens)
            ):
                new_leaves = list(leaves)
                for g, perm in zip(gens, placement):
                    for slot, var in zip(skeleton_positions[g], perm):
                        new_leaves[slot] = var
                it = iter(new_leaves)
                nt = term_map_leaves(t, lambda _i: next(it))
                v = fld.add(out.get(nt, zero), c)
                if v != zero:
                    out[nt] = v
                else:
                    out.pop(nt, None)
        return Poly(out, fld, _trusted=True)

    # -- field changes ------------------------------------------------------

    def map_field(self, field: FieldSpec) -> "Poly":
        """Reinterpret coefficients in another field (rational -> F_p)."""
        if field == self.field:
            return self
        if self.field.kind != "q":
            raise ValueError("can only map rational coefficients into F_p")
        return Poly(dict(self.coeffs), field)

    # -- presentation -------------------------------------------------------

    def sorted_items(self):
        return sorted(self.coeffs.items(), key=lambda kv: term_key(kv[0]))

    def __str__(self):
        if not self.coeffs:
            return "0"
        fld = self.field
        parts = []
        for t, c in self.sorted_items():
            parts.append(f"{fld.format_value(c)} {format_term(t)}")
        return "  +  ".join(parts)

    def __repr__(self):
        return f"Poly<{self.field.name}>({self})"


# ---------------------------------------------------------------------------
# standard brackets


def commutator(f: Poly, g: Poly) -> Poly:
    """[f, g] = fg - gf."""
    return f * g - g * f


def jordan(f: Poly, g: Poly) -> Poly:
    """f o g = fg + gf."""
    return f * g + g * f


def associator(f: Poly, g: Poly, h: Poly) -> Poly:
    """(f, g, h) = (fg)h - f(gh)."""
    return (f * g) * h - f * (g * h)


def power_left(i: int, n: int, field: FieldSpec = QQ) -> Poly:
    """x_i^n parenthesized as ((x x) x) ...; fixed convention for raw powers."""
    x = Poly.gen(i, field)
    out = x
    for _ in range(n - 1):
        out = out * x
    return out


# ---------------------------------------------------------------------------
# polynomial text format: lines "<scalar> <term>" summed


def parse_poly(text: str, field: FieldSpec = QQ) -> Poly:
    out = Poly.zero(field)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise TermSyntaxError("expected '<scalar> <term>'", lineno, 1)
        try:
            coeff = field.parse_value(parts[0])
        except ValueError as exc:
            raise TermSyntaxError(str(exc), lineno, 1) from exc
        term = parse_term(parts[1], line=lineno)
        out = out + Poly.monomial(term, coeff, field)
    return out


def format_poly(p: Poly) -> str:
    return "\n".join(
        f"{p.field.format_value(c)} {format_term(t)}" for t, c in p.sorted_items()
    )
