"""Words in the right/left multiplication operators acting on seed products.

An operator letter is (symbol, generator index) with symbol R, L, or H,
where H expands as R - L.  Words act left to right on polynomials whose terms
are products (the square of the algebra); the empty word is the identity map.
Operator operands are generators only; general substitutions happen upstream
in the free algebra.

Relation checks apply lhs - rhs to a fresh seed pair x_a x_b (the two
smallest indices unused by the operands) and delegate to the T-ideal engine,
either exactly or through the vanishing-after-right-multiplications relation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .freealg import Poly, TermSyntaxError
from .scalar import QQ, FieldSpec
from .tideal import (
    GeneratorFamily,
    Variety,
    approx_zero,
    member,
    member_with_extra_generators,
)

SYMBOLS = ("R", "L", "H")

OpWord = tuple  # tuple of (symbol, index) pairs; () is the identity


def op_letter(symbol: str, index: int) -> tuple:
    if symbol not in SYMBOLS:
        raise ValueError(f"operator symbol must be one of {SYMBOLS}, got {symbol!r}")
    if index < 1:
        raise ValueError("operand indices start at 1")
    return (symbol, index)


def word(*letters) -> OpWord:
    return tuple(op_letter(sym, idx) for sym, idx in letters)


def apply_word(seed: Poly, w: OpWord) -> Poly:
    """Left-to-right action; R_y = (. y), L_y = (y .), H_y = R_y - L_y."""
    out = seed
    for sym, idx in w:
        g = Poly.gen(idx, out.field)
        if sym == "R":
            out = out * g
        elif sym == "L":
            out = g * out
        else:
            out = out * g - g * out
    return out


class OpPoly:
    """Exact linear combination of operator words (one seed convention)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        clean = {}
        for w, c in (coeffs or {}).items():
            c = Fraction(c)
            if c:
                clean[tuple(w)] = c
        self.coeffs = clean

    @classmethod
    def from_word(cls, w: OpWord, c=1) -> "OpPoly":
        return cls({tuple(w): c})

    @classmethod
    def zero(cls) -> "OpPoly":
        return cls()

    def __add__(self, other: "OpPoly") -> "OpPoly":
        out = dict(self.coeffs)
        for w, c in other.coeffs.items():
            v = out.get(w, Fraction(0)) + c
            if v:
                out[w] = v
            else:
                out.pop(w, None)
        return OpPoly(out)

    def __sub__(self, other: "OpPoly") -> "OpPoly":
        return self + (-other)

    def __neg__(self) -> "OpPoly":
        return OpPoly({w: -c for w, c in self.coeffs.items()})

    def __mul__(self, other):
        """OpPoly * OpPoly concatenates words; OpPoly * scalar scales."""
        if isinstance(other, OpPoly):
            out = {}
            for w1, c1 in self.coeffs.items():
                for w2, c2 in other.coeffs.items():
                    w = w1 + w2
                    v = out.get(w, Fraction(0)) + c1 * c2
                    if v:
                        out[w] = v
                    else:
                        out.pop(w, None)
            return OpPoly(out)
        if isinstance(other, (int, Fraction)):
            return OpPoly({w: c * other for w, c in self.coeffs.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        return isinstance(other, OpPoly) and self.coeffs == other.coeffs

    def operands(self) -> set:
        out = set()
        for w in self.coeffs:
            out.update(idx for _, idx in w)
        return out

    def __repr__(self):
        if not self.coeffs:
            return "OpPoly(0)"
        parts = [f"{c}*{format_opword(w)}" for w, c in sorted(self.coeffs.items())]
        return "OpPoly(" + " + ".join(parts) + ")"


def R(i: int) -> OpPoly:
    return OpPoly.from_word((("R", i),))


def L(i: int) -> OpPoly:
    return OpPoly.from_word((("L", i),))


def H(i: int) -> OpPoly:
    return OpPoly.from_word((("H", i),))


def op_commutator(a: OpPoly, b: OpPoly) -> OpPoly:
    return a * b - b * a


def uniform_word(symbol: str, indices) -> OpWord:
    return tuple((symbol, i) for i in indices)


def apply(seed: Poly, op) -> Poly:
    """Apply an operator word or operator polynomial to a seed polynomial."""
    if isinstance(op, OpPoly):
        out = Poly.zero(seed.field)
        for w, c in op.coeffs.items():
            out = out + apply_word(seed, w).scale(c)
        return out
    return apply_word(seed, op)


# ---------------------------------------------------------------------------
# the operator-word text form: "[R x3][H x4]..."


def parse_opword(text: str) -> OpWord:
    s = text.strip()
    out = []
    pos = 0
    while pos < len(s):
        if s[pos] != "[":
            raise TermSyntaxError("expected '[' in operator word", 1, pos + 1)
        close = s.find("]", pos)
        if close < 0:
            raise TermSyntaxError("missing ']' in operator word", 1, pos + 1)
        inner = s[pos + 1 : close].split()
        if (
            len(inner) != 2
            or inner[0] not in SYMBOLS
            or not inner[1].startswith("x")
            or not inner[1][1:].isdigit()
        ):
            raise TermSyntaxError(
                f"expected '[R|L|H x<i>]', got {s[pos:close + 1]!r}", 1, pos + 1
            )
        out.append((inner[0], int(inner[1][1:])))
        pos = close + 1
        while pos < len(s) and s[pos] in " \t":
            pos += 1
    return tuple(out)


def format_opword(w: OpWord) -> str:
    return "".join(f"[{sym} x{idx}]" for sym, idx in w)


# ---------------------------------------------------------------------------
# relation checks


def fresh_seed_pair(operands) -> tuple[int, int]:
    """The two smallest generator indices unused by the operator operands."""
    out = []
    i = 1
    while len(out) < 2:
        if i not in operands:
            out.append(i)
        i += 1
    return tuple(out)


def seed_poly(pair, field: FieldSpec = QQ) -> Poly:
    a, b = pair
    return Poly.gen(a, field) * Poly.gen(b, field)


def op_relation_check(
    lhs: OpPoly,
    rhs: OpPoly,
    V: Variety,
    mode: str = "exact",
    k: int = 1,
    field: FieldSpec | None = None,
    **kwargs,
) -> bool:
    """Whether lhs = rhs holds on seed products, exactly or approximately."""
    diff = lhs - rhs
    operands = diff.operands()
    seed = seed_poly(fresh_seed_pair(operands))
    g = apply(seed, diff)
    if mode == "exact":
        return member(g, V, field, **kwargs)
    if mode == "approx":
        return approx_zero(g, V, k, field, **kwargs)
    raise ValueError(f"unknown mode {mode!r}")


def hword_rword_congruence(
    n: int, V: Variety, field: FieldSpec | None = None, **kwargs
) -> bool:
    """H(1..n) agrees with R(1..n) modulo the left-multiplication ideal."""
    if n < 1:
        raise ValueError("n must be >= 1")
    seed_pair = (n + 1, n + 2)
    seed = seed_poly(seed_pair)
    diff = apply(seed, uniform_word("H", range(1, n + 1))) - apply(
        seed, uniform_word("R", range(1, n + 1))
    )
    fam = GeneratorFamily(
        "left_ideal", seed=seed_pair, operator_vars=tuple(range(1, n + 1))
    )
    return member_with_extra_generators(diff, V, fam, field, **kwargs)


@dataclass
class SpanReport:
    """Outcome of reducing all degree-d operator words into the span of
    H-block-then-R-block words."""

    degree: int
    h_block_bound: int | None
    spanned: bool
    checked: int
    failing_word: str | None


def hr_span_words(d: int, h_block_bound: int | None) -> list[OpWord]:
    """Words H(i1..in) R(j1..jm) over 1..d, n below the bound when given."""
    out = []
    top = d if h_block_bound is None else min(d, h_block_bound - 1)
    for n in range(top + 1):
        for hvars in itertools.permutations(range(1, d + 1), n):
            rest = [i for i in range(1, d + 1) if i not in hvars]
            for rvars in itertools.permutations(rest):
                out.append(uniform_word("H", hvars) + uniform_word("R", rvars))
    return out


def operator_span_check(
    d: int,
    V: Variety,
    h_block_bound: int | None = None,
    field: FieldSpec | None = None,
    **kwargs,
) -> SpanReport:
    """Reduce every degree-d operator word into the H-block/R-block span.

    Targets run over all 3^d symbol patterns with operands in ascending
    order; the spanning family runs over all operand orders, so ascending
    targets settle every word by relabeling symmetry of the component.
    """
    seed_pair = (d + 1, d + 2)
    seed = seed_poly(seed_pair)
    family = [apply(seed, w) for w in hr_span_words(d, h_block_bound)]
    checked = 0
    for syms in itertools.product(SYMBOLS, repeat=d):
        w = tuple((sym, i + 1) for i, sym in enumerate(syms))
        g = apply(seed, w)
        checked += 1
        if not member_with_extra_generators(g, V, family, field, **kwargs):
            return SpanReport(d, h_block_bound, False, checked, format_opword(w))
    return SpanReport(d, h_block_bound, True, checked, None)


def annihilation_sweep(
    f: Poly,
    V: Variety,
    word_degree: int,
    field: FieldSpec | None = None,
    **kwargs,
) -> tuple[bool, str | None]:
    """Whether every fresh operator word of the given degree annihilates f.

    Exhaustive over symbol patterns; operands are the smallest fresh indices
    in ascending order.
    """
    support = f.support()
    fresh = []
    i = 1
    while len(fresh) < word_degree:
        if i not in support:
            fresh.append(i)
        i += 1
    for syms in itertools.product(SYMBOLS, repeat=word_degree):
        w = tuple(zip(syms, fresh))
        if not member(apply(f, w), V, field, **kwargs):
            return False, format_opword(w)
    return True, None
