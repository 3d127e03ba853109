import itertools
import random

import pytest

from ramet.freealg import Poly, TermSyntaxError, power_left, term_degree
from ramet.operalg import (
    H,
    L,
    OpPoly,
    R,
    annihilation_sweep,
    apply,
    apply_word,
    format_opword,
    fresh_seed_pair,
    hword_rword_congruence,
    op_commutator,
    op_relation_check,
    operator_span_check,
    parse_opword,
    seed_poly,
    uniform_word,
    word,
)
from ramet.scalar import QQ, FieldSpec
from ramet.tideal import GeneratorFamily, Variety, member, member_with_extra_generators

RA2 = Variety.ra2()
RAL2 = Variety.ral(2)


def mono(t, c=1):
    return Poly.monomial(t, c)


# ---------------------------------------------------------------------------
# the action


def test_apply_examples():
    seed = mono((1, 2))
    assert apply_word(seed, word(("H", 3))) == mono(((1, 2), 3)) - mono((3, (1, 2)))
    assert apply_word(seed, ()) == seed
    assert apply_word(seed, word(("R", 3), ("R", 4))) == mono((((1, 2), 3), 4))


def test_h_expansion_identity():
    rng = random.Random(31)
    seed = mono((1, 2)) + mono((2, 1), -2)
    for _ in range(20):
        i = rng.randint(3, 6)
        assert apply_word(seed, word(("H", i))) == apply_word(
            seed, word(("R", i))
        ) - apply_word(seed, word(("L", i)))


def test_apply_degree_additive():
    seed = mono((1, 2))
    w = word(("R", 3), ("H", 4), ("L", 5))
    out = apply_word(seed, w)
    assert {term_degree(t) for t in out.coeffs} == {5}


def test_l_is_r_minus_h_pointwise():
    seed = mono((1, 2))
    assert apply_word(seed, word(("L", 3))) == apply_word(
        seed, word(("R", 3))
    ) - apply_word(seed, word(("H", 3)))


def test_op_poly_algebra():
    a = R(3) * R(4)
    assert list(a.coeffs) == [(("R", 3), ("R", 4))]
    c = op_commutator(R(3), L(4))
    assert c == OpPoly({(("R", 3), ("L", 4)): 1, (("L", 4), ("R", 3)): -1})
    assert (2 * R(3)) - R(3) == R(3)
    assert apply(seed_poly((1, 2)), R(3) - H(3)) == apply_word(
        seed_poly((1, 2)), word(("L", 3))
    )


# ---------------------------------------------------------------------------
# text form


def test_opword_round_trip():
    w = parse_opword("[R x3][H x4][L x10]")
    assert w == (("R", 3), ("H", 4), ("L", 10))
    assert format_opword(w) == "[R x3][H x4][L x10]"
    assert parse_opword("") == ()


def test_opword_errors():
    for bad in ["R x3", "[Q x3]", "[R 3]", "[R x3", "[R x3 x4]"]:
        with pytest.raises(TermSyntaxError):
            parse_opword(bad)


# ---------------------------------------------------------------------------
# exact operator relations


def test_fresh_seed_pair():
    assert fresh_seed_pair({3, 4, 5}) == (1, 2)
    assert fresh_seed_pair({1, 3}) == (2, 4)


def test_r_squared_linearized():
    lhs = R(3) * R(4) + R(4) * R(3)
    assert op_relation_check(lhs, OpPoly.zero(), RA2)


def test_rr_commutes_with_l():
    assert op_relation_check(op_commutator(R(3) * R(4), L(5)), OpPoly.zero(), RA2)


def test_rl_commutator_is_minus_ll():
    lhs = op_commutator(R(3), L(4)) + L(3) * L(4)
    assert op_relation_check(lhs, OpPoly.zero(), RA2)


def test_rr_is_central():
    for other in (R(5), H(5), L(5)):
        assert op_relation_check(
            op_commutator(R(3) * R(4), other), OpPoly.zero(), RA2
        )


def test_three_rr_relation_exact():
    lhs = 3 * (R(3) * R(4)) + H(3) * H(4)
    rhs = 2 * op_commutator(R(3), H(4)) + H(3) * R(4) + H(4) * R(3)
    assert op_relation_check(lhs, rhs, RA2)
    # and it is not a free-algebra triviality
    diff = lhs - rhs
    assert not apply(seed_poly(fresh_seed_pair(diff.operands())), diff).is_zero()


def test_relation_fails_without_identities():
    empty = Variety("free", [])
    lhs = R(3) * R(4) + R(4) * R(3)
    assert not op_relation_check(lhs, OpPoly.zero(), empty)


# ---------------------------------------------------------------------------
# approximate relations


def test_eq10_approx_degree6_small_prime_field():
    lhs = 3 * (R(3) * R(4)) - 2 * op_commutator(R(3), H(4)) + H(3) * H(4)
    assert op_relation_check(
        lhs, OpPoly.zero(), RAL2, mode="approx", k=1, field=FieldSpec("fp", 101)
    )


def test_cube_annihilation_word_degree2():
    cube = power_left(1, 3).multilinearize()
    ok, failing = annihilation_sweep(cube, RAL2, 2)
    assert ok, failing


def test_section4_jordan_triple_relation():
    # linearization of the cube relation: (x o y)T_z + (y o z)T_x + (z o x)T_y
    from ramet.freealg import jordan

    x, y, z = Poly.gen(1), Poly.gen(2), Poly.gen(3)
    for sym in "RH":
        f = (
            apply(jordan(x, y), OpPoly.from_word(((sym, 3),)))
            + apply(jordan(y, z), OpPoly.from_word(((sym, 1),)))
            + apply(jordan(z, x), OpPoly.from_word(((sym, 2),)))
        )
        from ramet.tideal import approx_zero

        assert approx_zero(f, RAL2, 1)


# ---------------------------------------------------------------------------
# congruence modulo the left-multiplication ideal


def test_hword_congruence_base_case():
    assert hword_rword_congruence(1, RA2)


def test_hword_congruence_n2():
    assert hword_rword_congruence(2, RA2)
    # without the family the difference is not in the ideal
    seed = seed_poly((3, 4))
    diff = apply(seed, uniform_word("H", (1, 2))) - apply(seed, uniform_word("R", (1, 2)))
    assert not member(diff, RA2)


def test_hword_congruence_n3():
    assert hword_rword_congruence(3, RA2)


# ---------------------------------------------------------------------------
# spanning of H-block R-block words


def test_span_degree2_all_nine_words():
    report = operator_span_check(2, RA2)
    assert report.spanned
    assert report.checked == 9


def test_span_degree3_bounded_h_block():
    report = operator_span_check(3, RAL2, h_block_bound=2, field=FieldSpec("fp", 101))
    assert report.spanned
    assert report.checked == 27


def test_span_failure_is_reported():
    # over the free variety nothing nontrivial reduces, so L-words fail
    empty = Variety("free", [])
    report = operator_span_check(1, empty)
    assert not report.spanned
    assert report.failing_word is not None
