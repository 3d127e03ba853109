import math
import random

import pytest

from oracle_linalg import oracle_member, oracle_quotient_dim
from ramet.freealg import (
    Poly,
    catalan,
    multilinear_count,
    multilinear_term,
    power_left,
)
from ramet.scalar import QQ, FieldSpec, SmallPrimeError
from ramet.tideal import (
    DegreeCapError,
    GeneratorFamily,
    Variety,
    approx_zero,
    component_basis,
    consequences,
    load_basis_cache,
    member,
    member_with_extra_generators,
    normal_form,
    save_basis_cache,
)

F101 = FieldSpec("fp", 101)
F103 = FieldSpec("fp", 103)

RA2 = Variety.ra2()
RAL2 = Variety.ral(2)
RAL3 = Variety.ral(3)


def mono(t, c=1):
    return Poly.monomial(t, c)


# ---------------------------------------------------------------------------
# varieties


def test_builtin_identity_systems():
    assert [f.degree() for f in RA2.identities] == [3, 4]
    assert [f.degree() for f in RAL2.identities] == [3, 3, 4]
    assert Variety.parse("ra2").name == "ra2"
    assert Variety.parse("ral:3").name == "ral3"
    assert Variety.parse("ral:3").identity_hash() == RAL3.identity_hash()
    assert RA2.identity_hash() != RAL2.identity_hash()
    with pytest.raises(ValueError):
        Variety.parse("assoc")


# ---------------------------------------------------------------------------
# direct consequence enumeration, counted against the index-range oracle


def expected_generator_count(identity_degrees, d):
    """Independent combinatorial count of the direct spanning enumeration.

    For one identity of degree k: sum over block sizes b1..bk >= 1 with
    m = b1+..+bk <= d of  C(d, m) * m! * prod Catalan(bi - 1)
    times the one-hole contexts Catalan(d-m) * (d-m+1)! over the leftovers.
    """
    total = 0
    for k in identity_degrees:
        for m in range(k, d + 1):
            inner = 0
            for comp in compositions(m, k):
                inner += math.prod(catalan(b - 1) for b in comp)
            ctx = catalan(d - m) * math.factorial(d - m + 1)
            total += math.comb(d, m) * math.factorial(m) * inner * ctx
    return total


def compositions(m, k):
    if k == 1:
        yield (m,)
        return
    for first in range(1, m - k + 2):
        for rest in compositions(m - first, k - 1):
            yield (first,) + rest


def test_consequences_count_degree3():
    gens = consequences(RA2, (1, 2, 3))
    assert len(gens) == expected_generator_count([3], 3) == 6


def test_consequences_count_degree4():
    gens = consequences(RA2, (1, 2, 3, 4))
    assert len(gens) == expected_generator_count([3, 4], 4)


def test_consequences_contains_spec_examples():
    gens = consequences(RA2, (1, 2, 3))
    lin_ra = (
        mono(((1, 2), 3)) + mono(((1, 3), 2)) - mono((1, (2, 3))) - mono((1, (3, 2)))
    )
    assert lin_ra in gens
    gens4 = consequences(RA2, (1, 2, 3, 4))
    assert mono(((1, 2), (3, 4))) in gens4


# ---------------------------------------------------------------------------
# component dimensions, engine vs dense oracle


def test_dimension_degree2():
    assert component_basis(RA2, 2, QQ).dim == 2


def test_dimension_degree3_against_oracle():
    assert oracle_quotient_dim(consequences(RA2, (1, 2, 3)), 3) == 9
    assert component_basis(RA2, 3, QQ).dim == 9


def test_dimension_degree4_against_oracle_and_fields():
    dim_oracle = oracle_quotient_dim(consequences(RA2, (1, 2, 3, 4)), 4)
    assert dim_oracle == 36  # frozen from the dense enumeration oracle
    assert component_basis(RA2, 4, QQ).dim == 36
    assert component_basis(RA2, 4, F101).dim == 36
    assert component_basis(RA2, 4, F103).dim == 36


@pytest.mark.parametrize("variety", [RA2, RAL2, RAL3])
def test_recursive_build_matches_direct_enumeration(variety):
    for d in range(2, 5):
        md = tuple(range(1, d + 1))
        assert component_basis(variety, d, QQ).dim == oracle_quotient_dim(
            consequences(variety, md), d
        )


def test_dimension_monotone_under_added_identities():
    for d in range(2, 6):
        dim_ra2 = component_basis(RA2, d, QQ).dim
        for s in (1, 2, 3):
            assert component_basis(Variety.ral(s), d, QQ).dim <= dim_ra2


def test_known_small_dimensions():
    # frozen engine values, cross-checked against the oracle above for d <= 4
    assert [component_basis(RAL2, d, QQ).dim for d in range(1, 6)] == [1, 2, 6, 7, 9]
    assert component_basis(RAL2, 5, QQ).dim == 2 * 5 - 1


# ---------------------------------------------------------------------------
# membership and normal forms


def test_member_spec_examples():
    lin_r2 = mono((((1, 2), 3), 4)) + mono((((1, 2), 4), 3))
    assert member(lin_r2, RA2)
    assert not member(mono((((1, 2), 3), 4)), RA2)
    assert member(mono(((1, 2), (3, 4))), RA2)


def test_member_agrees_with_dense_oracle_random():
    rng = random.Random(2203)
    gens = consequences(RA2, (1, 2, 3, 4))
    monos = [multilinear_term(o, 4) for o in range(multilinear_count(4))]
    for _ in range(12):
        f = Poly.zero()
        for _ in range(rng.randint(1, 5)):
            f = f + mono(rng.choice(monos), rng.randint(-3, 3))
        if f.is_zero():
            continue
        assert member(f, RA2) == oracle_member(f, gens, 4)


def test_normal_form_idempotent_and_member_equivalence():
    rng = random.Random(555)
    monos = [multilinear_term(o, 4) for o in range(multilinear_count(4))]
    for _ in range(20):
        f = Poly.zero()
        for _ in range(rng.randint(1, 6)):
            f = f + mono(rng.choice(monos), rng.randint(-4, 4))
        nf = normal_form(f, RA2)
        assert normal_form(nf, RA2) == nf
        assert member(f, RA2) == nf.is_zero()
        assert member(f - nf, RA2)


def test_normal_form_spec_examples():
    f = mono((1, 2))
    assert normal_form(f, RA2) == f  # no degree-2 relations
    lin_r2 = mono((((1, 2), 3), 4)) + mono((((1, 2), 4), 3))
    assert normal_form(lin_r2, RA2).is_zero()


def test_normal_form_keeps_original_variables():
    f = mono(((4, 7), 9)) + mono((4, (7, 9)))
    nf = normal_form(f, RA2)
    assert nf.support() <= {4, 7, 9}
    assert member(f - nf, RA2)


def test_field_consistency_membership():
    probes = [
        mono((((1, 2), 3), 4)) + mono((((1, 2), 4), 3)),
        mono(((1, 2), (3, 4))),
        mono((((1, 2), 3), 4)),
        mono((1, (2, (3, 4)))) - mono(((1, 2), (3, 4))),
    ]
    for f in probes:
        over_q = member(f, RA2, QQ)
        assert member(f, RA2, F101) == over_q
        assert member(f, RA2, F103) == over_q


def test_prime_guard():
    with pytest.raises(SmallPrimeError):
        component_basis(RA2, 5, FieldSpec("fp", 5))
    component_basis(RA2, 4, FieldSpec("fp", 5))  # p > d is fine


def test_degree_cap():
    with pytest.raises(DegreeCapError):
        component_basis(RA2, 6, QQ, degree_cap=5)
    with pytest.raises(DegreeCapError):
        consequences(RA2, tuple(range(1, 9)))


# ---------------------------------------------------------------------------
# the vanishing-after-right-multiplications relation


def test_approx_zero_cube():
    cube = power_left(1, 3).multilinearize()
    assert approx_zero(cube, RAL2, 1)
    assert not approx_zero(cube, RA2, 1)
    assert approx_zero(Poly.zero(), RA2, 5)


def test_approx_zero_uses_fresh_distinct_variables():
    # support {1,2,3} -> appended operands must be x4, x5
    cube = power_left(2, 3).multilinearize()  # lives on {2, 1, 3}? no: {2,1,3}
    support = cube.support()
    fresh = [i for i in range(1, 10) if i not in support][:2]
    g = cube
    for y in fresh:
        g = g * Poly.gen(y)
    assert approx_zero(cube, RAL2, 1) == member(g, RAL2)


# ---------------------------------------------------------------------------
# extra generator families


def seed_applied_word(seed, letters):
    from ramet.tideal import _apply_letter

    a, b = seed
    g = Poly.gen(a) * Poly.gen(b)
    for sym, v in letters:
        g = _apply_letter(g, sym, v)
    return g


def test_hword_congruence_n2_with_left_ideal_family():
    # seed (x3 x4), target H(1,2) - R(1,2) applied to it
    target = seed_applied_word((3, 4), [("H", 1), ("H", 2)]) - seed_applied_word(
        (3, 4), [("R", 1), ("R", 2)]
    )
    fam = GeneratorFamily("left_ideal", seed=(3, 4), operator_vars=(1, 2))
    assert member_with_extra_generators(target, RA2, fam)
    assert not member_with_extra_generators(target, RA2, [])
    assert not member(target, RA2)


def test_left_ideal_family_size():
    fam = GeneratorFamily("left_ideal", seed=(3, 4), operator_vars=(1, 2))
    polys = fam.polynomials()
    assert len(polys) == 2 * 3  # choice of L-operand x word symbol over the rest


def test_h_ideal_family_contains_blocks():
    fam = GeneratorFamily("h_ideal", seed=(4, 5), operator_vars=(1, 2, 3), n=2)
    polys = fam.polynomials()
    direct = seed_applied_word((4, 5), [("H", 1), ("H", 2), ("R", 3)])
    assert any(p == direct for p in polys)


def test_tideal_family_is_plain_membership():
    fam = GeneratorFamily("tideal")
    f = mono(((1, 2), (3, 4)))
    assert member_with_extra_generators(f, RA2, fam) == member(f, RA2)


# ---------------------------------------------------------------------------
# cache round trip


def test_cache_round_trip(tmp_path):
    import ramet.tideal as tideal

    cache = str(tmp_path)
    b = component_basis(RAL2, 4, QQ, cache_dir=cache)
    tideal.clear_memo()
    loaded = load_basis_cache(RAL2, 4, QQ, cache)
    assert loaded is not None
    assert loaded.rank == b.rank and loaded.dim == b.dim
    assert loaded.pivots == b.pivots
    b101 = component_basis(RAL2, 4, F101, cache_dir=cache)
    tideal.clear_memo()
    loaded101 = load_basis_cache(RAL2, 4, F101, cache)
    assert loaded101 is not None and loaded101.pivots == b101.pivots


def test_cache_ignores_corrupt_and_stale_files(tmp_path):
    import ramet.tideal as tideal
    from ramet.tideal import basis_cache_path

    cache = str(tmp_path)
    component_basis(RAL2, 3, QQ, cache_dir=cache)
    path = basis_cache_path(cache, "ral2", 3, QQ)
    with open(path, "rb") as fh:
        blob = fh.read()
    with open(path, "wb") as fh:
        fh.write(blob[: len(blob) // 2])
    tideal.clear_memo()
    assert load_basis_cache(RAL2, 3, QQ, cache) is None
    # stale: same filename, different identity system
    other = Variety("ral2", [f for f in RA2.identities])  # drops Lie-nilpotency
    component_basis(RAL2, 3, QQ, cache_dir=cache)
    tideal.clear_memo()
    assert load_basis_cache(other, 3, QQ, cache) is None
    # a rebuild through the public path works after corruption
    with open(path, "wb") as fh:
        fh.write(b"garbage")
    tideal.clear_memo()
    assert component_basis(RAL2, 3, QQ, cache_dir=cache).dim == 6
