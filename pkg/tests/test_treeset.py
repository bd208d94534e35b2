import random
from fractions import Fraction

import pytest

from oracles import ci_trace, interleave_trace, xor_trace

from cantordim.errors import ResourceLimitError, SpecFormatError
from cantordim.treeset import (BlockConstraintSet, Budget, CISet,
                               CylinderUnionSet, ExplicitSet, FullCube,
                               ProductSet, SumSet, UnionSet, coherence_holds,
                               is_trace_subset, product, singleton_zero,
                               sumset)
from cantordim.words import all_words, evens, odds, periodic_ispec


def test_meets_examples():
    assert FullCube().meets("0110")
    assert not CISet(evens()).meets("10")
    # sumset membership from the depth-2 XOR of traces
    s = SumSet(CISet(evens()), CISet(evens()))
    expected = xor_trace(ci_trace(evens().contains, 2), ci_trace(evens().contains, 2))
    assert ("01" in expected) == s.meets("01")
    assert s.meets("01")


def test_trace_examples():
    assert FullCube().trace(3) == all_words(3)
    assert CISet(evens()).trace(4) == ["0000", "0001", "0100", "0101"]
    # sumset trace identity against the brute-force XOR oracle
    a, b = CISet(evens()), CISet(periodic_ispec("", "100"))
    got = SumSet(a, b).trace(4)
    want = xor_trace(ci_trace(evens().contains, 4),
                     ci_trace(periodic_ispec("", "100").contains, 4))
    assert got == want


def test_ci_trace_matches_definition(battery):
    for name in ("ci_evens", "ci_odds", "ci_thirds", "ci_preperiod", "ci_blocks"):
        e = battery[name]
        for n in (3, 6, 8):
            assert e.trace(n) == ci_trace(e.ispec.contains, n), name


def test_sumset_algebra(battery):
    zero = singleton_zero()
    for name, e in battery.items():
        if e.interleaved:
            continue
        s = SumSet(e, zero)
        for n in (2, 5):
            assert s.trace(n) == e.trace(n), name
    # commutativity on traces
    a, b = battery["ci_evens"], battery["random_a"]
    assert SumSet(a, b).trace(6) == SumSet(b, a).trace(6)


def test_sumset_explicit_against_oracle(battery):
    a, b = battery["random_a"], battery["random_b"]
    got = SumSet(a, b).trace(6)
    want = xor_trace(a.trace(6), b.trace(6))
    assert got == want


def test_sumset_ci_intersection():
    # C_I + C_J = C_{I cap J}
    pairs = [(evens(), odds()), (evens(), evens()),
             (periodic_ispec("", "100"), evens())]
    for i, j in pairs:
        s = SumSet(CISet(i), CISet(j))
        inter = lambda n: i.contains(n) and j.contains(n)
        for depth in (4, 6):
            assert s.trace(depth) == ci_trace(inter, depth)


def test_product_counting(battery):
    for a_name, b_name in [("ci_evens", "ci_odds"), ("full_cube", "ci_evens"),
                           ("random_a", "random_b")]:
        a, b = battery[a_name], battery[b_name]
        p = ProductSet(a, b)
        for n in (2, 4, 6):
            assert p.trace_count(2 * n) == a.trace_count(n) * b.trace_count(n)
        assert p.trace(6) == interleave_trace(a.trace(3), b.trace(3))


def test_product_fullcube_and_singleton():
    p = ProductSet(FullCube(), FullCube())
    for n in (1, 2, 3):
        assert p.trace_count(2 * n) == 4 ** n
    sp = ProductSet(singleton_zero(), CISet(evens()))
    for n in (2, 4):
        assert sp.trace_count(2 * n) == CISet(evens()).trace_count(n)


def test_local_diameter():
    assert FullCube().local_diameter("", 10).scale == 0
    assert CISet(evens()).local_diameter("", 10).scale == 1
    d = ExplicitSet(["0000"]).local_diameter("", 12)
    assert d.is_point_to_depth
    # product diameters follow the max-metric scale map
    p = ProductSet(FullCube(), FullCube())
    d = p.local_diameter("0101", 12)
    assert d.scale == p.scale_of_depth(4) == 2
    assert d.value == Fraction(1, 4)


def test_coherence_property(battery, rng):
    for name, e in battery.items():
        for _ in range(25):
            depth = rng.randint(0, 6)
            p = "".join(rng.choice("01") for _ in range(depth))
            assert coherence_holds(e, p), (name, p)


def test_trace_nonempty_invariant(battery):
    for name, e in battery.items():
        assert e.trace_count(7) >= 1, name


def test_explicit_tails():
    zeros = ExplicitSet(["01"], tail="zeros")
    assert zeros.trace(4) == ["0100"]
    free = ExplicitSet(["01"], tail="free")
    assert free.trace(4) == ["0100", "0101", "0110", "0111"]


def test_block_constraint_and_gaps():
    e = BlockConstraintSet([1, 3, 5], [["01", "10"], ["11"]])
    assert e.trace(5) == sorted(x + y + "11" for x in "01" for y in ("01", "10"))
    gap = BlockConstraintSet([0, 2, 4, 6], [["00"], None, ["11"]])
    assert gap.trace_count(6) == 4
    with pytest.raises(SpecFormatError):
        BlockConstraintSet([0, 2], [[]])


def test_cylinder_union():
    c = CylinderUnionSet(["0", "10"])
    assert c.trace(2) == ["00", "01", "10"]


def test_union_members():
    u = UnionSet([ExplicitSet(["000"]), ExplicitSet(["111"])])
    assert u.trace(3) == ["000", "111"]


def test_is_trace_subset():
    ce, fc = CISet(evens()), FullCube()
    assert is_trace_subset(ce, fc, 8) is None
    w = is_trace_subset(fc, ce, 8)
    assert w is not None and not ce.meets(w)


def test_budget_guard():
    r = random.Random(7)
    words_a = r.sample(all_words(10), 400)
    words_b = r.sample(all_words(10), 400)
    s = SumSet(ExplicitSet(words_a, tail="free"), ExplicitSet(words_b, tail="free"))
    with pytest.raises(ResourceLimitError):
        s.trace(10, Budget(50))


def test_scale_convention_mixing_rejected():
    p = ProductSet(FullCube(), FullCube())
    with pytest.raises(SpecFormatError):
        SumSet(p, FullCube())
    with pytest.raises(SpecFormatError):
        ProductSet(p, FullCube())


def test_trace_determinism(battery):
    for e in battery.values():
        assert e.trace(6) == e.trace(6)
        assert e.trace(6) == sorted(e.trace(6))
