import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avcdos.channel_model import xor_channel
from avcdos.exact_linear import (
    CapExceeded, LinearSystem, MalformedSystem, Status, TooLarge, enumerate_basic_feasible, fm_feasible,
    fourier_motzkin_eliminate, lp_feasible, lp_optimize, verify_farkas)
from avcdos.symmetrizability import build_symmetrizing_system

from helpers import random_avc, random_dims, random_system


def sys_(n, eqs=(), ineqs=(), nonneg=()):
    conv = lambda rows: tuple((tuple(F(v) for v in a), F(b)) for a, b in rows)
    return LinearSystem(n, conv(eqs), conv(ineqs), frozenset(nonneg))


SIMPLEX_2 = sys_(2, eqs=[((1, 1), 1)], nonneg=(0, 1))


def test_contradictory_bounds_give_certificate():
    s = sys_(1, ineqs=[((1,), -1)], nonneg=(0,))  # x0 >= 0, x0 <= -1
    r = lp_feasible(s)
    assert r.status is Status.INFEASIBLE
    assert verify_farkas(s, r.farkas)


def test_simplex_feasible():
    r = lp_feasible(SIMPLEX_2)
    assert r.feasible and SIMPLEX_2.is_satisfied_by(r.witness)


def test_xor_symmetrizing_system_feasible():
    s = build_symmetrizing_system(xor_channel())
    assert lp_feasible(s).feasible and enumerate_basic_feasible(s).feasible


def test_lp_optimize_examples():
    r = lp_optimize(SIMPLEX_2, (1, 0), "min")
    assert r.status is Status.OPTIMAL and r.value == 0 and r.argmin == (0, 1)
    assert lp_optimize(sys_(1, nonneg=(0,)), (1,), "max").status is Status.UNBOUNDED
    s = build_symmetrizing_system(xor_channel())
    # P = (1,0), l = (0,1): cost P(0) U(1|0)
    assert lp_optimize(s, (0, 1, 0, 0), "min").value == 0


def test_lp_optimize_infeasible_carries_certificate():
    s = sys_(1, ineqs=[((1,), -1)], nonneg=(0,))
    r = lp_optimize(s, (1,))
    assert r.status is Status.INFEASIBLE and verify_farkas(s, r.farkas)


def test_malformed_inputs():
    with pytest.raises(MalformedSystem):
        LinearSystem(2, ((( F(1),), F(0)),), (), frozenset())
    with pytest.raises(MalformedSystem):
        lp_optimize(SIMPLEX_2, (1,))
    with pytest.raises(MalformedSystem):
        fourier_motzkin_eliminate(SIMPLEX_2, 5)


def test_fm_projection_example():
    # vars (x, y): y >= x, y <= 1  ->  x <= 1
    s = sys_(2, ineqs=[((1, -1), 0), ((0, 1), 1)])
    out = fourier_motzkin_eliminate(s, 1)
    assert out.num_vars == 1
    assert out.inequalities == ((( F(1),), F(1)),)


def test_fm_contradiction_example():
    s = sys_(1, ineqs=[((-1,), 0), ((1,), -1)])
    out = fourier_motzkin_eliminate(s, 0)
    assert out.num_vars == 0
    assert any(b < 0 for _, b in out.inequalities)
    assert not fm_feasible(s)


def test_fm_cap():
    rows = [((1, F(k)), k) for k in range(30)] + [((-1, F(k)), k) for k in range(30)]
    with pytest.raises(CapExceeded):
        fourier_motzkin_eliminate(sys_(2, ineqs=rows), 0, cap=100)


def test_fm_on_symmetrizing_systems_matches_lp():
    rng = random.Random(3)
    for _ in range(100):
        w = random_avc(rng, random_dims(rng, 2, 3, 3))
        s = build_symmetrizing_system(w)
        assert fm_feasible(s) == lp_feasible(s).feasible


def test_verify_farkas_rejects_bad_certificates():
    s = sys_(1, ineqs=[((1,), -1)], nonneg=(0,))
    assert not verify_farkas(s, (0,))
    assert not verify_farkas(s, (F(-1),))
    assert not verify_farkas(s, (1, 2))
    assert not verify_farkas(s, ("junk",))


def _planted_infeasible(rng):
    # x >= 0 (all vars), sum x <= -k, plus random noise rows
    n = rng.randint(1, 5)
    rows = [(tuple(F(1) for _ in range(n)), F(-rng.randint(1, 5)))]
    for _ in range(rng.randint(0, 4)):
        rows.append((tuple(F(rng.randint(-3, 3)) for _ in range(n)), F(rng.randint(-3, 3))))
    rng.shuffle(rows)
    return LinearSystem(n, (), tuple(rows), frozenset(range(n)))


def test_certificates_from_planted_infeasible_systems():
    rng = random.Random(5)
    for _ in range(100):
        s = _planted_infeasible(rng)
        r = lp_feasible(s)
        assert not r.feasible and verify_farkas(s, r.farkas)


def test_oracle_examples():
    assert enumerate_basic_feasible(SIMPLEX_2).feasible
    s = sys_(2, eqs=[((1, 1), 1), ((1, -1), 3)], nonneg=(0, 1))
    assert not enumerate_basic_feasible(s).feasible
    with pytest.raises(TooLarge):
        enumerate_basic_feasible(LinearSystem(13, (), (), frozenset()))


def test_three_way_agreement_on_random_systems():
    rng = random.Random(8)
    for _ in range(200):
        s = random_system(rng, max_vars=6)
        r = lp_feasible(s)
        assert r.feasible == enumerate_basic_feasible(s).feasible == fm_feasible(s)
        if r.feasible:
            assert s.is_satisfied_by(r.witness)
        else:
            assert verify_farkas(s, r.farkas)


def test_oracle_agreement_up_to_eight_vars():
    rng = random.Random(9)
    for _ in range(200):
        s = random_system(rng, max_vars=8, max_rows=5)
        assert lp_feasible(s).feasible == enumerate_basic_feasible(s).feasible


def _bounded_system(rng):
    n = rng.randint(1, 4)
    rows = [(tuple(F(rng.randint(-3, 3)) for _ in range(n)), F(rng.randint(-2, 6))) for _ in range(rng.randint(1, 5))]
    rows.append((tuple(F(1) for _ in range(n)), F(rng.randint(0, 5))))  # box it in
    return LinearSystem(n, (), tuple(rows), frozenset(range(n)))


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False), st.fractions(min_value=F(1, 5), max_value=5, max_denominator=5))
def test_value_invariant_under_permutation_and_scaling(rnd, scale):
    s = _bounded_system(rnd)
    c = tuple(F(rnd.randint(-3, 3)) for _ in range(s.num_vars))
    base = lp_optimize(s, c)
    rows = list(s.inequalities)
    rnd.shuffle(rows)
    k = rnd.randrange(len(rows))
    rows[k] = (tuple(scale * v for v in rows[k][0]), scale * rows[k][1])
    other = lp_optimize(LinearSystem(s.num_vars, (), tuple(rows), s.nonneg), c)
    assert base.status == other.status
    if base.status is Status.OPTIMAL:
        assert base.value == other.value
    assert lp_feasible(s).feasible == (base.status is not Status.INFEASIBLE)


def test_deterministic_witness():
    s = build_symmetrizing_system(xor_channel())
    assert lp_feasible(s).witness == lp_feasible(s).witness


def test_dump_format():
    text = SIMPLEX_2.dump()
    assert "2" in text.splitlines()[0]
