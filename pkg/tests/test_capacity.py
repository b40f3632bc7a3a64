import math
import random
from fractions import Fraction as F

import numpy as np
import pytest

from avcdos.capacity import (
    ExactZero, MaxIterExceeded, NonStochastic, avc_capacity_avg, blahut_arimoto)
from avcdos.channel_model import Dims, averaged_channel, Distribution, identity_dmc, validate_avc, xor_channel
from avcdos.symmetrizability import is_symmetrizable

from helpers import random_avc

TOL = 1e-6


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def bsc(p):
    p = F(p)
    return [[1 - p, p], [p, 1 - p]]


def test_ba_examples():
    assert abs(blahut_arimoto([[1, 0], [0, 1]], TOL).capacity - 1.0) <= TOL
    assert blahut_arimoto([[F(1, 3), F(2, 3)]] * 3, TOL).capacity == pytest.approx(0.0, abs=TOL)
    r = blahut_arimoto(bsc(F(1, 4)), TOL)
    assert abs(r.capacity - (1 - h2(0.25))) <= TOL
    assert r.lower_bound <= 1 - h2(0.25) + 1e-12 <= r.upper_bound + 2e-12


def test_ba_errors():
    with pytest.raises(NonStochastic):
        blahut_arimoto([[0.5, 0.4]])
    with pytest.raises(NonStochastic):
        blahut_arimoto([[-0.5, 1.5]])
    with pytest.raises(ValueError):
        blahut_arimoto([[1.0]], tol=0)
    skewed = [[0.9, 0.1, 0.0], [0.0, 0.2, 0.8], [0.3, 0.3, 0.4]]
    with pytest.raises(MaxIterExceeded) as exc:
        blahut_arimoto(skewed, tol=1e-12, max_iter=3, strict=True)
    assert exc.value.result.iterations == 3


def test_ba_lower_bound_monotone():
    rng = random.Random(40)
    for _ in range(30):
        w = rng.random() * np.eye(3) + np.array([[rng.random() for _ in range(3)] for _ in range(3)])
        w = (w / w.sum(axis=1, keepdims=True)).tolist()
        hist = blahut_arimoto(w, 1e-9).lower_history
        assert all(b >= a - 1e-12 for a, b in zip(hist, hist[1:]))


def test_avc_examples():
    assert isinstance(avc_capacity_avg(xor_channel()), ExactZero)
    est = avc_capacity_avg(validate_avc([bsc(F(1, 10))[0:1], bsc(F(1, 10))[1:2]]), TOL)
    assert abs(est.value - (1 - h2(0.1))) <= TOL
    assert est.lower_bound <= est.value <= est.upper_bound and est.upper_bound - est.lower_bound <= TOL
    same = validate_avc([[bsc(F(1, 4))[0]] * 2, [bsc(F(1, 4))[1]] * 2])
    assert abs(avc_capacity_avg(same, TOL).value - (1 - h2(0.25))) <= TOL
    assert abs(avc_capacity_avg(identity_dmc(), TOL).value - 1.0) <= TOL


def test_estimate_vectors_on_simplex():
    w = validate_avc([[[F(1), F(0)], [F(1, 2), F(1, 2)]], [[F(0), F(1)], [F(1, 3), F(2, 3)]]])
    est = avc_capacity_avg(w, TOL)
    for v in (est.argmin_q, est.opt_input_p):
        assert abs(sum(v) - 1) <= 1e-12 and min(v) >= -1e-12


def test_dichotomy_and_reproducibility():
    rng = random.Random(41)
    for _ in range(25):
        w = random_avc(rng, Dims(rng.randint(1, 3), rng.randint(1, 2), rng.randint(2, 3)))
        a = avc_capacity_avg(w, 1e-5)
        assert isinstance(a, ExactZero) == is_symmetrizable(w).symmetrizable
        if not isinstance(a, ExactZero):
            b = avc_capacity_avg(w, 1e-5)
            assert a.value == b.value and a.argmin_q == b.argmin_q
            assert a.value > 0


def test_capacity_convex_in_state_mixture():
    rng = random.Random(42)
    for _ in range(20):
        w = random_avc(rng, Dims(2, 2, rng.randint(2, 3)))
        q1, q2 = (Distribution((F(k, 4), 1 - F(k, 4))) for k in (rng.randint(0, 4), rng.randint(0, 4)))
        mid = Distribution(tuple((a + b) / 2 for a, b in zip(q1.p, q2.p)))
        c = [blahut_arimoto(averaged_channel(w, q), TOL).capacity for q in (q1, q2, mid)]
        assert c[2] <= (c[0] + c[1]) / 2 + 2 * TOL
