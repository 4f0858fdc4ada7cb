"""Exact-algebra checks for the differential-polynomial ring."""

import random
from fractions import Fraction

import pytest

from kdvlab.diffpoly import (
    DiffPoly,
    euler_operator,
    integrate_total_derivative,
    lenard_operator,
    total_derivative,
)
from kdvlab.errors import NotExact

u = DiffPoly.jet(0)
ux = DiffPoly.jet(1)
uxx = DiffPoly.jet(2)
uxxx = DiffPoly.jet(3)


def random_poly(rng, max_degree=4, max_order=5, max_terms=6):
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        d = rng.randint(0, max_degree)
        orders = tuple(sorted(rng.randint(0, max_order) for _ in range(d)))
        terms[orders] = terms.get(orders, 0) + rng.randint(-9, 9)
    return DiffPoly(terms)


def test_additive_identity():
    assert u + DiffPoly.zero() == u


def test_cancellation():
    p = u * ux
    assert p + p.scale(-1) == DiffPoly.zero()


def test_addition_commutes():
    a = u * u
    b = ux
    assert a + b == b + a


def test_mul_examples():
    assert u * u == DiffPoly({(0, 0): 1})
    assert u * ux == DiffPoly({(0, 1): 1})
    # distributivity oracle: (u + ux)(u - ux) expanded term by term
    lhs = (u + ux) * (u - ux)
    rhs = u * u + u * ux.scale(-1) + ux * u + ux * ux.scale(-1)
    assert lhs == rhs
    assert lhs == DiffPoly({(0, 0): 1, (1, 1): -1})


def test_total_derivative_examples():
    assert total_derivative(u * u) == DiffPoly({(0, 1): 2})
    assert total_derivative(u * ux) == DiffPoly({(1, 1): 1, (0, 2): 1})
    assert total_derivative(DiffPoly.const(3)) == DiffPoly.zero()


def test_euler_examples():
    assert euler_operator(u * u * u) == DiffPoly({(0, 0): 3})
    assert euler_operator(total_derivative(u * uxx)) == DiffPoly.zero()
    # defining sum evaluated by hand: d/du_1 (u_x^2) = 2u_x, then -(d/dx)
    assert euler_operator(ux * ux) == DiffPoly({(2,): -2})


def test_integrate_examples():
    assert integrate_total_derivative(DiffPoly({(0, 1): 2})) == u * u
    # round trip against total_derivative
    assert integrate_total_derivative(DiffPoly({(1, 1): 1, (0, 2): 1})) == u * ux
    with pytest.raises(NotExact):
        integrate_total_derivative(u * u)


def test_integrate_rejects_constant_remainder():
    # Euler kills constants but a nonzero constant is not a derivative
    with pytest.raises(NotExact):
        integrate_total_derivative(DiffPoly.const(3) + total_derivative(u * uxx))


def test_lenard_operator_values():
    assert lenard_operator(DiffPoly.const(3)) == ux
    assert lenard_operator(DiffPoly.zero()) == DiffPoly.zero()
    # J(u) = u_xxx + u u_x with the multiplication reading of the first-order term
    assert lenard_operator(u) == uxxx + u * ux


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_euler_kills_derivatives_random(seed):
    rng = random.Random(seed)
    for _ in range(120):
        f = random_poly(rng)
        assert euler_operator(total_derivative(f)) == DiffPoly.zero()


def test_euler_kills_derivatives_bulk():
    rng = random.Random(20240817)
    for _ in range(1000):
        f = random_poly(rng, max_terms=4)
        assert euler_operator(total_derivative(f)) == DiffPoly.zero()


def test_integration_round_trip_bulk():
    rng = random.Random(514229)
    for _ in range(1000):
        f = random_poly(rng, max_terms=4)
        recovered = integrate_total_derivative(total_derivative(f))
        assert recovered == f - DiffPoly.const(f.constant_term())


def test_leibniz_random():
    rng = random.Random(7)
    for _ in range(200):
        a = random_poly(rng, max_terms=3)
        b = random_poly(rng, max_terms=3)
        lhs = total_derivative(a * b)
        rhs = total_derivative(a) * b + a * total_derivative(b)
        assert lhs == rhs


def test_euler_linear_random():
    rng = random.Random(11)
    for _ in range(200):
        a = random_poly(rng, max_terms=3)
        b = random_poly(rng, max_terms=3)
        lam = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        lhs = euler_operator(a + b.scale(lam))
        rhs = euler_operator(a) + euler_operator(b).scale(lam)
        assert lhs == rhs


def test_mul_associative_commutative_random():
    rng = random.Random(13)
    for _ in range(60):
        a = random_poly(rng, max_terms=3)
        b = random_poly(rng, max_terms=3)
        c = random_poly(rng, max_terms=3)
        assert a * b == b * a
        assert (a * b) * c == a * (b * c)
        assert (a + b) + c == a + (b + c)


def test_text_round_trip():
    p = DiffPoly({(0, 3): Fraction(-10), (1, 2): Fraction(-20), (0, 0, 1): 30, (): Fraction(1, 3)})
    text = p.to_text()
    assert DiffPoly.from_text(text) == p
    assert text.splitlines()[0] == "1/3 :"


def test_canonical_text_form():
    p = u * ux * Fraction(2, 3)
    assert p.to_text() == "2/3 : 0 1"
