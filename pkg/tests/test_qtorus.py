import random
from fractions import Fraction

import pytest

from flatcat.qseries import LaurentQ, RationalQ, dilog_E, dilog_E_scaled
from flatcat.qtorus import (
    ChargeLattice,
    DTSpectrum,
    NonAdmissibleError,
    QTorusError,
    QTorusSeries,
    dilog_factor,
    dt_factorize,
    pentagon_check,
    spectrum_product,
    wallcross_check,
)


def t(n, c=1):
    return LaurentQ.monomial(n, c)


def test_lattice_validation():
    with pytest.raises(QTorusError):
        ChargeLattice([[0, 1], [1, 0]])
    lat = ChargeLattice([[0, 2], [-2, 0]])
    assert lat.pair((1, 0), (0, 1)) == 2
    assert lat.pair((0, 1), (1, 0)) == -2


def test_monomial_product_rule():
    lat = ChargeLattice([[0, 1], [-1, 0]])
    w = (1, 1)
    x1 = QTorusSeries.monomial(lat, w, 6, (1, 0))
    x2 = QTorusSeries.monomial(lat, w, 6, (0, 1))
    p12 = x1 * x2
    p21 = x2 * x1
    assert p12.coeff((1, 1)) == RationalQ(t(1))     # q^{1/2} x_{e1+e2}
    assert p21.coeff((1, 1)) == RationalQ(t(-1))    # q^{-1/2} x_{e1+e2}


def test_commuting_case():
    lat = ChargeLattice([[0, 0], [0, 0]])
    w = (1, 1)
    x1 = QTorusSeries.monomial(lat, w, 4, (1, 0))
    x2 = QTorusSeries.monomial(lat, w, 4, (0, 1))
    assert x1 * x2 == x2 * x1
    assert (x1 * x2).coeff((1, 1)) == RationalQ.one()


def test_mismatched_lattice_rejected():
    a = QTorusSeries.one(ChargeLattice([[0]]), (1,), 3)
    b = QTorusSeries.one(ChargeLattice([[0, 1], [-1, 0]]), (1, 1), 3)
    with pytest.raises(QTorusError):
        a * b


def test_associativity_random_triples():
    rng = random.Random(7)
    lat = ChargeLattice([[0, 1, -1], [-1, 0, 2], [1, -2, 0]])
    w = (1, 1, 1)
    cap = 4

    def rand_series():
        coeffs = {}
        for _ in range(4):
            g = tuple(rng.randint(0, 2) for _ in range(3))
            coeffs[g] = RationalQ(t(rng.randint(-2, 2),
                                    Fraction(rng.randint(-3, 3))))
        return QTorusSeries(lat, w, cap, coeffs)

    for _ in range(8):
        a, b, c = rand_series(), rand_series(), rand_series()
        assert (a * b) * c == a * (b * c)


def test_inverse_roundtrip():
    lat = ChargeLattice([[0, 1], [-1, 0]])
    w = (1, 1)
    s = dilog_factor(lat, w, 6, (1, 0)) * dilog_factor(lat, w, 6, (0, 1), k=1)
    assert s * s.inverse() == QTorusSeries.one(lat, w, 6)


def test_pentagon():
    assert pentagon_check(6)


def test_pentagon_wallcross_form():
    lat = ChargeLattice([[0, 1], [-1, 0]])
    one = LaurentQ.one()
    side_a = [((1, 0), one), ((0, 1), one)]
    side_b = [((0, 1), one), ((1, 1), one), ((1, 0), one)]
    assert wallcross_check(lat, side_a, side_b, 6)


def test_wallcross_identical_sides():
    lat = ChargeLattice([[0, 3], [-3, 0]])
    side = [((1, 0), LaurentQ.scalar(2)), ((0, 1), t(1) + t(-1))]
    assert wallcross_check(lat, side, list(side), 5)


def test_wallcross_wrong_order_fails():
    lat = ChargeLattice([[0, 1], [-1, 0]])
    one = LaurentQ.one()
    side_a = [((1, 0), one), ((0, 1), one)]
    side_b = [((0, 1), one), ((1, 0), one)]
    assert not wallcross_check(lat, side_a, side_b, 6)


# -- dt_factorize -----------------------------------------------------------


def test_factorize_single_dilog():
    spec = dt_factorize(dilog_E(6))
    assert spec.omega((1,)) == LaurentQ.one()
    assert spec.classes() == [(1,)]


def test_factorize_inverse_twisted_dilog():
    series = dilog_E_scaled(6, t(1, -1)).inverse()  # E(-q^{1/2} x)^{-1}
    spec = dt_factorize(series)
    assert spec.omega((1,)) == t(1)  # q^{1/2}
    assert spec.classes() == [(1,)]


def test_factorize_w33_series():
    series = (dilog_E(6) ** 4) * dilog_E_scaled(6, t(1, -1), 2).inverse()
    spec = dt_factorize(series)
    assert spec.omega((1,)) == LaurentQ.scalar(4)
    assert spec.omega((2,)) == t(1)
    assert spec.classes() == [(1,), (2,)]


def test_factorize_roundtrip_random_spectra():
    rng = random.Random(11)
    lat = ChargeLattice([[0]])
    for _ in range(6):
        omegas = {}
        for n in range(1, 5):
            om = LaurentQ({k: Fraction(rng.randint(-5, 5))
                           for k in range(-2, 3)})
            if not om.is_zero():
                omegas[(n,)] = om
        target = DTSpectrum(omegas)
        prod = spectrum_product(lat, (1,), 6,
                                [((n,), target.omega((n,)))
                                 for n in range(1, 5)])
        from flatcat.qseries import TruncSeries
        series = TruncSeries(1, (6,),
                             {(n,): prod.coeff((n,)) for n in range(7)})
        spec = dt_factorize(series)
        for n in range(1, 5):
            assert spec.omega((n,)) == target.omega((n,)), n


def test_factorize_rejects_non_admissible():
    from flatcat.qseries import TruncSeries

    # x coefficient 1/(1-q^2) gives Omega = -q^{-1/2}/(1+q): not Laurent.
    series = TruncSeries(1, (4,), {
        (0,): RationalQ.one(),
        (1,): RationalQ(LaurentQ.one(), {2: 1}),
    })
    with pytest.raises(NonAdmissibleError):
        dt_factorize(series)

    # half-integer Omega is rejected too
    series2 = TruncSeries(1, (4,), {
        (0,): RationalQ.one(),
        (1,): RationalQ(t(1, Fraction(-1, 2)), {1: 1}),
    })
    with pytest.raises(NonAdmissibleError):
        dt_factorize(series2)
