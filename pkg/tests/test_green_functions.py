import numpy as np
import pytest

from FoldyLaxPy.FoldyLaxError import DomainError
from FoldyLaxPy.GreenFunctions import (ComplexK, GreenSign, dos_free, dos_free_continued, green_asym, green_free)

PLUS = GreenSign.PLUS
MINUS = GreenSign.MINUS


def test_green_reference_values():
    assert green_free(3, PLUS, 1, 1) == pytest.approx(-np.exp(1j) / (4 * np.pi), rel=1e-12)
    assert green_free(1, PLUS, 1, 0) == pytest.approx(-0.5j, abs=1e-15)
    assert green_free(2, PLUS, 1j, 1) == pytest.approx(-0.067008, abs=1e-6)


def test_green_accepts_sign_aliases_and_complex_k():
    assert green_free(3, '+', ComplexK(1.0), 2.0) == green_free(3, PLUS, 1, 2.0)
    assert green_free(3, '-', 1, 2.0) == green_free(3, MINUS, 1, 2.0)
    with pytest.raises(ValueError):
        green_free(3, 'x', 1, 1)


def test_green_array_distances():
    r = np.array([0.5, 1.0, 2.0])
    values = green_free(2, PLUS, 3.0, r)
    assert values.shape == (3,)
    for radius, value in zip(r, values):
        assert value == pytest.approx(green_free(2, PLUS, 3.0, radius), rel=1e-14)


@pytest.mark.parametrize("d, k, r", [(2, 1.0, 0.0), (3, 1.0, 0.0), (3, 0, 1.0), (5, 1.0, 1.0)])
def test_green_domain_errors(d, k, r):
    with pytest.raises(DomainError):
        green_free(d, PLUS, k, r)


@pytest.mark.parametrize("d", [1, 3])
def test_green_asym_exact_in_odd_dimensions(d):
    for k, r in [(1.0, 1.0), (2.5 - 0.3j, 4.0), (0.7 + 0.2j, 10.0)]:
        assert green_asym(d, PLUS, k, r) == pytest.approx(green_free(d, PLUS, k, r), rel=1e-12)
        assert green_asym(d, MINUS, k, r) == pytest.approx(green_free(d, MINUS, k, r), rel=1e-12)


def test_green_asym_two_dimensions():
    assert green_asym(2, PLUS, 10, 50) == pytest.approx(green_free(2, PLUS, 10, 50), rel=1e-2)


def test_green_asym_requires_far_field():
    with pytest.raises(DomainError):
        green_asym(2, PLUS, 1.0, 0.5)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_green_symmetries(d):
    rng = np.random.default_rng(11)
    for _ in range(50):
        k = complex(rng.choice([-1, 1]) * rng.uniform(0.1, 5), rng.uniform(-2, 2))
        r = rng.uniform(0.1, 5)
        for sign, other in ((PLUS, MINUS), (MINUS, PLUS)):
            value = green_free(d, sign, k, r)
            assert np.conj(green_free(d, sign, -np.conj(k), r)) == pytest.approx(value, rel=1e-10)
            assert green_free(d, sign, -k, r) == pytest.approx(green_free(d, other, k, r), rel=1e-10)


@pytest.mark.parametrize("d, r", [(1, 0.0), (2, 1e-6), (3, 1e-6)])
def test_green_imaginary_part_gives_density_of_states(d, r):
    k = 1.7
    assert green_free(d, PLUS, k, r).imag / -np.pi == pytest.approx(dos_free(d, k), rel=1e-8)


def test_green_decay_off_the_real_axis():
    k = 1 + 0.2j
    assert abs(green_free(3, PLUS, k, 20)) < abs(green_free(3, PLUS, k, 10))
    assert abs(green_free(3, MINUS, k, 20)) > abs(green_free(3, MINUS, k, 10))


@pytest.mark.parametrize("d, k, expected", [(2, 3.7, 1 / (4 * np.pi)), (3, 2, 0.050661), (1, 1, 0.159155)])
def test_dos_free(d, k, expected):
    assert dos_free(d, k) == pytest.approx(expected, rel=1e-5)


def test_dos_free_continued_matches_on_real_axis():
    for d in (1, 2, 3, 4):
        assert dos_free_continued(d, 2.3) == pytest.approx(dos_free(d, 2.3), rel=1e-14)
    assert dos_free_continued(3, 1j).imag == pytest.approx(1 / (4 * np.pi ** 2))
    with pytest.raises(DomainError):
        dos_free(3, 0)


def test_complex_k():
    k = ComplexK.from_complex(2 - 0.5j)
    assert k.value == 2 - 0.5j
    assert k.gamma == -1.0
    assert complex(k) == 2 - 0.5j
    with pytest.raises(ValueError):
        ComplexK(np.inf)
