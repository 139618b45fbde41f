import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmodes import analytic, laplace
from tmodes.ensemble import SimParams
from tmodes.errors import DomainError
from tmodes.laplace import LaplaceParams, f_hat, invert_numeric


def params(g0=1.0, tau0=1.0, na0=0.0, n=2.0):
    return LaplaceParams(g0, tau0, na0, n)


def test_initial_value_theorem():
    p = params(na0=0.7, n=2.0)
    assert 1e8 * f_hat(1e8, p) == pytest.approx(0.7, rel=1e-6)


def test_residue_at_hopping_pole():
    # with na0 = 0 the residue at 1/tau0 is N/2 because b^2 + Omega^2 = 4 g0^2
    p = params(g0=1.3, tau0=0.7, n=3.0)
    s0, eps = 1 / 0.7, 1e-7
    num = eps * f_hat(s0 + eps, p)
    assert num == pytest.approx(1.5, rel=1e-6)
    pole, res = laplace.residues(p)[0]
    assert pole == pytest.approx(s0) and res.real == pytest.approx(1.5, rel=1e-12)


def test_pole_hit_raises():
    p = params()
    for s in p.poles():
        with pytest.raises(DomainError):
            f_hat(s, p)


def test_partial_fractions_reconstruct():
    rng = np.random.default_rng(3)
    for _ in range(100):
        p = params(*rng.uniform(0.2, 3.0, 2), rng.uniform(0, 2), rng.uniform(2, 5))
        if abs(p.g0 * p.tau0 - 0.25) < 1e-3:
            continue
        s = complex(rng.uniform(3, 10), rng.uniform(-5, 5))
        recon = sum(r / (s - z) for z, r in laplace.residues(p))
        assert abs(recon - f_hat(s, p)) <= 1e-12 * abs(f_hat(s, p))


def test_kernel_transforms_values():
    g, h, j = laplace.kernel_transforms(2.0, 1.0, 1.0)
    assert g == pytest.approx(2 / 8) and h == pytest.approx(1.0) and j == pytest.approx(2 / 16)
    # at s = 1 with tau0 = 1 the h transform is singular; move tau0 away
    g, _, j = laplace.kernel_transforms(1.0, 1.0, 10.0)
    assert g == pytest.approx(0.2) and j == pytest.approx(0.4)
    with pytest.raises(DomainError):
        laplace.kernel_transforms(0.5, 1.0, 1.0)


@settings(max_examples=100)
@given(st.floats(0.1, 3.0), st.floats(0.1, 5.0), st.floats(0.0, 3.0), st.floats(0.1, 5.0),
       st.floats(0.05, 10.0), st.floats(-5.0, 5.0))
def test_convolution_form_matches_rational_form(g0, tau0, na0, n, dre, im):
    p = LaplaceParams(g0, tau0, na0, n)
    s = complex(1 / tau0 + dre, im)
    a, b = laplace.f_hat_from_kernels(s, p), f_hat(s, p)
    assert abs(a - b) <= 1e-12 * max(abs(b), 1e-12)


@pytest.mark.parametrize("order", [16, 32])
def test_textbook_pairs(order):
    assert abs(invert_numeric(lambda s: 1 / (s + 1), 1.0, order) - math.exp(-1)) <= 1e-8
    assert abs(invert_numeric(lambda s: 1 / s**2, 3.0, order) - 3.0) <= 1e-8


def test_stehfest_available_but_weaker():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", laplace.InversionWarning)
        v = invert_numeric(lambda s: 1 / (s + 1), 1.0, 16, method="stehfest")
    assert abs(v - math.exp(-1)) <= 1e-6


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_closed_form_oracle(t):
    p = SimParams(g0=1.0, tau0=1.0, na0=0.0, nb0=2.0)
    f = invert_numeric(lambda s: f_hat(s, LaplaceParams.from_sim(p)), t)
    assert abs(laplace.unwrap_na(f, t, 1.0) - analytic.mean_na(t, p)) <= 1e-6


def test_locked_fixture():
    p = SimParams(g0=1.0, tau0=1.0, na0=0.0, nb0=2.0)
    assert laplace.mean_na_numeric(1.0, p) == pytest.approx(1.0706445509, abs=1e-10)


@pytest.mark.parametrize("x, na0", [(3.0, 0.4), (0.1, 1.0), (0.3, 0.0)])
def test_residues_reproduce_closed_form(x, na0):
    p = LaplaceParams(1.0, x, na0, 2.0)
    for t in (0.3, 1.7, 6.0):
        na = laplace.unwrap_na(laplace.invert_by_residues(p, t), t, x)
        assert na == pytest.approx(analytic.occupation(t, 1.0, x, na0, 2.0 - na0), abs=1e-12)


def test_residues_reject_double_pole():
    with pytest.raises(DomainError):
        laplace.residues(params(g0=1.0, tau0=0.25))


@pytest.mark.parametrize("t", [0.5, 2.0, 5.0, 10.0])
def test_kernel_inversions(t):
    g0, tau0 = 1.0, 2.0

    def only(k):
        return lambda s: laplace.kernel_transforms(s, g0, tau0, continued=True)[k]

    assert invert_numeric(only(0), t, 48) == pytest.approx(math.cos(2 * g0 * t), abs=1e-7)
    assert invert_numeric(only(1), t, 48) == pytest.approx(math.exp(t / tau0), abs=1e-7)
    assert invert_numeric(only(2), t, 48) == pytest.approx(math.sin(g0 * t) ** 2, abs=1e-7)


def test_unwrap():
    assert laplace.unwrap_na(3.2, 0.0, 1.0) == 3.2
    assert laplace.unwrap_na(3.2, 5.0, 1e15) == pytest.approx(3.2, rel=1e-14)
    with pytest.raises(DomainError):
        laplace.unwrap_na(1.0, -1.0, 1.0)


def test_order_validation():
    for order in (6, 15):
        with pytest.raises(DomainError):
            invert_numeric(lambda s: 1 / s, 1.0, order)
    with pytest.raises(DomainError):
        invert_numeric(lambda s: 1 / s, 0.0)
    with pytest.raises(DomainError):
        invert_numeric(lambda s: 1 / s, 1.0, method="talbot")


def test_non_convergence_flagged():
    with pytest.warns(laplace.InversionWarning):
        _, info = invert_numeric(lambda s: s / (s * s + 4), 5.0, 16, full_output=True)
    assert not info["converged"]
    assert info["difference"] > 1e-3


def test_far_outside_window_fails_silently():
    # known limitation: at g0 t = 300 consecutive orders agree on 0 while
    # cos(600) is about -1, so the order check cannot flag it
    with warnings.catch_warnings():
        warnings.simplefilter("error", laplace.InversionWarning)
        v = invert_numeric(lambda s: s / (s * s + 400), 30.0, 16)
    assert abs(v) < 1e-12 and abs(v - math.cos(600)) > 0.9


def test_convergence_table_plateaus():
    rows = laplace.convergence_table(lambda s: 1 / (s + 1), 1.0, [8, 16, 24, 32, 40])
    diffs = [r[2] for r in rows[1:]]
    assert diffs[0] > diffs[-1]
    assert abs(rows[-1][1] - math.exp(-1)) <= 1e-14


def test_mpmath_transform_accepted():
    v = invert_numeric(lambda s: 1 / (s + mpmath.mpf(2)), 0.5)
    assert v == pytest.approx(math.exp(-1), abs=1e-12)


@pytest.mark.parametrize("x", [100.0, 1.0, 0.3])
def test_certified_window(x):
    p = SimParams(g0=1.0, tau0=x, na0=0.5, nb0=1.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error", laplace.InversionWarning)
        for t in (3.0, 9.0, 14.0, 20.0):
            assert abs(laplace.mean_na_numeric(t, p) - analytic.mean_na(t, p)) <= 1e-6
