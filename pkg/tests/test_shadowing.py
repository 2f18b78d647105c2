import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import LOG_LAM
from oracles import dense_periodic_affine_solve
from pesinlab import shadowing as sh
from pesinlab.errors import (
    IllConditioned,
    InsufficientData,
    NoRecurrence,
    PoolExhausted,
)
from pesinlab.systems import StandardMap, orbit_points


def test_pseudo_orbit_offsets_and_jumps(cat):
    x0 = np.array([0.12, 0.55])
    mid = orbit_points(cat, x0, 6)[-1]
    po = sh.pseudo_orbit(cat, [(x0, 6), (mid, 4)])
    assert po.offsets() == [0, 6]
    assert po.total_length() == 10
    assert np.allclose(po.jump_sizes, 0.0)
    assert not po.periodic and po.period is None


def test_pseudo_orbit_rejects_oversize_jump(cat):
    x0 = np.array([0.12, 0.55])
    far = cat.wrap(orbit_points(cat, x0, 6)[-1] + 0.1)
    with pytest.raises(ValueError):
        sh.pseudo_orbit(cat, [(x0, 6), (far, 4)], delta=1e-3)


def test_builder_exact_orbit_zero_jumps(cat):
    po = sh.build_recurrent_pseudo_orbit(
        cat, np.array([0.123, 0.321]), lambda p: True, delta=1e-8,
        min_segment_length=5, max_segments=4,
    )
    assert len(po.segments) == 4
    assert all(n >= 5 for _, n in po.segments)
    assert np.allclose(po.jump_sizes, 0.0)


def test_builder_periodic_closure(cat):
    po = sh.build_recurrent_pseudo_orbit(
        cat, np.array([0.31, 0.77]), lambda p: True, delta=5e-3,
        min_segment_length=10, max_segments=3, periodic=True,
    )
    assert po.periodic and po.period == 3
    assert float(po.jump_sizes[-1]) < 5e-3


def test_builder_pool_jumps(perturbed_cat):
    rng = np.random.default_rng(11)
    pool = rng.random((10_000, 2))
    po = sh.build_recurrent_pseudo_orbit(
        perturbed_cat, np.array([0.31, 0.77]), lambda p: True, delta=1e-3,
        min_segment_length=20, max_segments=8, pool=pool,
    )
    assert len(po.segments) == 8
    assert float(po.jump_sizes.max()) < 1e-3
    assert all(n >= 20 for _, n in po.segments)


def test_builder_failures(cat):
    x0 = np.array([0.377, 0.613])
    with pytest.raises(NoRecurrence):
        sh.build_recurrent_pseudo_orbit(
            cat, x0, lambda p: bool(cat.distance(p, x0) < 1e-15), delta=1e-3,
            min_segment_length=2, max_segments=2, budget=2000,
        )
    # A pool far from every orbit point exhausts without a delta-match.
    pool = np.full((4, 2), 0.0)
    with pytest.raises(PoolExhausted):
        sh.build_recurrent_pseudo_orbit(
            cat, np.array([0.377, 0.613]), lambda p: True, delta=1e-9,
            min_segment_length=2, max_segments=2, pool=pool, budget=2000,
        )


def test_newton_shadow_exact_orbit_zero_iterations(cat):
    po = sh.build_recurrent_pseudo_orbit(
        cat, np.array([0.123, 0.321]), lambda p: True, delta=1e-8,
        min_segment_length=5, max_segments=3,
    )
    res = sh.newton_shadow(cat, po, tol=1e-12)
    assert res.converged
    assert res.newton_iterations == 0
    assert res.max_deviation == 0.0


def _single_jump(system, delta, piece=10, pieces=4, x0=None):
    if x0 is None:
        x0 = np.array([0.2718, 0.5772])
    return sh.single_jump_pseudo_orbit(system, x0, piece, pieces, delta)


def test_single_jump_family_matches_dense_oracle(cat):
    for delta in (1e-3, 1e-4, 1e-5, 1e-6):
        po = _single_jump(cat, delta)
        assert abs(float(po.jump_sizes.max()) - delta) < 1e-8 * delta + 1e-14
        assert float(np.sort(po.jump_sizes)[-2]) < 1e-3 * delta + 1e-12
        res = sh.newton_shadow(cat, po, tol=1e-12)
        assert res.newton_iterations == 1
        oracle = dense_periodic_affine_solve(cat.matrix, po.seed_points())
        produced = np.concatenate([d[:-1] for d in res.deviations])
        assert float(np.max(np.abs(produced - oracle))) < 1e-10


def test_newton_one_iteration_on_any_cat_pseudo_orbit(cat):
    rng = np.random.default_rng(4)
    pool = rng.random((5000, 2))
    po = sh.build_recurrent_pseudo_orbit(
        cat, rng.random(2), lambda p: True, delta=5e-3,
        min_segment_length=8, max_segments=6, pool=pool,
    )
    assert float(po.jump_sizes.max()) > 0.0
    res = sh.newton_shadow(cat, po, tol=1e-12)
    assert res.newton_iterations == 1
    # Refined orbit is a true orbit, verifiable without the solver.
    pts = res.orbit
    gaps = cat.distance(cat.forward(pts[:-1]), pts[1:])
    assert float(np.max(gaps)) < 1e-12


def test_newton_fixed_point_property(perturbed_cat):
    po = _single_jump(perturbed_cat, 1e-4)
    res = sh.newton_shadow(perturbed_cat, po, tol=1e-12)
    assert res.converged
    rerun = sh.pseudo_orbit(
        perturbed_cat,
        [(res.orbit[k * 10], 10) for k in range(4)],
        periodic=True,
    )
    res2 = sh.newton_shadow(perturbed_cat, rerun, tol=1e-12)
    moved = perturbed_cat.distance(res2.orbit, res.orbit)
    assert float(np.max(moved)) < 1e-12


def test_newton_ill_conditioned_on_parabolic_window(standard_zero):
    # Non-closing window of the shear: the periodic orbit system is exactly
    # singular (no hyperbolicity to close the free window).
    po = sh.pseudo_orbit(standard_zero, [(np.array([0.3, 0.437]), 24)], periodic=True)
    with pytest.raises(IllConditioned):
        sh.newton_shadow(standard_zero, po, tol=1e-12)


def test_verify_exponential_shadowing_trivial_cases(cat):
    po = _single_jump(cat, 1e-4)
    res = sh.newton_shadow(cat, po, tol=1e-12)
    # theta = 0 reduces to plain eta-shadowing
    ver = sh.verify_exponential_shadowing(cat, res, eta=2e-4, theta=0.0)
    assert ver.passed
    ver_tight = sh.verify_exponential_shadowing(cat, res, eta=res.max_deviation / 2, theta=0.0)
    assert not ver_tight.passed
    zero = sh.newton_shadow(
        cat,
        sh.build_recurrent_pseudo_orbit(
            cat, np.array([0.9, 0.2]), lambda p: True, delta=1e-8,
            min_segment_length=5, max_segments=2,
        ),
        tol=1e-12,
    )
    assert sh.verify_exponential_shadowing(cat, zero, eta=1e-15, theta=5.0).passed


def test_close_orbit_near_fixed_point(cat):
    p = sh.close_orbit(cat, np.array([1e-5, 1e-5]), 3)
    assert cat.distance(p.z, np.zeros(2)) < 1e-12
    assert np.allclose(p.floquet_log_moduli, [-3 * LOG_LAM, 3 * LOG_LAM], atol=1e-10)
    assert p.hyperbolic
    assert p.residual < 1e-12


def test_close_orbit_already_periodic(cat):
    z = np.array([0.6, 0.2])  # exact rational period-2 point (3/5, 1/5)
    p = sh.close_orbit(cat, z, 2)
    assert cat.distance(p.z, z) < 1e-12
    assert float(np.max(p.closing_deviations)) < 1e-12


def test_close_orbit_nonhyperbolic_flag():
    system = StandardMap(k=1.0)
    p = sh.close_orbit(system, np.array([0.5, 0.0]) + 1e-7, 2)
    assert not p.hyperbolic
    assert p.hyperbolicity_margin <= 1e-6


def test_periodic_point_at_validates(cat):
    with pytest.raises(ValueError):
        sh.periodic_point_at(cat, np.array([0.3, 0.3]), 1)
    p = sh.periodic_point_at(cat, np.zeros(2), 1)
    assert np.allclose(p.floquet_log_moduli, [-LOG_LAM, LOG_LAM], atol=1e-12)


def test_census_period_two(cat):
    pts = sh.periodic_census(cat, 2, grid_side=9)
    assert len(pts) == 5
    lattice = {(0, 0), (1, 2), (2, 4), (3, 1), (4, 3)}
    found = {tuple(int(round(c * 5)) % 5 for c in p.z) for p in pts}
    assert found == lattice


def test_close_orbit_rejects_period_one(cat):
    with pytest.raises(ValueError):
        sh.close_orbit(cat, np.zeros(2), 1)


def test_find_recurrences(perturbed_cat):
    events = sh.find_recurrences(
        perturbed_cat, np.array([0.37, 0.12]), 20, 120, beta=5e-3, max_events=10
    )
    assert len(events) == 10
    for pt, n in events:
        assert 20 <= n <= 120
        assert float(perturbed_cat.distance(pt, orbit_points(perturbed_cat, pt, n)[-1])) < 5e-3


@given(
    theta=st.floats(0.05, 2.0),
    eta=st.floats(1e-6, 10.0),
)
@settings(max_examples=50, deadline=None)
def test_fit_rates_recovers_exact_law(theta, eta):
    seps = np.arange(0, 12)
    devs = eta * np.exp(-theta * seps)
    fit = sh.fit_rates(list(zip(seps, devs)))
    assert abs(fit.theta - theta) < 1e-10
    assert abs(fit.eta - eta) < 1e-9 * eta
    assert fit.r2 > 1.0 - 1e-12


def test_fit_rates_flat_law_and_floor():
    fit = sh.fit_rates([(s, 0.25) for s in range(8)])
    assert abs(fit.theta) < 1e-6
    with pytest.raises(InsufficientData):
        sh.fit_rates([(s, 1e-16) for s in range(8)])
    with pytest.raises(InsufficientData):
        sh.fit_rates([(0, 1.0), (1, 0.5)])


def test_fit_lipschitz_proportional_law():
    deltas = [1e-3, 1e-4, 1e-5, 1e-6]
    fit = sh.fit_lipschitz([(d, 1.6 * d) for d in deltas])
    assert abs(fit.constant - 1.6) < 1e-12
    assert fit.r2 > 0.999999
    with pytest.raises(InsufficientData):
        sh.fit_lipschitz([(1e-3, 1.0)])
