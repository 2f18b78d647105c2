import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pesinlab import livshitz as lv
from pesinlab import shadowing as sh
from pesinlab.errors import InsufficientData, NoPairs
TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def observables(cat):
    return lv.builtin_observables(cat)


def test_builtin_holder_moduli_hold(cat, observables):
    for name, phi in observables.items():
        if phi.holder is None:
            continue
        assert lv.validate_holder(cat, phi, pairs=10_000, seed=3) <= 1.0


def test_periodic_sum_coboundary_vanishes(cat, observables):
    p = sh.close_orbit(cat, np.array([0.6001, 0.2001]), 2)  # lands on (3/5, 1/5)
    for g in lv.generator_library():
        cb = lv.coboundary_observable(cat, g)
        assert abs(lv.periodic_sum(cat, cb, p)) < 1e-12


def test_periodic_sum_constant(cat):
    phi = lv.Observable("const", lambda x: np.full(x.shape[:-1], 0.7))
    p = sh.close_orbit(cat, np.array([0.6001, 0.2001]), 2)
    assert abs(lv.periodic_sum(cat, phi, p) - 1.4) < 1e-12


def test_periodic_sums_of_sin_on_rational_cycles(cat, observables):
    # Both period-2 cycles are symmetric under x -> -x, so the sums of the
    # odd observable vanish exactly; the first nonzero obstruction appears on
    # the period-3 cycle {(1/2,1/4), (1/4,3/4), (1/4,0)} where the sum is
    # sin(pi) + sin(pi/2) + sin(pi/2) = 2.
    phi = observables["sin_x1"]
    p2 = sh.close_orbit(cat, np.array([0.6001, 0.2001]), 2)
    assert abs(lv.periodic_sum(cat, phi, p2)) < 1e-12
    p3 = sh.close_orbit(cat, np.array([0.5001, 0.2499]), 3)
    assert abs(lv.periodic_sum(cat, phi, p3) - 2.0) < 1e-10


def test_obstruction_scan_orbit_structure(cat, observables):
    scan = lv.obstruction_scan(cat, observables["sin_x1"], 4)
    assert scan.complete
    by_period = {}
    for p, _ in scan.items:
        by_period[p.period] = by_period.get(p.period, 0) + 1
    # orbits of exact period n: (count of n-periodic points minus shorter) / n
    assert by_period == {1: 1, 2: 2, 3: 5, 4: 10}
    nonzero = sorted(p.period for p, s in scan.items if abs(s) > 1e-9 * p.period)
    assert nonzero and nonzero[0] == 3


def test_obstruction_scan_max_period_one(cat, observables):
    scan = lv.obstruction_scan(cat, observables["sin_x1"], 1)
    assert len(scan.items) == 1
    p, s = scan.items[0]
    assert np.allclose(p.z, 0.0)
    assert s == 0.0  # phi(0, 0) = sin 0


def test_reconstruct_transfer_zero_observable(cat):
    phi = lv.Observable("zero", lambda x: np.zeros(x.shape[:-1]))
    table = lv.reconstruct_transfer(cat, phi, np.array([0.3, 0.8]), 500)
    assert np.all(table.psi == 0.0)


def test_transfer_telescoping_identity(cat, observables):
    g = lv.generator_library()[0]
    cb = lv.coboundary_observable(cat, g)
    x0 = np.array([0.1234, 0.8571])
    table = lv.reconstruct_transfer(cat, cb, x0, 10_000)
    expected = g(table.points) - g(table.points[0])
    assert float(np.max(np.abs(table.psi - expected))) < 1e-11


@given(
    n=st.integers(1, 400),
    m=st.integers(1, 100),
)
@settings(max_examples=30, deadline=None)
def test_transfer_partial_sums_property(n, m):
    from pesinlab.systems import CatMap

    cat = CatMap()
    phi = lv.builtin_observables(cat)["sin_x1"]
    table = lv.reconstruct_transfer(cat, phi, np.array([0.37, 0.21]), n + m)
    block = float(np.sum(phi(table.points[n : n + m])))
    assert abs((table.psi[n + m] - table.psi[n]) - block) < 1e-12


def test_transfer_mean_drift(cat):
    # Zero-mean observable: psi(n)/n tends to 0; constant c gives slope c.
    phi = lv.builtin_observables(cat)["x1_centered"]
    table = lv.reconstruct_transfer(cat, phi, np.array([0.123, 0.456]), 100_000)
    assert abs(table.psi[-1] / len(table)) < 1e-2
    const = lv.Observable("c", lambda x: np.full(x.shape[:-1], 0.3))
    t2 = lv.reconstruct_transfer(cat, const, np.array([0.1, 0.2]), 1000)
    assert abs(t2.psi[-1] / 1000 - 0.3) < 1e-12


def test_coboundary_residual_bounded(cat):
    g = lv.generator_library()[0]
    cb = lv.coboundary_observable(cat, g)
    table = lv.reconstruct_transfer(cat, cb, np.array([0.1234, 0.8571]), 100_000)
    res = lv.coboundary_residual(cat, cb, table, 1e-3)
    assert res <= TWO_PI * 1e-3


def test_coboundary_residual_zero_for_zero(cat):
    phi = lv.Observable("zero", lambda x: np.zeros(x.shape[:-1]))
    table = lv.reconstruct_transfer(cat, phi, np.array([0.5, 0.77]), 50_000)
    assert lv.coboundary_residual(cat, phi, table, 1e-3) == 0.0


def test_non_coboundary_floor(cat, observables):
    # Build-time baseline: the near-return spread of the sin observable stays
    # near 260 at these radii; it must not collapse as the radius halves.
    phi = observables["sin_x1"]
    table = lv.reconstruct_transfer(cat, phi, np.array([0.1234, 0.8571]), 100_000)
    floors = [
        lv.coboundary_residual(cat, phi, table, r) for r in (1e-3, 5e-4, 2.5e-4)
    ]
    assert all(f > 100.0 for f in floors)


def test_no_pairs_raised(cat, observables):
    table = lv.reconstruct_transfer(cat, observables["sin_x1"], np.array([0.3, 0.9]), 50)
    with pytest.raises(NoPairs):
        lv.coboundary_residual(cat, observables["sin_x1"], table, 1e-8)


def test_holder_estimate_lipschitz_coboundary(cat):
    g = lv.generator_library()[0]
    cb = lv.coboundary_observable(cat, g)
    table = lv.reconstruct_transfer(cat, cb, np.array([0.1234, 0.8571]), 100_000)
    fit = lv.holder_estimate(table, [1e-3, 7e-4, 5e-4, 3.5e-4, 2.5e-4])
    assert not fit.degenerate
    assert abs(fit.exponent - 1.0) < 0.15
    assert fit.r2 > 0.9


def test_holder_estimate_exact_power_law(cat):
    # Synthetic table: isolated pairs at controlled separations whose psi
    # gaps follow r^0.5 exactly; the log-log fit must recover it to 1e-10.
    radii = [1e-3, 5e-4, 2.5e-4, 1.25e-4]
    pts = []
    psi = []
    for i, r in enumerate(radii):
        anchor = np.array([0.1 + 0.2 * i, 0.1 + 0.15 * i])
        pts.extend([anchor, anchor + np.array([0.999 * r, 0.0])])
        psi.extend([0.0, (0.999 * r) ** 0.5])
    table = lv.TransferTable(
        system=cat,
        observable=lv.Observable("synthetic", lambda x: np.zeros(x.shape[:-1])),
        base=pts[0],
        points=np.asarray(pts),
        psi=np.asarray(psi),
    )
    fit = lv.holder_estimate(table, radii)
    assert abs(fit.exponent - 0.5) < 1e-10
    assert abs(fit.r2 - 1.0) < 1e-10


def test_holder_estimate_degenerate(cat):
    phi = lv.Observable("zero", lambda x: np.zeros(x.shape[:-1]))
    table = lv.reconstruct_transfer(cat, phi, np.array([0.21, 0.83]), 20_000)
    fit = lv.holder_estimate(table, [1e-3, 5e-4, 2.5e-4])
    assert fit.degenerate


def test_holder_estimate_insufficient(cat, observables):
    table = lv.reconstruct_transfer(cat, observables["sin_x1"], np.array([0.3, 0.9]), 100)
    with pytest.raises(InsufficientData):
        lv.holder_estimate(table, [1e-6, 5e-7, 2.5e-7])


def test_residual_doubling_bound(cat):
    # Near-return residual of a Lipschitz coboundary is O(radius): doubling
    # the radius grows it by at most 2^kappa * 1.5.
    g = lv.generator_library()[0]
    cb = lv.coboundary_observable(cat, g)
    table = lv.reconstruct_transfer(cat, cb, np.array([0.31, 0.66]), 100_000)
    radii = [2.5e-4, 5e-4, 1e-3]
    values = [lv.coboundary_residual(cat, cb, table, r) for r in radii]
    for small, big in zip(values, values[1:]):
        assert big <= small * 2.0 * 1.5


def test_transfer_csv_export(cat, observables, tmp_path):
    table = lv.reconstruct_transfer(cat, observables["sin_x1"], np.array([0.4, 0.6]), 50)
    path = tmp_path / "transfer.csv"
    lv.write_transfer_csv(table, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "n,x1,x2,psi"
    assert len(lines) == 52  # header + N + 1 samples
