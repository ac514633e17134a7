import math

import numpy as np
import pytest

from optosqueeze.errors import InvalidInput, NoInteriorMinimum, NotHurwitz
from optosqueeze.optimize import (
    FLOQUET,
    LINDBLAD,
    RWA,
    Backend,
    get_backend,
    golden_section,
    optimize_ratio,
    ratio_objective,
    scan_grid,
    sweep,
)


def test_golden_section_quadratic():
    x, fx, n = golden_section(lambda x: (x - 0.3) ** 2, 0.0, 1.0, 1e-8)
    assert x == pytest.approx(0.3, abs=1e-8)
    assert n < 60


def test_scan_grid():
    g = scan_grid((0.0, 0.999), 4)
    assert g[0] == 0.0 and g[-1] == pytest.approx(0.999)
    assert np.allclose(np.diff(np.log10(1 - g)), -1.0)
    assert np.allclose(scan_grid((0.1, 0.5), 5, "linear"), [0.1, 0.2, 0.3, 0.4, 0.5])
    with pytest.raises(InvalidInput):
        scan_grid((0.5, 1.0), 10)
    with pytest.raises(InvalidInput):
        scan_grid((0.1, 0.5), 10, "cubic")


def test_optimize_finds_narrow_minimum_near_one():
    target = 1 - 3e-5
    best = optimize_ratio(lambda x: abs(math.log((1 - x) / (1 - target))))
    assert best.ratio_opt == pytest.approx(target, abs=1e-6)


def test_optimize_against_dense_scan(ref_point):
    f = ratio_objective(RWA, 1e4, n_th=10)
    best = optimize_ratio(f)
    dense = np.linspace(0.95, 0.96, 20001)
    vals = [f(x) for x in dense]
    assert best.ratio_opt == pytest.approx(dense[int(np.argmin(vals))], abs=1e-6)
    assert best.var_opt <= min(vals) + 1e-12


def test_boundary_minimum_raises():
    with pytest.raises(NoInteriorMinimum) as err:
        optimize_ratio(lambda x: x)
    assert err.value.ratio == pytest.approx(1e-6)


def test_ties_prefer_smaller_ratio():
    f = lambda x: 0.0 if 0.2 < x < 0.8 else 1.0
    best = optimize_ratio(f, bounds=(0.0, 0.99), spacing="linear", grid_points=100)
    assert best.ratio_opt < 0.25


def test_failures_count_as_infinite():
    def f(x):
        if x > 0.5:
            raise NotHurwitz("unstable")
        return (x - 0.3) ** 2

    assert optimize_ratio(f, bounds=(0.0, 0.9), spacing="linear").ratio_opt == pytest.approx(0.3, abs=1e-6)

    def bad(x):
        raise NotHurwitz("always")

    with pytest.raises(NotHurwitz):
        optimize_ratio(bad)


def test_backends():
    assert get_backend("rwa") is RWA and get_backend(LINDBLAD) is LINDBLAD
    with pytest.raises(InvalidInput):
        get_backend("nope")
    custom = Backend("custom", lambda p: (p.ratio, 0.0, 0.0))
    assert custom.variance(type("P", (), {"ratio": 0.4})()) == 0.4


def test_sweep_records_and_order():
    recs = sweep("rwa", [1e2, 1e4, 1e6], n_th=0)
    assert [r.coop for r in recs] == [1e2, 1e4, 1e6]
    assert all(r.ok for r in recs)
    assert all(r.bad_cavity_ok is None for r in recs)
    assert recs[1].var_x1_opt == pytest.approx(recs[1].var_x1_analytic, rel=0.05)
    par = sweep("rwa", [1e2, 1e4, 1e6], n_th=0, jobs=2)
    assert [r.var_x1_opt for r in par] == [r.var_x1_opt for r in recs]


def test_sweep_reports_point_failures():
    failing = Backend("failing", lambda p: (_ for _ in ()).throw(NotHurwitz("boom")))
    recs = sweep(failing, [1e2, 1e3])
    assert not recs[0].ok and "NotHurwitz" in recs[0].status
    assert math.isnan(recs[0].var_x1_opt)


def test_sweep_rejects_unsorted_grid():
    with pytest.raises(InvalidInput):
        sweep("rwa", [1e4, 1e2])


def test_floquet_sweep_flags_validity():
    recs = sweep(FLOQUET, [1e2], n_th=0, omega_m=50.0, grid_points=30)
    assert recs[0].ok and recs[0].bad_cavity_ok is True
    assert recs[0].var_x1_opt == pytest.approx(recs[0].var_x1_analytic, rel=0.05)
