import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from optosqueeze.errors import NonFinite, NotHurwitz
from optosqueeze.floquet import (
    build_time_dependent_drift,
    drift_harmonics,
    drive_period,
    floquet_variance,
    mode_drift_components,
    periodic_steady_state,
)
from optosqueeze.model import INFINITE, SystemParams, params_from_cooperativity
from optosqueeze.rwa import build_rwa_drift_diffusion, diffusion_matrix, steady_state


def brute_force_average(p, periods=120, samples=256):
    """Integrate the covariance ODE with DOP853 from the vacuum and average the last period."""
    h = drift_harmonics(p)
    D = diffusion_matrix(p)

    def f(t, y):
        V = y.reshape(4, 4)
        A = h.at(t)
        return (A @ V + V @ A.T + D).ravel()

    T = drive_period(p)
    sol = solve_ivp(f, (0, periods * T), (np.eye(4) / 2).ravel(), method="DOP853",
                    rtol=1e-11, atol=1e-13, dense_output=True)
    ts = (periods - 1) * T + np.arange(samples) * T / samples
    return float(np.mean([2 * sol.sol(t)[0] for t in ts]))


@pytest.mark.parametrize("third_tone", [False, True])
def test_matches_brute_force_integration(third_tone):
    p = params_from_cooperativity(20.0, 0.6, kappa=1.0, gamma_m=0.05, n_th=1.0, omega_m=2.0,
                                  third_tone=third_tone)
    assert periodic_steady_state(p).var_x1_avg == pytest.approx(brute_force_average(p), rel=1e-7)


def test_iterate_and_direct_agree():
    p = params_from_cooperativity(20.0, 0.6, kappa=1.0, gamma_m=0.05, n_th=1.0, omega_m=2.0)
    direct = periodic_steady_state(p)
    it = periodic_steady_state(p, method="iterate", v0=np.eye(4) / 2, tolerance=1e-11)
    assert it.var_x1_avg == pytest.approx(direct.var_x1_avg, rel=1e-8)
    assert it.periods_to_converge > direct.periods_to_converge
    assert direct.converged and direct.spectral_radius < 1


def test_static_part_is_rwa_drift(ref_point):
    p = SystemParams(**{**ref_point.__dict__, "omega_m": 30.0, "g_three": ref_point.g_plus})
    h = drift_harmonics(p)
    assert np.allclose(h.static, build_rwa_drift_diffusion(p).A, atol=1e-14)
    assert sorted(h.cos) == [2, 4]


def test_drift_is_real_and_periodic():
    p = params_from_cooperativity(1e3, 0.9, n_th=5, omega_m=10.0, third_tone=True)
    T = drive_period(p)
    assert T == pytest.approx(math.pi / 10.0)
    for t in (0.0, 0.013, 0.21):
        A = build_time_dependent_drift(p, t)
        assert A.dtype == float
        assert np.allclose(A, build_time_dependent_drift(p, t + T), atol=1e-12)


def test_mode_components_are_hermitian_pairs():
    p = params_from_cooperativity(1e3, 0.9, omega_m=10.0, third_tone=True)
    comps = mode_drift_components(p)
    swap = np.array([1, 0, 3, 2])
    for k, C in comps.items():
        # the adjoint rows: C_{-k}[i^, j^] = conj(C_k[i, j])
        assert np.allclose(comps[-k][np.ix_(swap, swap)], C.conj())


def test_rwa_limit_matches_lyapunov(ref_point):
    p = SystemParams(**{**ref_point.__dict__, "omega_m": 1e4})
    assert floquet_variance(p) == pytest.approx(steady_state(ref_point).var_x1, rel=1e-3)
    p_inf = SystemParams(**{**ref_point.__dict__, "omega_m": INFINITE})
    res = periodic_steady_state(p_inf)
    assert res.var_x1_avg == pytest.approx(steady_state(ref_point).var_x1, rel=1e-12)
    assert res.periods_to_converge == 0


def test_step_refinement_is_converged():
    p = params_from_cooperativity(5e6, 0.999, n_th=100, omega_m=50.0)
    a = periodic_steady_state(p).var_x1_avg
    b = periodic_steady_state(p, steps_per_period=512).var_x1_avg
    assert a == pytest.approx(b, rel=1e-6)


def test_samples_and_extremes():
    p = params_from_cooperativity(1e3, 0.9, n_th=5, omega_m=5.0)
    res = periodic_steady_state(p, keep_samples=True)
    assert res.samples.shape == (257, 4, 4)
    assert res.var_x1_min <= res.var_x1_avg <= res.var_x1_max
    assert res.var_x1_max > res.var_x1_min
    assert np.allclose(res.samples[0], res.samples[-1], rtol=1e-8)


def test_unstable_static_drift():
    p = params_from_cooperativity(1e4, 1.2, omega_m=50.0)
    with pytest.raises(NotHurwitz):
        periodic_steady_state(p)


def test_parametric_instability_is_reported():
    # strong counter-rotating coupling near resonance destabilises the periodic system
    p = params_from_cooperativity(1e6, 0.99, kappa=1.0, gamma_m=1e-2, omega_m=2.0)
    with pytest.raises(NonFinite):
        periodic_steady_state(p)
