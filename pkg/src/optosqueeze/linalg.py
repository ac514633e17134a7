"""Dense small-matrix kernels: Lyapunov/Stein solves, stability, RK4.

Everything here works on plain ``numpy`` arrays of shape (n, n) with n <= 16.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .errors import NonFinite, NotHurwitz, SingularSystem

HURWITZ_MARGIN = 1e-12
MAX_DIM = 16

Matrix = NDArray[np.float64]


@dataclass(frozen=True)
class LyapunovSolution:
    V: Matrix
    residual_norm: float


def _square(A, name="A") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if A.shape[0] > MAX_DIM:
        raise ValueError(f"{name} is {A.shape[0]}x{A.shape[0]}, larger than {MAX_DIM}")
    return A


def is_hurwitz(A) -> bool:
    """True iff every eigenvalue of ``A`` has real part below -1e-12."""
    A = _square(A)
    return bool(np.all(np.linalg.eigvals(A).real < -HURWITZ_MARGIN))


def symmetrize(V: np.ndarray) -> np.ndarray:
    return 0.5 * (V + V.T)


def _solve_vectorized(K: np.ndarray, rhs: np.ndarray, n: int) -> np.ndarray:
    # Row-major vec: vec(A V B^T) = (A kron B) vec(V).
    cond = np.linalg.cond(K)
    if not np.isfinite(cond) or cond > 1e15:
        raise SingularSystem(f"vectorized system is numerically singular (cond={cond:.3g})")
    return np.linalg.solve(K, rhs.reshape(-1)).reshape(n, n)


def solve_lyapunov(A, D) -> LyapunovSolution:
    """Solve ``A V + V A^T + D = 0`` for a Hurwitz drift ``A``.

    The n^2 x n^2 Kronecker system is solved densely; for n = 4 this is a
    16 x 16 solve.
    """
    A = _square(A)
    D = _square(D, "D")
    if A.shape != D.shape:
        raise ValueError("A and D must have the same shape")
    if not is_hurwitz(A):
        worst = np.linalg.eigvals(A).real.max()
        raise NotHurwitz(f"drift has an eigenvalue with real part {worst:.3g} >= -{HURWITZ_MARGIN}")
    n = A.shape[0]
    eye = np.eye(n)
    K = np.kron(A, eye) + np.kron(eye, A)
    V = symmetrize(_solve_vectorized(K, -D, n))
    residual = float(np.abs(A @ V + V @ A.T + D).max())
    return LyapunovSolution(V=V, residual_norm=residual)


def solve_stein(P, Q) -> np.ndarray:
    """Solve the discrete Lyapunov equation ``V = P V P^T + Q``.

    ``P`` must be a contraction (spectral radius < 1), otherwise the fixed
    point does not describe an attracting steady state.
    """
    P = _square(P, "P")
    Q = _square(Q, "Q")
    rho = float(np.abs(np.linalg.eigvals(P)).max())
    if rho >= 1.0:
        raise NotHurwitz(f"one-period map has spectral radius {rho:.12g} >= 1 (parametric instability)")
    n = P.shape[0]
    K = np.eye(n * n) - np.kron(P, P)
    return symmetrize(_solve_vectorized(K, Q, n))


def _check_finite(Y: np.ndarray, t: float) -> None:
    if not np.all(np.isfinite(Y)):
        raise NonFinite(f"non-finite state encountered at t={t:.6g}")


def rk4_steps(f: Callable[[float, np.ndarray], np.ndarray], Y0, t0: float, dt: float, n_steps: int,
              symmetric: bool = False, keep: bool = False):
    """Classical fixed-step RK4 for a matrix ODE ``dY/dt = f(t, Y)``.

    Returns the final state, or the list of all ``n_steps + 1`` states when
    ``keep`` is set.
    """
    Y = np.array(Y0, dtype=float)
    out = [Y] if keep else None
    t = t0
    half = 0.5 * dt
    for i in range(n_steps):
        t = t0 + i * dt
        k1 = f(t, Y)
        k2 = f(t + half, Y + half * k1)
        k3 = f(t + half, Y + half * k2)
        k4 = f(t + dt, Y + dt * k3)
        Y = Y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if symmetric:
            Y = symmetrize(Y)
        _check_finite(Y, t + dt)
        if keep:
            out.append(Y)
    return out if keep else Y


def integrate_covariance_ode(A_of_t: Callable[[float], np.ndarray], D, V0, t0: float, t1: float,
                             dt: float) -> np.ndarray:
    """Integrate ``dV/dt = A(t) V + V A(t)^T + D`` from t0 to t1 with RK4.

    The last step is shortened so that the integration ends exactly at t1.
    Symmetry of V is re-imposed after every step.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got t0={t0}, t1={t1}")
    D = _square(D, "D")
    V = symmetrize(_square(V0, "V0"))

    def rhs(t, V):
        A = A_of_t(t)
        AV = A @ V
        return AV + AV.T + D

    n_full = int(np.floor((t1 - t0) / dt * (1 + 1e-12)))
    V = rk4_steps(rhs, V, t0, dt, n_full, symmetric=True)
    rest = (t1 - t0) - n_full * dt
    if rest > 1e-14 * max(1.0, abs(t1)):
        V = rk4_steps(rhs, V, t0 + n_full * dt, rest, 1, symmetric=True)
    return V


@dataclass(frozen=True)
class PeriodMap:
    """Exact-in-structure one-period flow of the covariance equation.

    ``V(t0 + t_k) = P_k V(t0) P_k^T + Q_k`` for the sampled times ``t_k``;
    the last sample is the full period.
    """

    times: np.ndarray
    P: np.ndarray  # (n_samples, n, n) fundamental matrices
    Q: np.ndarray  # (n_samples, n, n) accumulated noise

    @property
    def monodromy(self) -> np.ndarray:
        return self.P[-1]

    @property
    def noise(self) -> np.ndarray:
        return self.Q[-1]

    def propagate(self, V0) -> np.ndarray:
        """Covariances at every sampled time for a start value V0."""
        V = np.einsum("kij,jl,kml->kim", self.P, V0, self.P) + self.Q
        return 0.5 * (V + np.swapaxes(V, 1, 2))


def period_map(A_samples: np.ndarray, D, period: float) -> PeriodMap:
    """Integrate fundamental matrix and noise integral over one period with RK4.

    ``A_samples`` holds the drift at the 2N+1 equally spaced times
    ``k * period / (2N)``: RK4 with N steps needs the drift at step starts,
    midpoints and ends.
    """
    A_samples = np.asarray(A_samples, dtype=float)
    n_half = A_samples.shape[0] - 1
    if n_half < 2 or n_half % 2:
        raise ValueError("need an odd number (>= 3) of drift samples")
    n_steps = n_half // 2
    D = _square(D, "D")
    n = D.shape[0]
    dt = period / n_steps
    P = np.eye(n)
    Q = np.zeros((n, n))
    Ps = [P]
    Qs = [Q]
    for i in range(n_steps):
        A0, Am, A1 = A_samples[2 * i], A_samples[2 * i + 1], A_samples[2 * i + 2]
        k1 = A0 @ P
        k2 = Am @ (P + 0.5 * dt * k1)
        k3 = Am @ (P + 0.5 * dt * k2)
        k4 = A1 @ (P + dt * k3)
        P = P + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        def g(A, X):
            AX = A @ X
            return AX + AX.T + D

        l1 = g(A0, Q)
        l2 = g(Am, Q + 0.5 * dt * l1)
        l3 = g(Am, Q + 0.5 * dt * l2)
        l4 = g(A1, Q + dt * l3)
        Q = symmetrize(Q + (dt / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4))
        _check_finite(P, (i + 1) * dt)
        _check_finite(Q, (i + 1) * dt)
        Ps.append(P)
        Qs.append(Q)
    times = np.arange(n_steps + 1) * dt
    return PeriodMap(times=times, P=np.array(Ps), Q=np.array(Qs))
