"""Classical time evolution of the collective coordinate.

Two independent routes: the reduced memory-kernel equation

    X'' + Omega^2 X + int_0^t gamma(t - s) X'(s) ds = 0,

integrated with a fixed-step predictor-corrector, and the exact linear
dynamics of all 2N coordinates via normal modes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InstabilityError, InvalidParameterError
from .oracle import collective_vector, normal_modes
from .spectral import BathModes, SpectrumSeries, gamma_kernel


@dataclass(frozen=True)
class GLEProblem:
    omega0: float
    modes: BathModes
    x0: float
    v0: float
    t_max: float
    dt: float

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidParameterError("dt must be positive")
        if not self.t_max >= self.dt:
            raise InvalidParameterError("t_max must be at least dt")
        limit = resolution_limit(self.omega0, self.modes)
        if self.dt > limit * (1 + 1e-12):
            raise InvalidParameterError(
                f"dt={self.dt:.4g} does not resolve the fastest frequency (need <= {limit:.4g})"
            )


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if not len(self.times) == len(self.x) == len(self.v):
            raise InvalidParameterError("trajectory arrays differ in length")


@dataclass(frozen=True)
class FullState:
    """Positions and velocities of all 2N particles, ``q = (x1, x2)``."""

    q: np.ndarray
    v: np.ndarray


def resolution_limit(omega0, modes):
    """Largest admissible step: 20 steps per period of the fastest frequency."""
    w_max = max([omega0, *np.asarray(modes.frequencies).tolist()])
    return 2.0 * np.pi / (20.0 * w_max)


def solve_gle(problem):
    """Heun-type predictor-corrector with a trapezoidal memory integral.

    The kernel is evaluated exactly on the step nodes.  Cost is
    O(steps^2); global error O(dt^2).
    """
    dt = problem.dt
    steps = int(round(problem.t_max / dt))
    times = dt * np.arange(steps + 1)
    g = gamma_kernel(problem.modes, times)
    w2 = problem.omega0 ** 2
    x = np.zeros(steps + 1)
    v = np.zeros(steps + 1)
    x[0], v[0] = problem.x0, problem.v0
    # without bath modes the kernel vanishes identically
    no_bath = len(problem.modes) == 0

    def memory(n, history, v_n):
        # trapezoid over [0, t_n]; history = sum excluding the t_n endpoint
        return 0.0 if n == 0 else dt * (history + 0.5 * g[0] * v_n)

    def history(n):
        if n == 0 or no_bath:
            return 0.0
        # 0.5 g_n v_0 + sum_{k=1}^{n-1} g_{n-k} v_k
        return 0.5 * g[n] * v[0] + float(np.dot(g[n - 1:0:-1], v[1:n]))

    acc = -w2 * x[0]
    for n in range(steps):
        h_next = history(n + 1)
        xp = x[n] + dt * v[n]
        vp = v[n] + dt * acc
        ap = -w2 * xp - memory(n + 1, h_next, vp)
        x[n + 1] = x[n] + 0.5 * dt * (v[n] + vp)
        v[n + 1] = v[n] + 0.5 * dt * (acc + ap)
        acc = -w2 * x[n + 1] - memory(n + 1, h_next, v[n + 1])
    return Trajectory(times, x, v)


def evolve_full_state(system, state, t):
    """Exact evolution of all coordinates under ``H0^R`` by time ``t``."""
    freqs, vecs = normal_modes(system.full_potential, system.mass)
    q0 = vecs.T @ state.q
    p0 = vecs.T @ state.v
    wt = freqs * t
    safe = np.where(freqs > 0, freqs, 1.0)
    c = np.cos(wt)
    s_over_w = np.where(freqs > 0, np.sin(wt) / safe, t)
    q = c * q0 + s_over_w * p0
    v = -freqs * np.sin(wt) * q0 + c * p0
    return FullState(vecs @ q, vecs @ v)


def solve_full_classical(system, init, t_grid):
    """Collective projection of the exact normal-mode solution."""
    t = np.asarray(t_grid, dtype=float)
    freqs, vecs = normal_modes(system.full_potential, system.mass)
    u = vecs.T @ collective_vector(system.n_particles)
    q0 = vecs.T @ init.q
    p0 = vecs.T @ init.v
    wt = np.multiply.outer(t, freqs)
    safe = np.where(freqs > 0, freqs, 1.0)
    s_over_w = np.where(freqs > 0, np.sin(wt) / safe, np.multiply.outer(t, np.ones_like(freqs)))
    x = (np.cos(wt) * q0 + s_over_w * p0) @ u
    v = (-freqs * np.sin(wt) * q0 + np.cos(wt) * p0) @ u
    return Trajectory(t, x, v)


def equilibrium_bath_init(system, x0):
    """Initial state for which the reduced equation has no forcing term.

    The collective mode is displaced to ``x0`` and the internal modes of the
    antisymmetric sector sit at their static equilibrium for that
    displacement, ``y = -K_r^{-1} k x0``; the symmetric sector and all
    velocities are zero.
    """
    n = system.n_particles
    y = np.zeros(n)
    y[0] = x0
    if n > 1:
        try:
            y[1:] = -np.linalg.solve(system.k_r, system.k_vec) * x0
        except np.linalg.LinAlgError as exc:
            raise InstabilityError("singular internal static system") from exc
    d = system.basis @ y
    q = np.concatenate([d, -d]) / np.sqrt(2.0)
    return FullState(q, np.zeros(2 * n))


def spectrum_from_trajectory(traj):
    """Hann-windowed DFT magnitude of ``X(t)`` on angular frequencies."""
    t = np.asarray(traj.times, dtype=float)
    if len(t) < 2:
        raise InvalidParameterError("need at least two samples")
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=0.0):
        raise InvalidParameterError("time grid must be uniform")
    window = np.hanning(len(t))
    mag = np.abs(np.fft.rfft(np.asarray(traj.x) * window)) * dt
    omega = 2.0 * np.pi * np.fft.rfftfreq(len(t), dt)
    # drop omega = 0 so the grid stays strictly positive
    return SpectrumSeries(omega[1:], mag[1:], "s_tilde", 0.0)


def dominant_frequency(series):
    return float(series.grid[int(np.argmax(series.values))])
