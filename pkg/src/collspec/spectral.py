"""Bath spectral density, spreading kernel and collective spectrum.

The bath is discrete (N-1 modes), so every frequency integral is done in
closed form over the mode set; the broadening ``epsilon`` only enters when a
density has to be sampled on a grid.

Prefactors follow from the equations of motion of ``V = y^T Ktilde y``
(Hessian ``2 Ktilde``): bath mode ``n`` with coupling ``g_n = k . v_n`` adds
``(4 g_n^2 / m^2 omega_n^2) cos(omega_n t)`` to the kernel.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InstabilityError, InvalidParameterError

SPECTRUM_KINDS = ("sigma", "gamma_t", "gamma_tilde_re", "gamma_tilde_im", "s_tilde")


@dataclass(frozen=True)
class BathModes:
    frequencies: np.ndarray
    weights: np.ndarray
    mass: float

    def __len__(self):
        return len(self.frequencies)

    @property
    def kernel_amplitudes(self):
        """Cosine amplitudes of the spreading kernel, one per mode."""
        return 4.0 * self.weights / (self.mass ** 2 * self.frequencies ** 2)


@dataclass(frozen=True)
class SpectrumSeries:
    grid: np.ndarray
    values: np.ndarray
    kind: str
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in SPECTRUM_KINDS:
            raise InvalidParameterError(f"unknown spectrum kind {self.kind!r}")
        if len(self.grid) != len(self.values):
            raise InvalidParameterError("grid and values differ in length")


def bath_modes_from_blocks(k_r, k_vec, mass):
    k_r = np.asarray(k_r, dtype=float)
    if k_r.size == 0:
        return BathModes(np.zeros(0), np.zeros(0), mass)
    kappa, vecs = np.linalg.eigh(k_r)
    if kappa.min() <= 0:
        raise InstabilityError("bath block has a non-positive eigenvalue")
    weights = (np.asarray(k_vec, dtype=float) @ vecs) ** 2
    return BathModes(np.sqrt(2.0 * kappa / mass), weights, float(mass))


def bath_modes(system, mass=None):
    return bath_modes_from_blocks(system.k_r, system.k_vec, system.mass if mass is None else mass)


def _check_eps(epsilon):
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be positive")


def sigma_R(modes, omega, epsilon):
    """Lorentzian-broadened bath spectral density.

    ``sigma(w) = (2 / pi m w) sum_n w_n eps / ((w - w_n)^2 + eps^2)``, which
    reproduces ``gamma_kernel`` through ``gamma(t) = 2/m int sigma/w cos``.
    """
    _check_eps(epsilon)
    omega = np.asarray(omega, dtype=float)
    acc = np.zeros_like(omega)
    for wn, wt in zip(modes.frequencies, modes.weights):
        acc = acc + wt * epsilon / ((omega - wn) ** 2 + epsilon ** 2)
    return 2.0 * acc / (np.pi * modes.mass * omega)


def gamma_kernel(modes, t):
    t = np.asarray(t, dtype=float)
    acc = np.zeros_like(t)
    for wn, amp in zip(modes.frequencies, modes.kernel_amplitudes):
        acc = acc + amp * np.cos(wn * t)
    return acc


def gamma_tilde(modes, omega, epsilon):
    """One-sided transform ``int_0^inf gamma(t) exp(i z t) dt``, ``z = w + i eps``."""
    _check_eps(epsilon)
    z = np.asarray(omega, dtype=float) + 1j * epsilon
    acc = np.zeros_like(z)
    for wn, amp in zip(modes.frequencies, modes.kernel_amplitudes):
        acc = acc + amp * 1j * z / (z * z - wn * wn)
    return acc


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 1:
        raise InvalidParameterError("grid must be a 1-d sequence")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise InvalidParameterError("frequency grid must be positive and strictly increasing")
    return grid


def default_epsilon(omega0, grid):
    grid = np.asarray(grid, dtype=float)
    spacing = float(np.max(np.diff(grid))) if len(grid) > 1 else 0.0
    return max(1e-3 * omega0, 3.0 * spacing)


def _s_tilde_points(omega0, modes, omega, epsilon, mass, hbar):
    z = omega + 1j * epsilon
    denom = omega0 ** 2 - z * z - 1j * z * gamma_tilde(modes, omega, epsilon)
    return hbar / (np.pi * mass) * np.imag(1.0 / denom)


def evaluate_chunked(func, grid, jobs=1, chunk=4096):
    """Evaluate ``func`` pointwise over ``grid`` in index-ordered chunks.

    ``func`` must be elementwise; results are identical for any ``jobs``.
    """
    pieces = [grid[i:i + chunk] for i in range(0, len(grid), chunk)]
    if jobs <= 1 or len(pieces) == 1:
        parts = [func(p) for p in pieces]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(func, pieces))
    return np.concatenate(parts) if parts else np.zeros(0)


def collective_spectrum(omega0, modes, omega_grid, epsilon=None, mass=1.0, hbar=1.0, jobs=1):
    """``S(w) = hbar/(pi m) Im 1/(Omega0^2 - z^2 - i z gamma_tilde(z))``, ``z = w + i eps``."""
    grid = _check_grid(omega_grid)
    if epsilon is None:
        epsilon = default_epsilon(omega0, grid)
    _check_eps(epsilon)
    values = evaluate_chunked(
        lambda w: _s_tilde_points(omega0, modes, w, epsilon, mass, hbar), grid, jobs
    )
    return SpectrumSeries(grid, values, "s_tilde", float(epsilon))


def collective_spectrum_constant_kernel(omega0, gamma0, omega_grid, mass=1.0, hbar=1.0, epsilon=None):
    """Collective spectrum with a frequency-independent kernel ``gamma0``.

    ``epsilon`` defaults to 0 for ``gamma0 > 0`` (exact Lorentzian) and to
    three grid spacings for ``gamma0 = 0``, where the peak is a delta.
    """
    if gamma0 < 0:
        raise InvalidParameterError("gamma0 must be nonnegative")
    grid = _check_grid(omega_grid)
    if epsilon is None:
        epsilon = 0.0 if gamma0 > 0 else 3.0 * float(np.max(np.diff(grid), initial=0.0))
    if epsilon < 0 or (gamma0 == 0 and epsilon == 0):
        raise InvalidParameterError("need gamma0 > 0 or epsilon > 0")
    z = grid + 1j * epsilon
    values = hbar / (np.pi * mass) * np.imag(1.0 / (omega0 ** 2 - z * z - 1j * z * gamma0))
    return SpectrumSeries(grid, values, "s_tilde", float(epsilon))


def sigma_series(modes, omega_grid, epsilon, jobs=1):
    grid = _check_grid(omega_grid)
    return SpectrumSeries(grid, evaluate_chunked(lambda w: sigma_R(modes, w, epsilon), grid, jobs),
                          "sigma", float(epsilon))


def gamma_t_series(modes, t_grid):
    t = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t) <= 0):
        raise InvalidParameterError("time grid must be strictly increasing")
    return SpectrumSeries(t, gamma_kernel(modes, t), "gamma_t", 0.0)


def gamma_tilde_series(modes, omega_grid, epsilon):
    grid = _check_grid(omega_grid)
    g = gamma_tilde(modes, grid, epsilon)
    return (SpectrumSeries(grid, g.real, "gamma_tilde_re", float(epsilon)),
            SpectrumSeries(grid, g.imag, "gamma_tilde_im", float(epsilon)))


def peak_positions(series, rel_height=1e-3):
    """Grid positions of local maxima above ``rel_height * max``."""
    v = np.asarray(series.values)
    if len(v) < 3:
        return np.zeros(0)
    inner = (v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]) & (v[1:-1] > rel_height * v.max())
    return np.asarray(series.grid)[1:-1][inner]


def fwhm(series):
    """Full width at half maximum of the tallest peak, by linear interpolation."""
    g = np.asarray(series.grid)
    v = np.asarray(series.values)
    i = int(np.argmax(v))
    half = 0.5 * v[i]
    lo = i
    while lo > 0 and v[lo] > half:
        lo -= 1
    hi = i
    while hi < len(v) - 1 and v[hi] > half:
        hi += 1
    if v[lo] > half or v[hi] > half:
        raise InvalidParameterError("peak not resolved inside the grid")
    left = g[lo] + (half - v[lo]) * (g[lo + 1] - g[lo]) / (v[lo + 1] - v[lo])
    right = g[hi - 1] + (half - v[hi - 1]) * (g[hi] - g[hi - 1]) / (v[hi] - v[hi - 1])
    return float(right - left)
