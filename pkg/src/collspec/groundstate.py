"""Gaussian ground-state statistics of the integrable part ``H0``.

In the symmetric/antisymmetric coordinates ``s = (x1 + x2)/sqrt2`` and
``d = (x1 - x2)/sqrt2`` the potential of ``H0`` separates into
``s^T (W+M-K) s + d^T (W+M+K) d``.  Each sector is a set of independent
oscillators, so every ground-state expectation of a function of a
coordinate difference reduces to a one-dimensional Gaussian integral.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidParameterError
from .linalg import invsqrt, pinvsqrt, symmetrize
from .model import ValidationReport, m_diagonal


@dataclass(frozen=True)
class SectorMatrices:
    v_s: np.ndarray
    v_d: np.ndarray
    m_diag: np.ndarray

    @property
    def scale(self):
        """Largest curvature, used as the zero-mode tolerance scale."""
        return float(np.abs(np.linalg.eigvalsh(self.v_d)).max())


@dataclass(frozen=True)
class GroundStateStats:
    gamma_diag: np.ndarray
    alpha: np.ndarray
    c_matrix: np.ndarray
    h1_expectation: float
    alpha_method: str
    regime: str = "full"

    def to_dict(self):
        return {
            "alpha_method": self.alpha_method,
            "regime": self.regime,
            "gamma_diag": self.gamma_diag.tolist(),
            "alpha": self.alpha.tolist(),
            "c_matrix": self.c_matrix.tolist(),
            "h1_expectation": float(self.h1_expectation),
        }


def sector_matrices(model):
    K = model.K
    md = m_diagonal(K)
    M = np.diag(md)
    return SectorMatrices(
        v_s=symmetrize(model.W + M - K),
        v_d=symmetrize(model.W + M + K),
        m_diag=md,
    )


def sector_covariances(sectors, mass, hbar):
    """Ground-state covariances ``<s s^T>`` and ``<d d^T>``.

    The symmetric-sector result excludes the centre-of-mass zero mode.
    """
    pref = 0.5 * hbar / np.sqrt(2.0 * mass)
    scale = sectors.scale
    P = pref * pinvsqrt(sectors.v_s, scale=scale, name="symmetric sector W+M-K")
    D = pref * invsqrt(sectors.v_d, scale=scale, name="antisymmetric sector W+M+K")
    return P, D


def gamma_matrix(sectors, mass, hbar):
    P, D = sector_covariances(sectors, mass, hbar)
    return 2.0 * (P + D)


def alpha_matrix(model, sectors=None, method="exact"):
    """Variances ``alpha_ij = <0|(x1_i - x2_j)^2|0>``.

    ``method="paper"`` uses ``(Gamma_ii + Gamma_jj)/4``, which keeps only the
    single-coordinate variances.  ``method="exact"`` includes the
    cross-covariance ``<x1_i x2_j>``; the centre-of-mass part of the
    symmetric covariance cancels in the combination used here.
    """
    if sectors is None:
        sectors = sector_matrices(model)
    P, D = sector_covariances(sectors, model.mass, model.hbar)
    if method == "paper":
        g = np.diag(2.0 * (P + D))
        return (g[:, None] + g[None, :]) / 4.0
    if method == "exact":
        return exact_alpha_from_covariances(P, D)
    raise InvalidParameterError(f"unknown alpha method {method!r}")


def exact_alpha_from_covariances(P, D):
    p = np.diag(P)
    d = np.diag(D)
    alpha = 0.5 * (p[:, None] + p[None, :] - 2.0 * P + d[:, None] + d[None, :] + 2.0 * D)
    return symmetrize(alpha)


def double_factorial(k):
    """``k!!`` for odd ``k >= -1`` (``(-1)!! = 1``)."""
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def gaussian_moment(alpha, power):
    """``E[z**power]`` for ``z ~ N(0, alpha)``; zero for odd powers."""
    if power % 2:
        return np.zeros_like(np.asarray(alpha, dtype=float))
    return np.asarray(alpha, dtype=float) ** (power // 2) * double_factorial(power - 1)


def expect_f(coeffs, alpha):
    """``E[f(z)]``, ``z ~ N(0, alpha)`` elementwise over ``alpha``."""
    alpha = np.asarray(alpha, dtype=float)
    out = np.zeros_like(alpha)
    for n, fn in enumerate(coeffs, start=2):
        out = out + fn * gaussian_moment(alpha, 2 * n)
    return out


def expect_f_second_derivative(coeffs, alpha):
    alpha = np.asarray(alpha, dtype=float)
    out = np.zeros_like(alpha)
    for n, fn in enumerate(coeffs, start=2):
        out = out + fn * 2 * n * (2 * n - 1) * gaussian_moment(alpha, 2 * n - 2)
    return out


def c_matrix(model, alpha, regime="full"):
    """Effective stiffness ``C_ij = <0|f''(x1_i - x2_j)|0>``.

    ``regime="semiclassical"`` keeps only the quartic coefficient,
    ``C = 12 f_2 alpha``.
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0):
        raise DomainError("alpha must be entrywise nonnegative")
    coeffs = model.anharmonic_coeffs
    if regime == "full":
        c = expect_f_second_derivative(coeffs, alpha)
    elif regime == "semiclassical":
        f2 = coeffs[0] if coeffs else 0.0
        c = 12.0 * f2 * alpha
    else:
        raise InvalidParameterError(f"unknown regime {regime!r}")
    return symmetrize(c)


def h1_expectation(model, alpha):
    return float(np.sum(expect_f(model.anharmonic_coeffs, alpha)))


def ground_state_stats(model, alpha_method="exact", regime="full"):
    sectors = sector_matrices(model)
    gamma = gamma_matrix(sectors, model.mass, model.hbar)
    alpha = alpha_matrix(model, sectors, alpha_method)
    return GroundStateStats(
        gamma_diag=np.diag(gamma).copy(),
        alpha=alpha,
        c_matrix=c_matrix(model, alpha, regime),
        h1_expectation=h1_expectation(model, alpha),
        alpha_method=alpha_method,
        regime=regime,
    )


def classical_frequencies(model):
    """Nonzero normal-mode frequencies of both sectors, ascending."""
    sectors = sector_matrices(model)
    ev = np.concatenate(
        [np.linalg.eigvalsh(sectors.v_s), np.linalg.eigvalsh(sectors.v_d)]
    )
    tol = 1e-10 * sectors.scale
    return np.sort(np.sqrt(2.0 * ev[ev > tol] / model.mass))


def validity_ratio(model, stats):
    """Return ``(lam |<H1>| / (hbar omega_min), omega_min)``."""
    omega_min = float(classical_frequencies(model)[0])
    return model.lam * abs(stats.h1_expectation) / (model.hbar * omega_min), omega_min


def validity_report(model, stats, threshold=0.1):
    """Perturbative gap condition; the margin is ``threshold - ratio``."""
    ratio, _ = validity_ratio(model, stats)
    return ValidationReport([("perturbative_gap", bool(ratio < threshold), threshold - ratio)])
