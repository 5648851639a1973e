"""Renormalized harmonic Hamiltonian and its collective/bath decomposition.

To first order in ``lam`` the anharmonic term acts like an extra harmonic
inter-chain coupling ``(lam/2) C_ij``.  Rotating the antisymmetric sector
with an orthogonal matrix whose first column is uniform isolates the
collective coordinate ``X`` (first mode) from the N-1 internal "bath" modes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, InstabilityError, InvalidParameterError
from .groundstate import ground_state_stats
from .linalg import symmetrize
from .model import m_diagonal

ASYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class RenormalizedSystem:
    k_renorm: np.ndarray
    m_renorm_diag: np.ndarray
    ktilde: np.ndarray
    k_r: np.ndarray
    k_vec: np.ndarray
    omega0_renorm: float
    full_potential: np.ndarray
    basis: np.ndarray
    mass: float
    hbar: float
    # gamma_R(0) from the static Schur complement, 2/m k^T K_r^-1 k
    gamma0: float

    @property
    def n_particles(self):
        return self.k_renorm.shape[0]

    @property
    def collective_vector(self):
        """``X = u . q`` in the 2N original coordinates ``q = (x1, x2)``."""
        n = self.n_particles
        return np.concatenate([np.ones(n), -np.ones(n)]) / np.sqrt(2.0 * n)

    def to_dict(self):
        return {
            "k_renorm": self.k_renorm.tolist(),
            "m_renorm_diag": self.m_renorm_diag.tolist(),
            "ktilde": self.ktilde.tolist(),
            "k_r": self.k_r.tolist(),
            "k_vec": self.k_vec.tolist(),
            "omega0_renorm": float(self.omega0_renorm),
            "gamma0": float(self.gamma0),
            "full_potential": self.full_potential.tolist(),
        }


def renormalized_couplings(model, c):
    """``K^R = K + lam C / 2`` and the row-sum diagonal ``M^R``."""
    c = np.asarray(c, dtype=float)
    if np.max(np.abs(c - c.T), initial=0.0) > ASYMMETRY_TOL * max(np.abs(c).max(), 1.0):
        raise InvalidParameterError("C matrix must be symmetric")
    k_r = model.K + 0.5 * model.lam * c
    return k_r, m_diagonal(k_r)


def dct_matrix(n):
    """Orthonormal DCT-II matrix with the uniform vector as first column."""
    j = np.arange(n)[:, None]
    k = np.arange(n)[None, :]
    a = np.sqrt(2.0 / n) * np.cos(np.pi * k * (2 * j + 1) / (2 * n))
    a[:, 0] = 1.0 / np.sqrt(n)
    return a


def full_potential(W, k_renorm):
    """2N x 2N matrix ``U`` with ``V(q) = q^T U q``, ``q = (x1, x2)``."""
    m = np.diag(m_diagonal(k_renorm))
    top = np.hstack([W + m, -k_renorm])
    bottom = np.hstack([-k_renorm, W + m])
    return symmetrize(np.vstack([top, bottom]))


def _frequency(ktilde11, mass, gamma_at_zero):
    radicand = 2.0 * ktilde11 / mass - gamma_at_zero
    if radicand < 0:
        raise InstabilityError(f"negative squared collective frequency {radicand:.6g}")
    return float(np.sqrt(radicand))


def renormalized_frequency(system, mass, gamma_at_zero):
    """Collective frequency of the memory-kernel equation.

    ``Omega^2 = 2 Ktilde_11 / m - gamma(0)``: the bare collective curvature
    minus the instantaneous bath response, i.e. the static Schur complement
    of ``Ktilde`` on the collective mode.
    """
    return _frequency(float(system.ktilde[0, 0]), mass, gamma_at_zero)


def collective_transform(model, k_renorm, m_renorm_diag, basis=None):
    n = model.n_particles
    a = dct_matrix(n) if basis is None else np.asarray(basis, dtype=float)
    if a.shape != (n, n):
        raise InvalidParameterError("basis must be N x N")
    b = a.T @ (model.W + np.diag(m_renorm_diag) + k_renorm) @ a
    asym = np.max(np.abs(b - b.T))
    if asym > ASYMMETRY_TOL * max(np.linalg.norm(b), 1e-300):
        raise ConsistencyError(f"transformed coupling matrix asymmetric by {asym:.3g}")
    kt = symmetrize(b)
    k_r = kt[1:, 1:].copy()
    k_vec = kt[1:, 0].copy()
    if n > 1:
        ev = np.linalg.eigvalsh(k_r)
        if ev.min() <= 0:
            raise InstabilityError("bath block K_r is not positive definite")
        gamma0 = float(2.0 / model.mass * k_vec @ np.linalg.solve(k_r, k_vec))
    else:
        gamma0 = 0.0
    return RenormalizedSystem(
        k_renorm=np.asarray(k_renorm, dtype=float),
        m_renorm_diag=np.asarray(m_renorm_diag, dtype=float),
        ktilde=kt,
        k_r=k_r,
        k_vec=k_vec,
        omega0_renorm=_frequency(float(kt[0, 0]), model.mass, gamma0),
        full_potential=full_potential(model.W, k_renorm),
        basis=a,
        mass=model.mass,
        hbar=model.hbar,
        gamma0=gamma0,
    )


def renormalize(model, alpha_method="exact", regime="full", basis=None, stats=None):
    """Full pipeline: ground-state stats, ``K^R``, collective transform.

    Returns ``(stats, system)``.
    """
    if stats is None:
        stats = ground_state_stats(model, alpha_method, regime)
    k_ren, m_ren = renormalized_couplings(model, stats.c_matrix)
    return stats, collective_transform(model, k_ren, m_ren, basis)
