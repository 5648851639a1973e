"""Independent ground truth for small systems.

Everything here works from the original 2N coordinates or from an explicit
quantum basis and never goes through the collective/bath decomposition, so
it can be used to check that route.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy import sparse
from scipy.sparse.linalg import eigsh

from .errors import ConsistencyError, InvalidParameterError, ResourceError
from .groundstate import alpha_matrix, expect_f_second_derivative, sector_matrices
from .linalg import ZERO_MODE_RTOL, sym_eigh
from .renormalize import full_potential as assemble_full_potential

MAX_FOCK_DIM = 200_000
DENSE_FOCK_DIM = 1500


# --------------------------------------------------------------------------
# harmonic systems


@dataclass(frozen=True)
class ModalCorrelator:
    mode_freqs: np.ndarray
    collective_overlaps: np.ndarray
    weights: np.ndarray

    def broadened(self, omega, epsilon, kind="retarded"):
        """Stick spectrum sampled with width ``epsilon``.

        ``kind="retarded"`` is ``(1/pi) Im sum_n w_n 2 Omega_n / (Omega_n^2 - z^2)``
        at ``z = omega + i epsilon``: a Lorentzian at ``+Omega_n`` minus its
        mirror at ``-Omega_n``.  ``kind="lorentzian"`` drops the mirror term.
        """
        omega = np.asarray(omega, dtype=float)
        acc = np.zeros_like(omega)
        for wn, wt in zip(self.mode_freqs, self.weights):
            term = epsilon / ((omega - wn) ** 2 + epsilon ** 2)
            if kind == "retarded":
                term = term - epsilon / ((omega + wn) ** 2 + epsilon ** 2)
            elif kind != "lorentzian":
                raise InvalidParameterError(f"unknown broadening {kind!r}")
            acc = acc + wt * term
        return acc / np.pi

    def correlator(self, t):
        """``S(t) = sum_n w_n exp(-i Omega_n t)``."""
        t = np.asarray(t, dtype=float)
        return np.exp(-1j * np.outer(t, self.mode_freqs)) @ self.weights

    def to_dict(self):
        return {
            "mode_freqs": self.mode_freqs.tolist(),
            "collective_overlaps": self.collective_overlaps.tolist(),
            "weights": self.weights.tolist(),
        }


def collective_vector(n):
    return np.concatenate([np.ones(n), -np.ones(n)]) / np.sqrt(2.0 * n)


def normal_modes(full_potential, mass):
    """Frequencies and orthonormal modes of ``m q'' = -2 U q``.

    Zero modes come back with frequency exactly 0.
    """
    vals, vecs = sym_eigh(2.0 * np.asarray(full_potential) / mass)
    tol = ZERO_MODE_RTOL * np.abs(vals).max()
    if np.any(vals < -tol):
        raise ConsistencyError("quadratic form is not positive semidefinite")
    freqs = np.where(vals > tol, np.sqrt(np.clip(vals, 0.0, None)), 0.0)
    return freqs, vecs


def harmonic_correlator(full_potential, mass, hbar, overlap_tol=1e-8):
    full_potential = np.asarray(full_potential, dtype=float)
    n = full_potential.shape[0] // 2
    freqs, vecs = normal_modes(full_potential, mass)
    c = vecs.T @ collective_vector(n)
    zero = freqs == 0
    if np.any(np.abs(c[zero]) > overlap_tol):
        raise ConsistencyError("collective coordinate overlaps a zero mode")
    freqs, c = freqs[~zero], c[~zero]
    return ModalCorrelator(freqs, c, c ** 2 * hbar / (2.0 * mass * freqs))


def ground_state_covariance(full_potential, mass, hbar):
    """``<q q^T>`` of the harmonic ground state, zero modes excluded."""
    freqs, vecs = normal_modes(full_potential, mass)
    keep = freqs > 0
    v = vecs[:, keep]
    return (v * (hbar / (2.0 * mass * freqs[keep]))) @ v.T


def difference_variances(cov):
    """``<(x1_i - x2_j)^2>`` from a 2N x 2N coordinate covariance."""
    n = cov.shape[0] // 2
    c11 = np.diag(cov)[:n]
    c22 = np.diag(cov)[n:]
    return c11[:, None] + c22[None, :] - 2.0 * cov[:n, n:]


def model_full_potential(model):
    return assemble_full_potential(model.W, model.K)


def beta_function(full_potential, mass, i, j, t):
    """``b_ij(t)`` with ``[(x1_i - x2_j), X(-t)] = i hbar b_ij(t)``."""
    full_potential = np.asarray(full_potential, dtype=float)
    n = full_potential.shape[0] // 2
    freqs, vecs = normal_modes(full_potential, mass)
    u = np.zeros(2 * n)
    u[i] += 1.0
    u[n + j] -= 1.0
    proj = (vecs.T @ u) * (vecs.T @ collective_vector(n))
    t = np.asarray(t, dtype=float)
    wt = np.multiply.outer(t, freqs)
    safe = np.where(freqs > 0, freqs, 1.0)
    # sin(W t)/W, continuous at W = 0
    s = np.where(freqs > 0, np.sin(wt) / safe, np.multiply.outer(t, np.ones_like(freqs)))
    return -(s @ proj) / mass


def gauss_hermite_expectation(func, alpha, nodes=64):
    """``E[func(z)]`` for ``z ~ N(0, alpha)`` by probabilists' Gauss-Hermite."""
    x, w = hermegauss(nodes)
    alpha = np.asarray(alpha, dtype=float)
    vals = func(np.sqrt(alpha)[..., None] * x)
    return vals @ w / np.sqrt(2.0 * np.pi)


# --------------------------------------------------------------------------
# truncated Fock space


@dataclass(frozen=True)
class InternalModes:
    """Normal modes of ``H0`` without the centre-of-mass translation.

    ``r_coeffs[i, j, mu]`` and ``x_coeffs[mu]`` expand ``x1_i - x2_j`` and
    ``X`` in ``(a_mu + a_mu^dagger)``.
    """

    freqs: np.ndarray
    r_coeffs: np.ndarray
    x_coeffs: np.ndarray


def internal_modes(model):
    sectors = sector_matrices(model)
    n = model.n_particles
    m, hbar = model.mass, model.hbar
    tol = ZERO_MODE_RTOL * sectors.scale
    vs, es = sym_eigh(sectors.v_s)
    vd, ed = sym_eigh(sectors.v_d)
    keep = vs > tol
    vs, es = vs[keep], es[:, keep]

    freqs = np.sqrt(2.0 * np.concatenate([vs, vd]) / m)
    amp = np.sqrt(hbar / (2.0 * m * freqs))
    n_s = len(vs)
    r = np.zeros((n, n, len(freqs)))
    r[:, :, :n_s] = (es[:, None, :] - es[None, :, :]) / np.sqrt(2.0)
    r[:, :, n_s:] = (ed[:, None, :] + ed[None, :, :]) / np.sqrt(2.0)
    x = np.zeros(len(freqs))
    x[n_s:] = ed.sum(axis=0) / np.sqrt(n)
    return InternalModes(freqs, r * amp, x * amp)


class FockSpace:
    """Product basis with per-mode occupation ``0..cap`` (inclusive)."""

    def __init__(self, n_modes, cap):
        self.n_modes = n_modes
        self.cap = cap
        self.dim = (cap + 1) ** n_modes
        self._lower = sparse.diags(np.sqrt(np.arange(1, cap + 1)), 1, format="csr")

    def _embed(self, single, mode):
        eye = sparse.identity(self.cap + 1, format="csr")
        out = sparse.identity(1, format="csr")
        for mu in range(self.n_modes):
            out = sparse.kron(out, single if mu == mode else eye, format="csr")
        return out

    def lower(self, mode):
        return self._embed(self._lower, mode)

    def occupations(self):
        grids = np.indices((self.cap + 1,) * self.n_modes).reshape(self.n_modes, -1)
        return grids.T

    def linear(self, coeffs, freqs=None, t=0.0):
        """``sum_mu c_mu (a_mu e^{-i W t} + h.c.)`` as a sparse matrix."""
        dtype = complex if (freqs is not None and t != 0.0) else float
        out = sparse.csr_matrix((self.dim, self.dim), dtype=dtype)
        for mu, c in enumerate(coeffs):
            if c == 0.0:
                continue
            a = self.lower(mu)
            phase = np.exp(-1j * freqs[mu] * t) if dtype is complex else 1.0
            out = out + c * (phase * a + np.conj(phase) * a.T)
        return out.tocsr()

    def number_energy(self, freqs, hbar):
        occ = self.occupations()
        return hbar * (occ @ freqs + 0.5 * np.sum(freqs))


@dataclass(frozen=True)
class FockResult:
    energies: np.ndarray
    transition_strengths: np.ndarray
    basis_cutoff: int
    converged: bool
    dim: int = 0

    @property
    def gaps(self):
        return self.energies - self.energies[0]

    @property
    def lowest_gap(self):
        return float(self.energies[1] - self.energies[0])

    @property
    def collective_gap(self):
        """Excitation energy of the state with the largest ``|<0|X|mu>|^2``."""
        k = int(np.argmax(self.transition_strengths[1:])) + 1
        return float(self.energies[k] - self.energies[0])

    def to_dict(self):
        return {
            "energies": self.energies.tolist(),
            "transition_strengths": self.transition_strengths.tolist(),
            "basis_cutoff": self.basis_cutoff,
            "converged": self.converged,
            "dim": self.dim,
        }


def _polynomial_of(op, coeffs):
    """``sum_n f_n op^(2n)`` for a sparse Hermitian ``op``."""
    out = sparse.csr_matrix(op.shape, dtype=op.dtype)
    sq = (op @ op).tocsr()
    power = (sq @ sq).tocsr()
    for fn in coeffs:
        if fn != 0.0:
            out = out + fn * power
        power = (power @ sq).tocsr()
    return out


def fock_hamiltonian(model, cap, modes=None):
    """``H0 + lam H1`` and ``X`` on the truncated basis of ``H0`` modes.

    ``H1`` is built on a basis padded by ``deg/2`` quanta per mode, which
    makes its truncated matrix elements exact.
    """
    if modes is None:
        modes = internal_modes(model)
    n_modes = len(modes.freqs)
    dim = (cap + 1) ** n_modes
    if dim > MAX_FOCK_DIM:
        raise ResourceError(f"Fock dimension {dim} exceeds cap {MAX_FOCK_DIM}")
    space = FockSpace(n_modes, cap)
    h = sparse.diags(space.number_energy(modes.freqs, model.hbar), format="csr")
    coeffs = model.anharmonic_coeffs
    if model.lam != 0.0 and any(c != 0.0 for c in coeffs):
        pad = len(coeffs) + 1
        big = FockSpace(n_modes, cap + pad)
        keep = np.flatnonzero(np.all(big.occupations() <= cap, axis=1))
        n = model.n_particles
        h1 = sparse.csr_matrix((big.dim, big.dim))
        for i, j in product(range(n), range(n)):
            r = big.linear(modes.r_coeffs[i, j])
            h1 = h1 + _polynomial_of(r, coeffs)
        h = h + model.lam * h1[keep][:, keep]
    x = space.linear(modes.x_coeffs)
    return h.tocsr(), x.tocsr()


def _lowest_states(h, n_states):
    dim = h.shape[0]
    k = min(n_states, dim)
    if dim <= DENSE_FOCK_DIM:
        vals, vecs = np.linalg.eigh(h.toarray())
        return vals[:k], vecs[:, :k]
    # fixed start vector keeps ARPACK deterministic
    v0 = np.ones(dim) / np.sqrt(dim)
    vals, vecs = eigsh(h, k=k, which="SA", v0=v0, tol=1e-14)
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def _solve(model, cap, n_states, modes):
    h, x = fock_hamiltonian(model, cap, modes)
    vals, vecs = _lowest_states(h, n_states)
    strengths = np.abs(vecs[:, 0] @ (x @ vecs)) ** 2
    return vals, strengths, h.shape[0]


def fock_diagonalize(model, n_max, n_states=12, check_convergence=True):
    """Exact diagonalization in the truncated harmonic basis of ``H0``.

    ``converged`` compares the lowest gap against a run with ``n_max + 4``;
    if that run would exceed the dimension cap the result is flagged as not
    converged.
    """
    if n_max < 1:
        raise InvalidParameterError("n_max must be >= 1")
    modes = internal_modes(model)
    vals, strengths, dim = _solve(model, n_max, n_states, modes)
    converged = False
    if check_convergence:
        try:
            vals2, _, _ = _solve(model, n_max + 4, n_states, modes)
        except ResourceError:
            pass
        else:
            g1 = vals[1] - vals[0]
            g2 = vals2[1] - vals2[0]
            converged = bool(abs(g2 - g1) <= 1e-6 * abs(g2))
    return FockResult(vals, strengths, n_max, converged, dim)


def chi_kernel_check(model, i, j, t1, t, n_max=24):
    """Both sides of the nested-commutator identity for one ``(i, j)`` term.

    ``lhs = <0|[[f(r_ij(t1)), X(t)], X(0)]|0>`` from explicit operators on
    the truncated basis, ``rhs = beta(t1 - t) beta(t1) C_ij`` with
    ``beta = i hbar b``.  The operator algebra is exact when ``n_max`` is at
    least ``deg(f) + 2``.
    """
    modes = internal_modes(model)
    n_modes = len(modes.freqs)
    if (n_max + 1) ** n_modes > MAX_FOCK_DIM:
        raise ResourceError("Fock dimension exceeds cap")
    space = FockSpace(n_modes, n_max)
    r = space.linear(modes.r_coeffs[i, j], modes.freqs, t1).astype(complex)
    xt = space.linear(modes.x_coeffs, modes.freqs, t).astype(complex)
    x0 = space.linear(modes.x_coeffs).astype(complex)
    coeffs = model.anharmonic_coeffs

    def apply_f(vec):
        out = np.zeros_like(vec)
        cur = r @ (r @ (r @ (r @ vec)))
        for fn in coeffs:
            out = out + fn * cur
            cur = r @ (r @ cur)
        return out

    vac = np.zeros(space.dim, dtype=complex)
    vac[0] = 1.0
    # <0|A B C|0> with every operator applied to kets
    terms = (
        apply_f(xt @ (x0 @ vac)),
        -(xt @ apply_f(x0 @ vac)),
        -(x0 @ apply_f(xt @ vac)),
        x0 @ (xt @ apply_f(vac)),
    )
    lhs = complex(np.vdot(vac, sum(terms)))

    alpha = alpha_matrix(model, method="exact")
    c_ij = float(expect_f_second_derivative(coeffs, alpha[i, j]))
    pot = model_full_potential(model)
    b1 = beta_function(pot, model.mass, i, j, t1 - t)
    b2 = beta_function(pot, model.mass, i, j, t1)
    rhs = -(model.hbar ** 2) * float(b1) * float(b2) * c_ij
    if abs(lhs.imag) > 1e-8 * max(abs(lhs.real), 1e-300):
        raise ConsistencyError(f"nested commutator has imaginary part {lhs.imag:.3g}")
    return lhs.real, rhs
