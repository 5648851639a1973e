"""Symmetric matrix functions with explicit zero-mode handling."""

import numpy as np

from .errors import InstabilityError

ZERO_MODE_RTOL = 1e-10


def zero_tolerance(eigvals, scale=None):
    """Absolute cutoff below which an eigenvalue counts as zero.

    The cutoff is ``ZERO_MODE_RTOL`` times ``scale`` (default: the largest
    absolute eigenvalue), so it follows rescaled inputs.
    """
    if scale is None:
        scale = float(np.max(np.abs(eigvals))) if len(eigvals) else 0.0
    return ZERO_MODE_RTOL * scale


def symmetrize(a):
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + a.T)


def sym_eigh(a):
    return np.linalg.eigh(symmetrize(a))


def count_zero_modes(a, scale=None):
    vals = np.linalg.eigvalsh(symmetrize(a))
    tol = zero_tolerance(vals, scale)
    return int(np.sum(np.abs(vals) <= tol))


def sym_power(a, power, *, pseudo=False, scale=None, name="matrix"):
    """Return ``a**power`` for symmetric ``a`` via eigendecomposition.

    With ``pseudo=True`` eigenvalues inside the zero-mode tolerance are
    projected out (their contribution is set to 0) instead of raising.
    Negative eigenvalues beyond the tolerance raise ``InstabilityError``.
    """
    vals, vecs = sym_eigh(a)
    tol = zero_tolerance(vals, scale)
    if np.any(vals < -tol):
        raise InstabilityError(
            f"{name} has a negative eigenvalue {vals.min():.6g}"
        )
    keep = vals > tol
    if not pseudo and not np.all(keep):
        raise InstabilityError(f"{name} is singular (zero eigenvalue)")
    out = np.zeros_like(vals)
    out[keep] = vals[keep] ** power
    return (vecs * out) @ vecs.T


def invsqrt(a, *, scale=None, name="matrix"):
    return sym_power(a, -0.5, scale=scale, name=name)


def pinvsqrt(a, *, scale=None, name="matrix"):
    return sym_power(a, -0.5, pseudo=True, scale=scale, name=name)
