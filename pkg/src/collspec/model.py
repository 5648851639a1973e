"""Two coupled harmonic chains with an even anharmonic inter-chain term.

The Hamiltonian is

    H = sum_a [ p_a.p_a / 2m + x_a^T W x_a ]
        + sum_ij K_ij (x1_i - x2_j)^2
        + lam * sum_ij f(x1_i - x2_j),

with ``f(z) = sum_n f_n z^(2n)`` starting at ``n = 2``.  Note there is no
factor 1/2 in front of the quadratic forms: the Hessian of the potential is
``2 W`` and so on.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .linalg import ZERO_MODE_RTOL, symmetrize

SYMMETRY_TOL = 1e-12
ROWSUM_TOL = 1e-10


@dataclass(frozen=True)
class ChainModel:
    n_particles: int
    mass: float
    hbar: float
    lam: float
    intra_coupling: np.ndarray
    inter_coupling: np.ndarray
    anharmonic_coeffs: tuple = ()

    def __post_init__(self):
        w = np.array(self.intra_coupling, dtype=float, ndmin=2)
        k = np.array(self.inter_coupling, dtype=float, ndmin=2)
        n = int(self.n_particles)
        if n < 1:
            raise InvalidParameterError("n_particles must be >= 1")
        if w.shape != (n, n) or k.shape != (n, n):
            raise InvalidParameterError(
                f"W and K must be {n}x{n}, got {w.shape} and {k.shape}"
            )
        if not self.mass > 0 or not self.hbar > 0:
            raise InvalidParameterError("mass and hbar must be positive")
        if not self.lam >= 0:
            raise InvalidParameterError("lambda must be nonnegative")
        w.setflags(write=False)
        k.setflags(write=False)
        object.__setattr__(self, "n_particles", n)
        object.__setattr__(self, "mass", float(self.mass))
        object.__setattr__(self, "hbar", float(self.hbar))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "intra_coupling", w)
        object.__setattr__(self, "inter_coupling", k)
        object.__setattr__(
            self, "anharmonic_coeffs", tuple(float(c) for c in self.anharmonic_coeffs)
        )

    @property
    def W(self):
        return self.intra_coupling

    @property
    def K(self):
        return self.inter_coupling

    def replace(self, **changes):
        fields = dict(
            n_particles=self.n_particles,
            mass=self.mass,
            hbar=self.hbar,
            lam=self.lam,
            intra_coupling=self.intra_coupling,
            inter_coupling=self.inter_coupling,
            anharmonic_coeffs=self.anharmonic_coeffs,
        )
        fields.update(changes)
        return ChainModel(**fields)

    def to_dict(self):
        return {
            "n_particles": self.n_particles,
            "mass": self.mass,
            "hbar": self.hbar,
            "lambda": self.lam,
            "intra_coupling": self.intra_coupling.tolist(),
            "inter_coupling": self.inter_coupling.tolist(),
            "anharmonic_coeffs": list(self.anharmonic_coeffs),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            n_particles=int(d["n_particles"]),
            mass=float(d.get("mass", 1.0)),
            hbar=float(d.get("hbar", 1.0)),
            lam=float(d.get("lambda", 0.0)),
            intra_coupling=np.asarray(d["intra_coupling"], dtype=float),
            inter_coupling=np.asarray(d["inter_coupling"], dtype=float),
            anharmonic_coeffs=tuple(d.get("anharmonic_coeffs", ())),
        )


@dataclass(frozen=True)
class ValidationReport:
    """Named checks as ``(name, passed, margin)`` triples."""

    checks: list = field(default_factory=list)

    @property
    def overall(self):
        return all(ok for _, ok, _ in self.checks)

    def failed(self):
        return [name for name, ok, _ in self.checks if not ok]

    def __getitem__(self, name):
        for n, ok, margin in self.checks:
            if n == name:
                return ok, margin
        raise KeyError(name)

    def merged(self, other):
        return ValidationReport(list(self.checks) + list(other.checks))

    def to_dict(self):
        return {
            "overall": self.overall,
            "checks": [
                {"name": n, "passed": bool(ok), "margin": float(m)}
                for n, ok, m in self.checks
            ],
        }


def laplacian(n, kind="open-chain"):
    """Nearest-neighbour graph Laplacian of an open chain or a ring.

    A ring of two particles has a single bond, the same as the open chain.
    """
    lap = np.zeros((n, n))
    bonds = {(i, i + 1) for i in range(n - 1)}
    if kind == "ring" and n > 2:
        bonds.add((0, n - 1))
    elif kind not in ("open-chain", "ring"):
        raise InvalidParameterError(f"unknown chain kind {kind!r}")
    for i, j in bonds:
        lap[i, i] += 1.0
        lap[j, j] += 1.0
        lap[i, j] -= 1.0
        lap[j, i] -= 1.0
    return lap


def build_standard_model(
    kind="open-chain",
    n=2,
    w=1.0,
    kappa=1.0,
    k_shape="uniform",
    mass=1.0,
    hbar=1.0,
    lam=0.0,
    coeffs=(1.0,),
):
    """Convenience constructor: Laplacian ``W`` and uniform or diagonal ``K``."""
    if n < 1:
        raise InvalidParameterError("N must be >= 1")
    if not w > 0:
        raise InvalidParameterError("w must be positive")
    if not kappa > 0:
        raise InvalidParameterError("kappa must be positive")
    W = w * laplacian(n, kind)
    if k_shape == "uniform":
        K = np.full((n, n), kappa / n)
    elif k_shape == "diagonal":
        K = kappa * np.eye(n)
    else:
        raise InvalidParameterError(f"unknown k_shape {k_shape!r}")
    return ChainModel(n, mass, hbar, lam, W, K, tuple(coeffs))


def m_diagonal(K):
    """Row sums of ``K``, i.e. the diagonal of ``M``."""
    return np.asarray(K, dtype=float).sum(axis=1)


def _relative_asymmetry(a):
    scale = max(np.max(np.abs(a)), 1.0)
    return float(np.max(np.abs(a - a.T)) / scale)


def validate(model):
    """Check translation invariance, boundedness and coefficient signs.

    Failures are reported in the returned :class:`ValidationReport`, never
    raised.  Margins are signed: positive means the check passed by that
    much (for eigenvalue checks, the smallest relevant eigenvalue).
    """
    W, K = model.W, model.K
    n = model.n_particles
    checks = []

    asym_w = _relative_asymmetry(W)
    checks.append(("w_symmetric", asym_w <= SYMMETRY_TOL, SYMMETRY_TOL - asym_w))
    asym_k = _relative_asymmetry(K)
    checks.append(("k_symmetric", asym_k <= SYMMETRY_TOL, SYMMETRY_TOL - asym_k))

    scale = max(np.max(np.abs(W)), np.max(np.abs(K)), 1e-300)
    rowsum = float(np.max(np.abs(W @ np.ones(n)))) / scale
    checks.append(("translation_invariance", rowsum <= ROWSUM_TOL, ROWSUM_TOL - rowsum))

    kmin = float(K.min())
    checks.append(("k_nonnegative", kmin >= 0.0, kmin))

    M = np.diag(m_diagonal(K))
    ev_w = np.linalg.eigvalsh(symmetrize(W))
    ev_s = np.linalg.eigvalsh(symmetrize(W + M - K))
    ev_d = np.linalg.eigvalsh(symmetrize(W + M + K))
    # one scale for all sectors: the largest curvature in the system
    escale = max(np.abs(ev_w).max(), np.abs(ev_s).max(), np.abs(ev_d).max())
    tol = ZERO_MODE_RTOL * escale

    def single_zero_mode(name, ev):
        zeros = int(np.sum(np.abs(ev) <= tol))
        nonzero = ev[np.abs(ev) > tol]
        lowest = float(nonzero.min()) if len(nonzero) else np.inf
        ok = zeros == 1 and lowest > 0
        margin = lowest if zeros == 1 else -abs(zeros - 1)
        checks.append((name, bool(ok), margin if np.isfinite(margin) else 0.0))

    single_zero_mode("w_psd_single_zero_mode", ev_w)
    single_zero_mode("v_s_psd_single_zero_mode", ev_s)
    checks.append(("v_d_positive_definite", bool(ev_d.min() > tol), float(ev_d.min())))

    coeffs = np.asarray(model.anharmonic_coeffs, dtype=float)
    cmin = float(coeffs.min()) if len(coeffs) else 0.0
    checks.append(("coeffs_nonnegative", cmin >= 0.0, cmin))
    if model.lam > 0:
        cmax = float(coeffs.max()) if len(coeffs) else 0.0
        checks.append(("coeffs_nonzero_with_lambda", cmax > 0.0, cmax))

    return ValidationReport(checks)


def eval_f(model_or_coeffs, z):
    """``f(z) = sum_n f_n z**(2n)``, ``n`` starting at 2."""
    coeffs = _coeffs(model_or_coeffs)
    z2 = np.asarray(z, dtype=float) ** 2
    out = np.zeros_like(z2)
    for n, fn in enumerate(coeffs, start=2):
        out = out + fn * z2 ** n
    return out if out.ndim else float(out)


def eval_f_second_derivative(model_or_coeffs, z):
    coeffs = _coeffs(model_or_coeffs)
    z2 = np.asarray(z, dtype=float) ** 2
    out = np.zeros_like(z2)
    for n, fn in enumerate(coeffs, start=2):
        out = out + 2 * n * (2 * n - 1) * fn * z2 ** (n - 1)
    return out if out.ndim else float(out)


def _coeffs(model_or_coeffs):
    if isinstance(model_or_coeffs, ChainModel):
        return model_or_coeffs.anharmonic_coeffs
    return tuple(model_or_coeffs)
