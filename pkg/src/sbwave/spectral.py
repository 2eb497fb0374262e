"""Linearized operators around the wave and the second-variation quadratic form.

Two discretizations live here, on purpose:

* ``assemble_operator`` builds a Dirichlet tridiagonal pencil used for
  eigenvalues.  Both matrices are symmetric tridiagonal and the mass matrix is
  positive definite, so Sturm counts certify how many eigenvalues sit below a
  shift.
* ``apply_operator`` and the quadratic forms use spectral derivatives on the
  periodic grid.  They are exact up to truncation and are what the kernel
  identities and the form equality are checked with.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import kernels
from .errors import ConvergenceError, DegenerateConstraints
from .io import dumps
from .grid import Grid
from .waveforms import Profile

NEGATIVE_TOL = 1e-8
ZERO_TOL = 1e-8
BISECT_TOL = 1e-12


class OpKind(str, enum.Enum):
    L1 = "L1"
    L2 = "L2"
    L3 = "L3"


def _coefficients(kind, profile: Profile, fields=None):
    """``(c, const, potential)`` for ``-c d^2/dx^2 + const + potential(x)``."""
    kind = OpKind(kind)
    phys, s = profile.phys, profile.scales
    e, n = fields if fields is not None else (profile.eps_hat, profile.n)
    e2 = e**2
    if kind is OpKind.L1:
        return 2.0, 2.0 * s.sigma, 2.0 * n + (6.0 * phys.gamma - 4.0 / s.eta) * e2
    if kind is OpKind.L2:
        return 2.0, 2.0 * s.sigma, 2.0 * n + 2.0 * phys.gamma * e2
    return phys.alpha, 4.0 * phys.alpha * s.sigma, 2.0 * phys.beta * n


def essential_edge(kind, profile: Profile) -> float:
    kind = OpKind(kind)
    if kind is OpKind.L3:
        return 4.0 * profile.phys.alpha * profile.scales.sigma
    return 2.0 * profile.scales.sigma


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    """Symmetric tridiagonal pencil ``(A, B)`` on the interior points of ``grid``.

    ``diag``/``offdiag`` hold ``A``; ``mass_diag``/``mass_off`` hold ``B``.
    For ``scheme="fd2"`` ``B`` is the identity and ``A = -c D2 + const +
    potential``.  For ``scheme="numerov"`` ``B = I + D2 h^2/12`` and ``A`` is
    the symmetrized Numerov stiffness, fourth-order accurate.  Homogeneous
    Dirichlet values sit at ``x_0 = -L`` and the virtual point ``x_N = +L``.
    ``grid`` may be a refinement of the profile grid (``source_grid``).
    """

    kind: OpKind
    diag: np.ndarray
    offdiag: np.ndarray
    mass_diag: np.ndarray
    mass_off: np.ndarray
    spacing: float
    essential_edge: float
    potential: np.ndarray = field(repr=False)
    grid: Grid = field(repr=False)
    source_grid: Grid = field(repr=False)
    scheme: str = "numerov"

    @property
    def size(self):
        return self.diag.shape[0]

    @property
    def x(self):
        return self.grid.x[1:]

    def matvec(self, f):
        out = self.diag * f
        out[:-1] += self.offdiag * f[1:]
        out[1:] += self.offdiag * f[:-1]
        return out

    def massvec(self, f):
        out = self.mass_diag * f
        out[:-1] += self.mass_off * f[1:]
        out[1:] += self.mass_off * f[:-1]
        return out

    def dense(self):
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def dense_mass(self):
        return np.diag(self.mass_diag) + np.diag(self.mass_off, 1) + np.diag(self.mass_off, -1)

    def shifted(self, mu):
        """Diagonal and off-diagonal of ``A - mu B``."""
        return self.diag - mu * self.mass_diag, self.offdiag - mu * self.mass_off

    def restrict(self, f):
        """Grid function -> interior vector, interpolating from the profile grid if needed."""
        f = np.asarray(f)
        if f.shape[0] == self.grid.n_points:
            return f[1:]
        factor = self.grid.n_points // self.source_grid.n_points
        return self.source_grid.interpolate(f, factor)[1:]

    @staticmethod
    def embed(vec):
        return np.concatenate(([0.0], vec))


def assemble_operator(kind, profile: Profile, scheme: str = "numerov", refine: int | None = None) -> DiscretizedOperator:
    """Dirichlet discretization of L1, L2 or L3 around ``profile``.

    ``refine`` (default 4 for Numerov, 1 for ``fd2``) resamples the profile
    spectrally onto a grid that many times finer before assembly.
    """
    if scheme not in ("numerov", "fd2"):
        raise ValueError(f"unknown scheme {scheme!r}")
    if refine is None:
        refine = 4 if scheme == "numerov" else 1
    src = profile.grid
    grid = src.refined(refine) if refine > 1 else src
    if refine > 1:
        fields = (src.interpolate(profile.eps_hat, refine), src.interpolate(profile.n, refine))
    else:
        fields = (profile.eps_hat, profile.n)
    c, const, pot = _coefficients(kind, profile, fields)
    h = grid.spacing
    pot_in = pot[1:]
    m = pot_in.shape[0]
    if scheme == "fd2":
        diag = 2.0 * c / h**2 + const + pot_in
        off = np.full(m - 1, -c / h**2)
        mdiag, moff = np.ones(m), np.zeros(m - 1)
    else:
        wv = const + pot_in
        diag = 2.0 * c / h**2 + wv * (10.0 / 12.0)
        off = -c / h**2 + (wv[:-1] + wv[1:]) / 24.0
        mdiag, moff = np.full(m, 10.0 / 12.0), np.full(m - 1, 1.0 / 12.0)
    return DiscretizedOperator(OpKind(kind), diag, off, mdiag, moff, h, essential_edge(kind, profile),
                               pot_in, grid, src, scheme)


def apply_operator(kind, profile: Profile, f):
    """Spectral action of L1, L2 or L3 on a full-grid function."""
    c, const, pot = _coefficients(kind, profile)
    return -c * profile.grid.diff(f, 2) + (const + pot) * f


# ---------------------------------------------------------------------------
# Eigenvalues
# ---------------------------------------------------------------------------

def _bounds(op):
    return kernels.pencil_bounds(op.diag, op.offdiag, op.mass_diag, op.mass_off)


def eigen_lowest(op: DiscretizedOperator, k: int = 1, max_sweeps: int = 100):
    """The ``k`` smallest eigenpairs, ascending.

    Eigenvalues come from Sturm bisection to ``1e-12`` absolute; vectors from
    inverse iteration at the converged shift, normalized to unit discrete L2
    norm (weight ``h``) with a positive largest component.
    """
    if not 1 <= k <= 10:
        raise ValueError("k must be in 1..10")
    lo, hi = _bounds(op)
    vals = kernels.bisect_lowest(op.diag, op.offdiag, op.mass_diag, op.mass_off, k, lo - 1.0, hi + 1.0, BISECT_TOL)
    h = op.spacing
    rng = np.random.default_rng(12345)
    scale = max(abs(lo), abs(hi), 1.0)
    vecs = []
    for lam in vals:
        d, e = op.shifted(lam + 1e-13 * scale)
        x = rng.standard_normal(op.size)
        for _ in range(max_sweeps):
            y = kernels.tridiag_solve(d, e, op.massvec(x))
            # B-orthogonalize against the vectors already found
            for u in vecs:
                y -= (u @ op.massvec(y)) / (u @ op.massvec(u)) * u
            y /= math.sqrt(h * (y @ y))
            res = op.matvec(y) - lam * op.massvec(y)
            if math.sqrt(h * (res @ res)) < 1e-8 * scale:
                break
            x = y
        else:
            raise ConvergenceError(f"inverse iteration for eigenvalue {lam:.6g} did not converge")
        if y[np.argmax(np.abs(y))] < 0:
            y = -y
        vecs.append(y)
    return [(float(lam), vec) for lam, vec in zip(vals, vecs)]


def count_below(op: DiscretizedOperator, shift: float) -> int:
    return int(kernels.sturm_count(op.diag, op.offdiag, op.mass_diag, op.mass_off, np.array([float(shift)]))[0])


def negative_eigenvalue_count(op: DiscretizedOperator, tol: float = NEGATIVE_TOL) -> int:
    """Eigenvalues below ``-tol``; the band ``[-tol, tol]`` counts as numerically zero."""
    return count_below(op, -tol)


def kernel_residuals(profile: Profile):
    """Relative residuals ``|L1 e_x|/|e_x|``, ``|L2 e|/|e|``, ``|L3 n_x|/|n_x|``.

    A nonzero-vector norm of zero (e.g. the zero profile) gives ``0``.
    """
    g = profile.grid
    e, n = profile.eps_hat, profile.n
    e_x = g.diff(e)
    n_x = g.diff(n)
    out = []
    for kind, f in ((OpKind.L1, e_x), (OpKind.L2, e), (OpKind.L3, n_x)):
        nf = g.norm(f)
        out.append(g.norm(apply_operator(kind, profile, f)) / nf if nf > 0 else 0.0)
    return tuple(out)


def _constraint_matrix(op, constraints):
    C = np.column_stack([op.restrict(f) for f in constraints]).astype(float)
    C /= np.linalg.norm(C, axis=0)
    if np.linalg.cond(C.T @ C) > 1e12:
        raise DegenerateConstraints("constraint Gram matrix is numerically singular")
    Q, _ = np.linalg.qr(C)
    return Q


def constrained_count_below(op: DiscretizedOperator, Q, mu: float) -> int:
    """Eigenvalues below ``mu`` of the pencil restricted to ``{u : Q^T u = 0}``.

    Inertia of the bordered matrix ``[[A - mu B, Q], [Q^T, 0]]`` equals the
    restricted inertia plus ``m`` positive and ``m`` negative values; Haynsworth
    additivity splits it into the inertia of ``A - mu B`` and of the Schur
    complement ``-Q^T (A - mu B)^{-1} Q``.
    """
    d, e = op.shifted(mu)
    neg = int(kernels.sturm_count(d, e, np.ones_like(d), np.zeros_like(e), np.zeros(1))[0])
    Y = np.column_stack([kernels.tridiag_solve(d, e, Q[:, j].copy()) for j in range(Q.shape[1])])
    S = Q.T @ Y
    pos_s = int(np.sum(np.linalg.eigvalsh(0.5 * (S + S.T)) > 0))
    return neg + pos_s - Q.shape[1]


def constrained_lowest(op: DiscretizedOperator, constraints, tol: float = 1e-10) -> float:
    """Smallest eigenvalue of the operator on the orthogonal complement of ``constraints``.

    ``constraints`` are grid functions (profile grid or operator grid).  The
    value is bracketed by bisection on :func:`constrained_count_below`.
    """
    Q = _constraint_matrix(op, constraints)
    lo, hi = _bounds(op)
    lo -= 1.0
    hi += 1.0
    while hi - lo > tol * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        if constrained_count_below(op, Q, mid) >= 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def constrained_lowest_dense(op: DiscretizedOperator, constraints) -> float:
    """Dense oracle: deflate the constraint span and solve the projected pencil.

    ``Z`` spans the complement of an orthonormalized constraint basis; the
    answer is the smallest eigenvalue of ``(Z^T A Z, Z^T B Z)``.  Cubic cost.
    """
    Q = _constraint_matrix(op, constraints)
    Z = scipy.linalg.null_space(Q.T)
    A = Z.T @ (op.dense() @ Z)
    B = Z.T @ (op.dense_mass() @ Z)
    w = scipy.linalg.eigh(0.5 * (A + A.T), 0.5 * (B + B.T), eigvals_only=True, subset_by_index=[0, 0])
    return float(w[0])


# ---------------------------------------------------------------------------
# Second variation
# ---------------------------------------------------------------------------

def hform_direct(psi, profile: Profile) -> float:
    """``<H psi, psi>`` assembled from the full block operator.

    ``psi = (psi1, psi2, dpsi3)`` with ``dpsi3`` the derivative of the third
    component; the third row is integrated by parts once.
    """
    p1, p2, dp3 = psi
    g = profile.grid
    phys, wave = profile.phys, profile.wave
    eps, n = profile.eps, profile.n
    v, omega = wave.v, wave.omega
    rho = np.abs(eps) ** 2
    h1 = (
        -2.0 * g.diff(p1, 2)
        + 2.0 * n * p1
        + 2.0 * phys.gamma * (2.0 * rho * p1 + eps * eps * np.conj(p1))
        + 2j * v * g.diff(p1)
        - 2.0 * omega * p1
        + 2.0 * eps * p2
    )
    h2 = 2.0 * np.real(np.conj(eps) * p1) + 2.0 * phys.beta * n * p2 - phys.alpha * g.diff(p2, 2) + p2 + v * dp3
    return g.inner(h1, p1) + g.inner(h2, p2) + g.integrate(v * p2 * dp3 + dp3 * dp3)


def hform_parts(parts, profile: Profile):
    """The five terms of the completed-square form of ``<H psi, psi>``.

    ``parts = (y1, y2, z2, dz3)`` where ``psi1 = exp(i v x / 2) (y1 + i y2)``.
    Returns ``(<L1 y1,y1>, <L2 y2,y2>, <L3 z2,z2>, |v z2 + dz3|^2, |2 e y1/sqrt(eta) + sqrt(eta) z2|^2)``.
    """
    y1, y2, z2, dz3 = parts
    g = profile.grid
    eta = profile.scales.eta
    e = profile.eps_hat
    sq1 = profile.wave.v * z2 + dz3
    sq2 = 2.0 * e * y1 / math.sqrt(eta) + math.sqrt(eta) * z2
    return (
        g.inner(apply_operator(OpKind.L1, profile, y1), y1),
        g.inner(apply_operator(OpKind.L2, profile, y2), y2),
        g.inner(apply_operator(OpKind.L3, profile, z2), z2),
        g.integrate(sq1 * sq1),
        g.integrate(sq2 * sq2),
    )


def hform_decomposed(parts, profile: Profile) -> float:
    return float(sum(hform_parts(parts, profile)))


def decompose(psi, profile: Profile):
    """``(psi1, psi2, dpsi3) -> (y1, y2, z2, dz3)``."""
    p1, p2, dp3 = psi
    z1 = np.exp(-1j * profile.scales.q * profile.grid.x) * p1
    return z1.real.copy(), z1.imag.copy(), np.asarray(p2, float), np.asarray(dp3, float)


def compose(parts, profile: Profile):
    y1, y2, z2, dz3 = parts
    return np.exp(1j * profile.scales.q * profile.grid.x) * (y1 + 1j * y2), z2, dz3


def x_norm_sq(psi, profile: Profile) -> float:
    """Squared X-norm with the third component measured through its derivative."""
    p1, p2, dp3 = psi
    g = profile.grid
    return g.h1_norm(p1) ** 2 + g.h1_norm(p2) ** 2 + g.norm(dp3) ** 2


# -- distinguished directions --------------------------------------------------

def psi_minus(profile: Profile):
    """Negative direction ``(e^2, 0, 2 n e, -v 2 n e)`` in decomposed coordinates."""
    e, n = profile.eps_hat, profile.n
    z2 = 2.0 * n * e
    return e**2, np.zeros_like(e), z2, -profile.wave.v * z2


def psi_minus_value(profile: Profile) -> float:
    """``-6 sigma |e^2|^2 - 5 alpha sigma |2 n e|^2``."""
    g = profile.grid
    s = profile.scales.sigma
    e, n = profile.eps_hat, profile.n
    return -6.0 * s * g.norm(e**2) ** 2 - 5.0 * profile.phys.alpha * s * g.norm(2.0 * n * e) ** 2


def translation_mode(profile: Profile):
    """``T1'(0) Phi = (-eps_x, -n_x, -phi_x)`` with the last entry given as ``-(phi_x)_x = -w_x``."""
    g = profile.grid
    return -g.diff(profile.eps), -g.diff(profile.n), -g.diff(profile.w)


def phase_mode(profile: Profile):
    z = np.zeros(profile.grid.n_points)
    return -1j * profile.eps, z, z


def project_to_p(parts, profile: Profile):
    """Project ``(y1, y2, z2, dz3)`` onto the complement used for coercivity.

    Enforces ``<y1,e^2> + <z2,2ne> = 0``, ``<y1,e_x> + <z2,n_x> = 0`` and
    ``<y2,e> = 0`` in the discrete L2 pairing; ``dz3`` is left unchanged.
    """
    y1, y2, z2, dz3 = (np.array(a, dtype=float) for a in parts)
    g = profile.grid
    e, n = profile.eps_hat, profile.n
    dirs = [(e**2, 2.0 * n * e), (g.diff(e), g.diff(n))]
    G = np.array([[g.inner(a1, b1) + g.inner(a2, b2) for (b1, b2) in dirs] for (a1, a2) in dirs])
    rhs = np.array([g.inner(y1, a1) + g.inner(z2, a2) for (a1, a2) in dirs])
    coef = np.linalg.solve(G, rhs)
    for c, (a1, a2) in zip(coef, dirs):
        y1 -= c * a1
        z2 -= c * a2
    y2 -= g.inner(y2, e) / g.inner(e, e) * e
    return y1, y2, z2, dz3


def random_smooth(grid, rng, width, n_bumps=4, complex_=False):
    """Sum of modulated Gaussians centred within a few ``width`` of the origin."""
    x = grid.x
    f = np.zeros(x.shape, complex if complex_ else float)
    for _ in range(n_bumps):
        c = rng.uniform(-4.0, 4.0) * width
        s = rng.uniform(0.5, 3.0) * width
        k = rng.uniform(0.0, 2.0) / width
        th = rng.uniform(0.0, 2.0 * np.pi)
        amp = rng.standard_normal() + (1j * rng.standard_normal() if complex_ else 0.0)
        f = f + amp * np.exp(-(((x - c) / s) ** 2)) * np.cos(k * x + th)
    return f


def random_parts(profile: Profile, rng):
    width = 1.0 / math.sqrt(profile.scales.sigma)
    g = profile.grid
    return tuple(random_smooth(g, rng, width) for _ in range(4))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class SpectralReport:
    kind: OpKind
    eigenvalues: list
    negative_count: int
    kernel_residual: float
    essential_edge: float

    @property
    def numerically_zero(self):
        return [lam for lam in self.eigenvalues if abs(lam) <= ZERO_TOL]

    def to_record(self):
        return {
            "kind": self.kind.value,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "negative_count": int(self.negative_count),
            "kernel_residual": float(self.kernel_residual),
            "essential_edge": float(self.essential_edge),
        }


def spectral_reports(profile: Profile, k: int = 3):
    res = kernel_residuals(profile)
    out = []
    for kind, r in zip(OpKind, res):
        op = assemble_operator(kind, profile)
        vals = [lam for lam, _ in eigen_lowest(op, k)]
        out.append(SpectralReport(kind, vals, negative_eigenvalue_count(op), r, op.essential_edge))
    return out


def write_reports_jsonl(reports, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rep in reports:
            fh.write(dumps(rep.to_record()) + "\n")


@dataclass
class NegativeIndexCertificate:
    """Evidence that the second variation has exactly one negative direction."""

    psi_minus_form: float
    psi_minus_expected: float
    coercivity_min: float
    kernel_residuals: tuple
    kernel_forms: tuple
    n_samples: int

    @property
    def n_h(self):
        ok = (
            self.psi_minus_form < 0
            and self.coercivity_min >= 1e-3
            and max(self.kernel_residuals) <= 1e-6
        )
        return 1 if ok else None


def certify_negative_index(profile: Profile, n_samples: int = 200, seed: int = 0) -> NegativeIndexCertificate:
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(n_samples):
        parts = project_to_p(random_parts(profile, rng), profile)
        psi = compose(parts, profile)
        ratios.append(hform_direct(psi, profile) / x_norm_sq(psi, profile))
    kf = (hform_direct(translation_mode(profile), profile), hform_direct(phase_mode(profile), profile))
    return NegativeIndexCertificate(
        psi_minus_form=hform_direct(compose(psi_minus(profile), profile), profile),
        psi_minus_expected=psi_minus_value(profile),
        coercivity_min=float(min(ratios)),
        kernel_residuals=kernel_residuals(profile),
        kernel_forms=kf,
        n_samples=n_samples,
    )
