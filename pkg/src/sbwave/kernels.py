"""Hot inner loops with a numba path and a pure-numpy path.

Every kernel exists twice: ``<name>_loop`` is an explicit loop that numba
compiles, ``<name>_numpy`` is the vectorized fallback.  The unsuffixed name is
whichever one :mod:`sbwave._accel` selected at import time.  Both are always
importable so the benchmark and the tests can compare them.
"""
import numpy as np
from scipy.linalg import solve_banded

from ._accel import HAVE_NUMBA, jit

# Replaces an exactly-zero pivot in the Sturm recurrence.
_PIVMIN = 1e-300


# --------------------------------------------------------------------------
# Sturm counts for a symmetric tridiagonal pencil (A, B), B positive definite
#
# The LDL^T pivots of A - x B carry the inertia of the pencil: the number of
# negative pivots equals the number of eigenvalues of B^{-1} A below x.
# A plain matrix is the pencil with B = I (mdiag = 1, moff = 0).
# --------------------------------------------------------------------------

@jit
def sturm_count_loop(diag, off, mdiag, moff, shifts):
    """Number of pencil eigenvalues strictly below each shift."""
    n = diag.shape[0]
    out = np.empty(shifts.shape[0], dtype=np.int64)
    for s in range(shifts.shape[0]):
        x = shifts[s]
        count = 0
        q = diag[0] - x * mdiag[0]
        if q == 0.0:
            q = -_PIVMIN
        if q < 0.0:
            count += 1
        for i in range(1, n):
            e = off[i - 1] - x * moff[i - 1]
            q = diag[i] - x * mdiag[i] - e * e / q
            if q == 0.0:
                q = -_PIVMIN
            if q < 0.0:
                count += 1
        out[s] = count
    return out


def sturm_count_numpy(diag, off, mdiag, moff, shifts):
    x = np.asarray(shifts, dtype=float)
    q = diag[0] - x * mdiag[0]
    q[q == 0.0] = -_PIVMIN
    count = (q < 0.0).astype(np.int64)
    for i in range(1, diag.shape[0]):
        e = off[i - 1] - x * moff[i - 1]
        q = diag[i] - x * mdiag[i] - e * e / q
        q[q == 0.0] = -_PIVMIN
        count += q < 0.0
    return count


def gershgorin(diag, off):
    r = np.zeros_like(diag)
    r[:-1] += np.abs(off)
    r[1:] += np.abs(off)
    return float(np.min(diag - r)), float(np.max(diag + r))


def pencil_bounds(diag, off, mdiag, moff):
    """An interval containing every eigenvalue of the pencil."""
    lo, hi = gershgorin(diag, off)
    blo, bhi = gershgorin(mdiag, moff)
    if blo <= 0:
        raise ValueError("mass matrix is not diagonally dominant positive definite")
    return min(lo / blo, lo / bhi), max(hi / blo, hi / bhi)


@jit
def bisect_lowest_loop(diag, off, mdiag, moff, k, lo, hi, tol):
    n = diag.shape[0]
    vals = np.empty(k)
    for j in range(k):
        a = lo
        b = hi
        while b - a > tol:
            m = 0.5 * (a + b)
            count = 0
            q = diag[0] - m * mdiag[0]
            if q == 0.0:
                q = -_PIVMIN
            if q < 0.0:
                count += 1
            for i in range(1, n):
                e = off[i - 1] - m * moff[i - 1]
                q = diag[i] - m * mdiag[i] - e * e / q
                if q == 0.0:
                    q = -_PIVMIN
                if q < 0.0:
                    count += 1
            if count > j:
                b = m
            else:
                a = m
        vals[j] = 0.5 * (a + b)
        lo = a
    return vals


def bisect_lowest_numpy(diag, off, mdiag, moff, k, lo, hi, tol):
    a = np.full(k, lo)
    b = np.full(k, hi)
    idx = np.arange(k)
    while np.max(b - a) > tol:
        m = 0.5 * (a + b)
        below = sturm_count_numpy(diag, off, mdiag, moff, m) > idx
        b = np.where(below, m, b)
        a = np.where(below, a, m)
    return 0.5 * (a + b)


# --------------------------------------------------------------------------
# Tridiagonal solve (inverse iteration, bordered systems)
# --------------------------------------------------------------------------

@jit
def tridiag_solve_loop(diag, off, rhs):
    """Solve ``T x = rhs`` for symmetric tridiagonal ``T``; LU with partial pivoting (gttrf order)."""
    n = diag.shape[0]
    d = diag.copy()
    dl = off.copy()
    du = off.copy()
    du2 = np.zeros(max(n - 2, 0))
    b = rhs.copy()
    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] == 0.0:
                d[i] = _PIVMIN
            f = dl[i] / d[i]
            d[i + 1] -= f * du[i]
            b[i + 1] -= f * b[i]
        else:
            f = d[i] / dl[i]
            d[i] = dl[i]
            tmp = du[i]
            du[i] = d[i + 1]
            d[i + 1] = tmp - f * d[i + 1]
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -f * du[i + 1]
            tb = b[i]
            b[i] = b[i + 1]
            b[i + 1] = tb - f * b[i + 1]
    if d[n - 1] == 0.0:
        d[n - 1] = _PIVMIN
    x = np.empty(n)
    x[n - 1] = b[n - 1] / d[n - 1]
    if n > 1:
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i]
    return x


def tridiag_solve_numpy(diag, off, rhs):
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    return solve_banded((1, 1), ab, rhs, check_finite=False)


# --------------------------------------------------------------------------
# Pointwise nonlinear phase rotation of the Schroedinger field
# --------------------------------------------------------------------------

@jit
def phase_rotate_loop(eps, n, gamma, tau):
    """Return ``eps * exp(-i (n + gamma |eps|^2) tau)``."""
    out = np.empty_like(eps)
    for j in range(eps.shape[0]):
        e = eps[j]
        theta = (n[j] + gamma * (e.real * e.real + e.imag * e.imag)) * tau
        c = np.cos(theta)
        s = np.sin(theta)
        out[j] = complex(e.real * c + e.imag * s, e.imag * c - e.real * s)
    return out


def phase_rotate_numpy(eps, n, gamma, tau):
    return eps * np.exp(-1j * (n + gamma * (eps.real**2 + eps.imag**2)) * tau)


if HAVE_NUMBA:
    sturm_count = sturm_count_loop
    bisect_lowest = bisect_lowest_loop
    tridiag_solve = tridiag_solve_loop
    phase_rotate = phase_rotate_loop
else:
    sturm_count = sturm_count_numpy
    bisect_lowest = bisect_lowest_numpy
    tridiag_solve = tridiag_solve_numpy
    phase_rotate = phase_rotate_numpy
