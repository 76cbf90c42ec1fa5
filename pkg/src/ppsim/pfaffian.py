"""Pfaffians of complex antisymmetric matrices.

The kernel is a skew-symmetric Gaussian elimination with partial pivoting
(Parlett-Reid family), O(n^3).  Hole punching never materialises the minors
on the Python side: :func:`pfaffian_masked` gathers the surviving rows and
columns of a shared base matrix directly into the work buffer.
"""
import numpy as np
from numba import njit

SKEW_TOL = 1e-12
PIVOT_RTOL = 1e-13


class NumericInputError(ValueError):
    pass


def as_skew(m, tol=SKEW_TOL):
    """Validate ``m`` as an even-dimensional antisymmetric matrix."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] % 2:
        raise ValueError(f"skew matrix must have even dimension, got {m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise NumericInputError("matrix has non-finite entries")
    if m.size and np.max(np.abs(m + m.T)) > tol:
        raise ValueError("matrix is not antisymmetric")
    return m


@njit(cache=True, nogil=True)
def _pf_inplace(a, tol):
    n = a.shape[0]
    if n % 2:
        return 0j
    pf = 1.0 + 0j
    for k in range(0, n - 1, 2):
        kp = k + 1
        best = abs(a[k + 1, k])
        for i in range(k + 2, n):
            v = abs(a[i, k])
            if v > best:
                best = v
                kp = i
        if best <= tol:
            return 0j
        if kp != k + 1:
            for j in range(n):
                t = a[k + 1, j]
                a[k + 1, j] = a[kp, j]
                a[kp, j] = t
            for i in range(n):
                t = a[i, k + 1]
                a[i, k + 1] = a[i, kp]
                a[i, kp] = t
            pf = -pf
        piv = a[k, k + 1]
        pf *= piv
        if k + 2 < n:
            # a[k+2:, k+2:] += tau (x) a[k+2:, k+1] - a[k+2:, k+1] (x) tau
            tau = a[k, k + 2:] / piv
            u = a[k + 2:, k + 1].copy()
            r = n - k - 2
            for i in range(r):
                ti = tau[i]
                ui = u[i]
                for j in range(r):
                    a[k + 2 + i, k + 2 + j] += ti * u[j] - ui * tau[j]
    return pf


@njit(cache=True, nogil=True)
def _pf_gather(base, keep, tol):
    d = keep.shape[0]
    work = np.empty((d, d), dtype=np.complex128)
    for i in range(d):
        ki = keep[i]
        for j in range(d):
            work[i, j] = base[ki, keep[j]]
    return _pf_inplace(work, tol)


@njit(cache=True, nogil=True)
def _pf_gather_batch(base, keeps, tol):
    out = np.empty(keeps.shape[0], dtype=np.complex128)
    for b in range(keeps.shape[0]):
        out[b] = _pf_gather(base, keeps[b], tol)
    return out


def _tol(m):
    return PIVOT_RTOL * (float(np.max(np.abs(m))) if m.size else 0.0)


def pfaffian(m):
    """Pfaffian of an antisymmetric matrix; ``pf`` of the 0x0 matrix is 1."""
    m = as_skew(m)
    if m.shape[0] == 0:
        return 1.0 + 0j
    return complex(_pf_inplace(m.copy(), _tol(m)))


def pfaffian_masked(base, keep, tol=None):
    """Pfaffian of the principal submatrix of ``base`` on indices ``keep``.

    ``base`` is trusted to be antisymmetric (it is read, never written).
    """
    keep = np.ascontiguousarray(keep, dtype=np.int64)
    if keep.size == 0:
        return 1.0 + 0j
    if tol is None:
        tol = _tol(base)
    return complex(_pf_gather(base, keep, tol))


def pfaffian_batch(base, keeps, tol=None):
    """Pfaffians of many equal-size principal minors, one per row of ``keeps``."""
    keeps = np.ascontiguousarray(keeps, dtype=np.int64)
    if keeps.ndim != 2:
        raise ValueError("keeps must be 2-D (batch, minor dimension)")
    if keeps.shape[1] == 0:
        return np.ones(keeps.shape[0], dtype=np.complex128)
    if tol is None:
        tol = _tol(base)
    return _pf_gather_batch(base, keeps, tol)


def delete_modes(m, modes):
    """Principal submatrix of ``m`` with the rows/columns in ``modes`` removed."""
    m = np.asarray(m)
    n = m.shape[0]
    modes = np.asarray(sorted(set(int(i) for i in modes)), dtype=np.int64)
    if modes.size and (modes[0] < 0 or modes[-1] >= n):
        raise IndexError(f"mode index out of range for dimension {n}")
    keep = np.setdiff1d(np.arange(n), modes)
    return m[np.ix_(keep, keep)].copy()


def pfaffian_bruteforce(m):
    """Sum over perfect matchings; exponential, reference use only."""
    m = np.asarray(m, dtype=np.complex128)
    n = m.shape[0]
    if n % 2:
        return 0j

    def rec(idx):
        if not idx:
            return 1.0 + 0j
        first, rest = idx[0], idx[1:]
        total = 0j
        for pos, j in enumerate(rest):
            sign = -1.0 if pos % 2 else 1.0
            total += sign * m[first, j] * rec(rest[:pos] + rest[pos + 1:])
        return total

    return rec(tuple(range(n)))
