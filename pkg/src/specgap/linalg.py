"""Eigensolver for Jacobi (symmetric tridiagonal) matrices.

The production path is Sturm-sequence bisection for eigenvalues followed by
inverse iteration for eigenvectors. ``dense_oracle_spectrum`` is an
independent implicit-QL solver used only to cross-check the production path.

A :class:`JacobiMatrix` stores the *magnitudes* of its couplings. The matrix
it represents carries them with a minus sign::

    T[i, i] = diag[i],   T[i, i+1] = T[i+1, i] = -offdiag[i]

which is the sign pattern of a graph Laplacian plus potential. With this
convention the ground state is strictly positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

EPS = float(np.finfo(float).eps)
TINY = float(np.finfo(float).tiny)

MAX_BISECTIONS = 200
MAX_INVERSE_ITERATIONS = 5
MAX_SHIFT_RETRIES = 3
ORACLE_MAX_DIM = 64
DEFAULT_RESIDUAL_TOL = 1e-12
# Eigenvalues closer than this (relative to ||J||) are treated as a cluster
# and their vectors are re-orthogonalized.
CLUSTER_RTOL = 1e-3


class EigenSolverError(RuntimeError):
    """Inverse iteration did not reach the residual target."""

    def __init__(self, message: str, best_residual: float) -> None:
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


class OracleSizeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class JacobiMatrix:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self) -> None:
        d = np.array(self.diag, dtype=float).ravel()
        e = np.array(self.offdiag, dtype=float).ravel()
        if d.size < 1:
            raise ValueError("JacobiMatrix needs at least one row")
        if e.size != d.size - 1:
            raise ValueError(f"offdiag has length {e.size}, expected {d.size - 1}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValueError("JacobiMatrix entries must be finite")
        if np.any(e <= 0.0):
            raise ValueError("JacobiMatrix couplings must be strictly positive")
        d.flags.writeable = False
        e.flags.writeable = False
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)
        # plain-float copies for the scalar loops below
        object.__setattr__(self, "_d", d.tolist())
        object.__setattr__(self, "_e", e.tolist())
        object.__setattr__(self, "_e2", (e * e).tolist())
        row = np.abs(d).copy()
        row[:-1] += e
        row[1:] += e
        object.__setattr__(self, "_scale", float(row.max()))

    @property
    def n(self) -> int:
        return self.diag.size

    @property
    def scale(self) -> float:
        """Infinity norm ||J||_inf."""
        return self._scale

    @property
    def residual_scale(self) -> float:
        """||diag||_inf + 2 ||offdiag||_inf, the yardstick for eigenpair residuals."""
        emax = float(self.offdiag.max()) if self.n > 1 else 0.0
        return float(np.abs(self.diag).max()) + 2.0 * emax

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) - np.diag(self.offdiag, 1) - np.diag(self.offdiag, -1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = self.diag * v
        out[:-1] -= self.offdiag * v[1:]
        out[1:] -= self.offdiag * v[:-1]
        return out

    def leading(self, k: int) -> "JacobiMatrix":
        """Leading k x k principal submatrix."""
        if not 1 <= k <= self.n:
            raise ValueError(f"submatrix size {k} out of range 1..{self.n}")
        return JacobiMatrix(self.diag[:k], self.offdiag[: k - 1])

    def shifted(self, c: float) -> "JacobiMatrix":
        return JacobiMatrix(self.diag + c, self.offdiag)

    def gershgorin(self) -> tuple[float, float]:
        r = np.zeros(self.n)
        r[:-1] += self.offdiag
        r[1:] += self.offdiag
        return float((self.diag - r).min()), float((self.diag + r).max())


@dataclass(frozen=True, eq=False)
class EigenPair:
    value: float
    vector: np.ndarray
    residual: float
    index: int


@dataclass(frozen=True, eq=False)
class SpectrumSlice:
    pairs: tuple[EigenPair, ...]
    matrix_dim: int

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.pairs])

    @property
    def vectors(self) -> np.ndarray:
        """Eigenvectors as columns."""
        return np.column_stack([p.vector for p in self.pairs])

    def __len__(self) -> int:
        return len(self.pairs)

    def __getitem__(self, i: int) -> EigenPair:
        return self.pairs[i]


def _pivmin(J: JacobiMatrix) -> float:
    return max(EPS * J.scale, TINY)


def sturm_count(J: JacobiMatrix, x: float) -> int:
    """Number of eigenvalues of ``J`` strictly below ``x``.

    Counts negative pivots of the LDL^T factorization of J - xI. A pivot that
    comes out exactly zero is replaced by a tiny positive value, so an
    eigenvalue sitting exactly at ``x`` is not counted.
    """
    d = J._d
    e2 = J._e2
    pivmin = _pivmin(J)
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin if q < 0.0 else pivmin
    count = 1 if q < 0.0 else 0
    for i in range(1, len(d)):
        q = (d[i] - x) - e2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin if q < 0.0 else pivmin
        if q < 0.0:
            count += 1
    return count


def _bracket(J: JacobiMatrix) -> tuple[float, float]:
    lo, hi = J.gershgorin()
    pad = 2.0 * EPS * max(J.scale, 1.0) + _pivmin(J)
    return lo - pad, hi + pad


def _bisect(J: JacobiMatrix, index: int, lo: float, hi: float, tol: float) -> tuple[float, float]:
    # invariant: sturm_count(lo) <= index < sturm_count(hi)
    for _ in range(MAX_BISECTIONS):
        if hi - lo < tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sturm_count(J, mid) > index:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi), hi - lo


def bisect_eigenvalues(J: JacobiMatrix, k: int, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Lowest ``k`` eigenvalues and the final bracket width of each.

    Bisection stops when the bracket is narrower than ``tol``, when it can no
    longer be split in floating point, or after ``MAX_BISECTIONS`` steps.
    """
    if not 1 <= k <= J.n:
        raise ValueError(f"k={k} out of range 1..{J.n}")
    if tol is None:
        tol = 2.0 * EPS * max(J.scale, TINY)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if J.n == 1:
        return np.array([J._d[0]]), np.zeros(1)
    lo, hi = _bracket(J)
    values = np.empty(k)
    widths = np.empty(k)
    start = lo
    for i in range(k):
        values[i], widths[i] = _bisect(J, i, start, hi, tol)
        # lambda_{i+1} > lambda_i >= start, so start stays a valid lower bound
        start = max(start, values[i] - widths[i])
    return values, widths


def eigenvalues_lowest(J: JacobiMatrix, k: int, tol: float | None = None) -> np.ndarray:
    return bisect_eigenvalues(J, k, tol)[0]


def _sign_normalize(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(v)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def _residual(J: JacobiMatrix, lam: float, v: np.ndarray) -> float:
    return float(np.max(np.abs(J.matvec(v) - lam * v)))


def _flush(q: float, pivmin: float) -> float:
    if abs(q) < pivmin:
        return -pivmin if q < 0.0 else pivmin
    return q


def _twisted_vector(J: JacobiMatrix, sigma: float) -> np.ndarray:
    """One inverse-iteration step with a twisted factorization.

    Solves (J - sigma I) z = gamma_k e_k, where k is the twist index with the
    smallest |gamma_k|. Every component comes out as a product of pivot
    ratios, so exponentially small tails keep their relative accuracy.
    """
    d, e, e2 = J._d, J._e, J._e2
    n = len(d)
    pivmin = _pivmin(J)
    a = [di - sigma for di in d]
    dp = [0.0] * n
    dm = [0.0] * n
    dp[0] = _flush(a[0], pivmin)
    for i in range(1, n):
        dp[i] = _flush(a[i] - e2[i - 1] / dp[i - 1], pivmin)
    dm[n - 1] = _flush(a[n - 1], pivmin)
    for i in range(n - 2, -1, -1):
        dm[i] = _flush(a[i] - e2[i] / dm[i + 1], pivmin)
    k = min(range(n), key=lambda i: abs(dp[i] + dm[i] - a[i]))
    z = [0.0] * n
    z[k] = 1.0
    for i in range(k - 1, -1, -1):
        z[i] = (e[i] / dp[i]) * z[i + 1]
    for i in range(k + 1, n):
        z[i] = (e[i - 1] / dm[i]) * z[i - 1]
    return np.array(z)


def _solve_shifted(J: JacobiMatrix, sigma: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (J - sigma I) x = rhs by Gaussian elimination with partial pivoting."""
    n = J.n
    pivmin = _pivmin(J)
    d = [di - sigma for di in J._d]
    du = [-ei for ei in J._e]
    dl = [-ei for ei in J._e]
    du2 = [0.0] * max(n - 2, 0)
    b = [float(x) for x in rhs]
    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            piv = _flush(d[i], pivmin)
            d[i] = piv
            fact = dl[i] / piv
            d[i + 1] -= fact * du[i]
            b[i + 1] -= fact * b[i]
        else:
            fact = d[i] / dl[i]
            d[i] = dl[i]
            temp = d[i + 1]
            d[i + 1] = du[i] - fact * temp
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du2[i]
            du[i] = temp
            b[i], b[i + 1] = b[i + 1], b[i] - fact * b[i + 1]
    d[n - 1] = _flush(d[n - 1], pivmin)
    x = [0.0] * n
    x[n - 1] = b[n - 1] / d[n - 1]
    if n > 1:
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i]
    return np.array(x)


def _orthonormalize(v: np.ndarray, against: Sequence[np.ndarray]) -> np.ndarray:
    for u in against:
        v = v - np.dot(u, v) * u
    nrm = np.linalg.norm(v)
    if nrm == 0.0 or not np.isfinite(nrm):
        return v
    return v / nrm


def _inverse_iteration(
    J: JacobiMatrix,
    lam: float,
    index: int,
    tol: float,
    against: Sequence[np.ndarray] = (),
) -> EigenPair:
    if J.n == 1:
        return EigenPair(lam, np.ones(1), abs(J._d[0] - lam), index)
    target = tol * J.residual_scale if J.residual_scale > 0 else tol
    step = EPS * max(J.scale, TINY)
    best = math.inf
    for attempt in range(MAX_SHIFT_RETRIES):
        sigma = lam + step * (8.0**attempt)
        v = None
        for it in range(MAX_INVERSE_ITERATIONS):
            if v is None:
                v = _twisted_vector(J, sigma)
            else:
                v = _solve_shifted(J, sigma, v)
            v = _orthonormalize(v, against)
            if not np.all(np.isfinite(v)) or not np.any(v):
                break
            r = _residual(J, lam, v)
            best = min(best, r)
            if r <= target:
                return EigenPair(lam, _sign_normalize(v), r, index)
    raise EigenSolverError(f"inverse iteration failed for eigenvalue {index} ({lam!r})", best)


def eigenpair(J: JacobiMatrix, index: int, tol: float = DEFAULT_RESIDUAL_TOL) -> EigenPair:
    """Eigenpair number ``index`` (0-based, ascending) of ``J``.

    The residual ||Jv - lambda v||_inf is guaranteed below
    ``tol * (||diag||_inf + 2 ||offdiag||_inf)``; otherwise
    :class:`EigenSolverError` is raised with the best residual reached.
    """
    if not 0 <= index < J.n:
        raise ValueError(f"index {index} out of range 0..{J.n - 1}")
    values, _ = bisect_eigenvalues(J, index + 1)
    return _inverse_iteration(J, float(values[index]), index, tol)


def eigenpairs_lowest(J: JacobiMatrix, k: int, tol: float = DEFAULT_RESIDUAL_TOL) -> SpectrumSlice:
    """The ``k`` lowest eigenpairs, re-orthogonalized within clusters."""
    values, _ = bisect_eigenvalues(J, k)
    cluster = CLUSTER_RTOL * J.scale
    pairs: list[EigenPair] = []
    for i, lam in enumerate(values):
        against = [p.vector for p in pairs if abs(lam - p.value) <= cluster]
        pairs.append(_inverse_iteration(J, float(lam), i, tol, against))
    return SpectrumSlice(tuple(pairs), J.n)


def _tqli(d: np.ndarray, e: np.ndarray, z: np.ndarray, max_sweeps: int = 60) -> None:
    """Implicit QL with Wilkinson shifts, in place.

    ``e[i]`` is the (i, i+1) entry, ``e[-1]`` is scratch. Rotations are
    accumulated into the columns of ``z``.
    """
    n = d.size
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                raise EigenSolverError("QL iteration did not converge", math.inf)
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * zi1
                z[:, i] = c * z[:, i] - s * zi1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0


def dense_oracle_spectrum(J: JacobiMatrix) -> SpectrumSlice:
    """Full spectrum by implicit QL on a copy; shares no code with bisection."""
    n = J.n
    if n > ORACLE_MAX_DIM:
        raise OracleSizeError(f"oracle is capped at n <= {ORACLE_MAX_DIM}, got {n}")
    d = J.diag.copy()
    e = np.zeros(n)
    e[: n - 1] = -J.offdiag
    z = np.eye(n)
    _tqli(d, e, z)
    order = np.argsort(d, kind="stable")
    pairs = []
    for idx, j in enumerate(order):
        v = z[:, j] / np.linalg.norm(z[:, j])
        pairs.append(EigenPair(float(d[j]), _sign_normalize(v), _residual(J, float(d[j]), v), idx))
    return SpectrumSlice(tuple(pairs), n)
