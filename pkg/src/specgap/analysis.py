"""Gap diagnostics and eigenvector-geometry checks.

Vectors are 0-based numpy arrays internally. Anything reported to a user
(node positions, sign-region indices, windows) uses 1-based vertex labels,
with the conversion done by :func:`to_vertex_label`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import (
    EigenPair,
    JacobiMatrix,
    eigenpairs_lowest,
    eigenvalues_lowest,
    DEFAULT_RESIDUAL_TOL,
)
from .operators import (
    HammingPotential,
    PathPotential,
    UnitLinear,
    build_hypercube_reduced,
    build_path,
)

HYPERCUBE_BOUND = 2.0
ZERO_TIE = 1e-12
RATIO_SLACK = 1e-10
CASORATIAN_TOL = 1e-8
NODE_SLACK = 1e-10
ORDERING_TOL = 1e-10
MONOTONE_TOL = 1e-12
DEGENERACY_RTOL = 1e-10


class SignConventionError(ValueError):
    """The ground-state vector is not strictly positive."""


class SignRegionError(ArithmeticError):
    """The eigenvector pair violates the two-sign-change structure."""


class DegenerateEigenvalueError(ArithmeticError):
    pass


class PreconditionError(ValueError):
    pass


class TheoremInapplicable(PreconditionError):
    """The node-separation hypotheses on Theta do not hold."""


def to_vertex_label(i):
    """0-based array index -> 1-based vertex label (works on arrays too)."""
    return i + 1


def path_bound(n: int) -> float:
    """Flat-potential gap on P_n: 2 (1 - cos(pi / n))."""
    return 2.0 * (1.0 - math.cos(math.pi / n))


def lowest_two(J: JacobiMatrix, tol: float = DEFAULT_RESIDUAL_TOL) -> tuple[EigenPair, EigenPair]:
    s = eigenpairs_lowest(J, 2, tol)
    return s[0], s[1]


def unit_linear_path(n: int, alpha: float) -> JacobiMatrix:
    """H_{alpha U}(P_n)."""
    return build_path(UnitLinear(alpha).path(n))


# --- generalized zeros and nodes -----------------------------------------

def generalized_zeros(u: Sequence[float]) -> list[int]:
    """0-based indices m with u_m = 0 or u_m u_{m+1} < 0."""
    u = np.asarray(u, dtype=float)
    out = []
    for m in range(u.size):
        if u[m] == 0.0 or (m + 1 < u.size and u[m] * u[m + 1] < 0.0):
            out.append(m)
    return out


@dataclass(frozen=True)
class NodeList:
    """Zero crossings of the piecewise-linear u-line, as 1-based x-coordinates."""

    nodes: tuple[float, ...]

    @property
    def zero_based(self) -> tuple[float, ...]:
        return tuple(x - 1.0 for x in self.nodes)

    @property
    def first(self) -> float:
        return self.nodes[0] if self.nodes else math.nan

    def __len__(self) -> int:
        return len(self.nodes)


def nodes(u: Sequence[float]) -> NodeList:
    u = np.asarray(u, dtype=float)
    if not np.any(u):
        raise ValueError("u is identically zero")
    xs = []
    for m in generalized_zeros(u):
        if u[m] == 0.0:
            x = float(m)
        else:
            x = m + u[m] / (u[m] - u[m + 1])
        xs.append(float(to_vertex_label(x)))
    return NodeList(tuple(xs))


# --- gap report -------------------------------------------------------------

@dataclass(frozen=True)
class GapReport:
    lambda1: float
    lambda2: float
    gap: float
    bound: float
    margin: float
    node_position: float
    sign_regions: tuple[int, int]
    ground_state_monotone: bool

    CSV_FIELDS = ("lambda1", "lambda2", "gap", "bound", "margin", "node_x", "m", "n")

    def to_dict(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "gap": self.gap,
            "bound": self.bound,
            "margin": self.margin,
            "node_x": self.node_position,
            "m": self.sign_regions[0],
            "n": self.sign_regions[1],
            "ground_state_monotone": self.ground_state_monotone,
        }


def _squared_difference(u2: np.ndarray, u1: np.ndarray) -> np.ndarray:
    return np.asarray(u2, float) ** 2 - np.asarray(u1, float) ** 2


def _region_bounds(diff: np.ndarray) -> tuple[int, int, bool]:
    """(m, n, contiguous) from the strictly negative entries of ``diff``.

    Entries within ZERO_TIE of zero count as nonnegative.
    """
    neg = np.flatnonzero(diff < -ZERO_TIE)
    if neg.size == 0:
        m = diff.size // 2
        return m, m + 1, True
    contiguous = bool(neg[-1] - neg[0] + 1 == neg.size)
    # region [m+1, n] in 1-based labels
    return int(neg[0]), int(to_vertex_label(neg[-1])), contiguous


def sign_changes(diff: Sequence[float]) -> int:
    """Sign changes of a sequence, with entries within ZERO_TIE of zero counted as nonnegative."""
    neg = np.asarray(diff, dtype=float) < -ZERO_TIE
    return int(np.count_nonzero(neg[1:] != neg[:-1]))


def gap_report(J: JacobiMatrix, bound: float, tol: float = DEFAULT_RESIDUAL_TOL) -> GapReport:
    """Lowest two eigenvalues, the gap and its margin over ``bound``, plus diagnostics.

    Diagnostics never raise: sign regions are read off the squared
    difference of the two eigenvectors without validating the ratio test.
    """
    if J.n < 2:
        raise ValueError("gap needs dimension >= 2")
    p1, p2 = lowest_two(J, tol)
    gap = p2.value - p1.value
    m, n, _ = _region_bounds(_squared_difference(p2.vector, p1.vector))
    return GapReport(
        lambda1=p1.value,
        lambda2=p2.value,
        gap=gap,
        bound=bound,
        margin=gap - bound,
        node_position=nodes(p2.vector).first,
        sign_regions=(m, n),
        ground_state_monotone=bool(np.all(np.diff(p1.vector) <= MONOTONE_TOL)),
    )


# --- Hellmann-Feynman -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiagonalFamily:
    """H(alpha) = base + alpha * diag(direction)."""

    base: JacobiMatrix
    direction: np.ndarray

    def __post_init__(self) -> None:
        d = np.array(self.direction, dtype=float).ravel()
        if d.size != self.base.n:
            raise ValueError("direction length must match the matrix")
        object.__setattr__(self, "direction", d)

    @classmethod
    def scaled_potential(cls, W: PathPotential | HammingPotential) -> "DiagonalFamily":
        """The family H_{alpha W} on the graph that W lives on."""
        zero = np.zeros_like(W.values)
        if isinstance(W, PathPotential):
            base = build_path(PathPotential(zero))
        else:
            base = build_hypercube_reduced(HammingPotential(zero), True)
        return cls(base, W.values)

    def at(self, alpha: float) -> JacobiMatrix:
        return JacobiMatrix(self.base.diag + alpha * self.direction, self.base.offdiag)


def _check_simple(J: JacobiMatrix, which: int) -> None:
    k = min(which + 2, J.n)
    vals = eigenvalues_lowest(J, k)
    thresh = DEGENERACY_RTOL * J.scale
    for j in (which - 1, which + 1):
        if 0 <= j < k and abs(vals[j] - vals[which]) < thresh:
            raise DegenerateEigenvalueError(
                f"eigenvalues {j} and {which} are within {thresh:.3e}; derivative undefined"
            )


def hf_derivative(family: DiagonalFamily, alpha: float, which: int) -> float:
    """d lambda_which / d alpha = <u| dH/dalpha |u> = sum_i direction_i u_i^2."""
    J = family.at(alpha)
    _check_simple(J, which)
    u = eigenpairs_lowest(J, which + 1)[which].vector
    return float(np.dot(family.direction, u * u))


def gap_derivative(family: DiagonalFamily, alpha: float) -> float:
    """d Gamma / d alpha = <W>_{u2} - <W>_{u1}."""
    J = family.at(alpha)
    _check_simple(J, 0)
    _check_simple(J, 1)
    p1, p2 = lowest_two(J)
    return float(np.dot(family.direction, p2.vector**2 - p1.vector**2))


def fd_step(alpha: float, size: float = 1.0) -> float:
    """Central-difference step for a family whose direction has max-norm ``size``.

    The gap varies on the scale 1/size near alpha = 0 and on the scale
    alpha further out; the step tracks whichever is larger.
    """
    return 3e-6 * (1.0 / max(1.0, size) + abs(alpha))


def _direction_size(family: "DiagonalFamily") -> float:
    return float(np.max(np.abs(family.direction))) if family.direction.size else 1.0


def fd_gap_derivative(family: DiagonalFamily, alpha: float, h: float | None = None) -> float:
    """Central finite difference of the gap; independent of eigenvectors."""
    h = fd_step(alpha, _direction_size(family)) if h is None else h

    def gap(a: float) -> float:
        v = eigenvalues_lowest(family.at(a), 2)
        return v[1] - v[0]

    return (gap(alpha + h) - gap(alpha - h)) / (2.0 * h)


def fd_eigenvalue_derivative(family: DiagonalFamily, alpha: float, which: int, h: float | None = None) -> float:
    h = fd_step(alpha, _direction_size(family)) if h is None else h
    up = eigenvalues_lowest(family.at(alpha + h), which + 1)[which]
    dn = eigenvalues_lowest(family.at(alpha - h), which + 1)[which]
    return (up - dn) / (2.0 * h)


# --- Casoratian, Theta, sign regions -------------------------------------------

@dataclass(frozen=True, eq=False)
class CasoratianSeq:
    """w_i for i = offset .. offset + len(w) - 1 (1-based vertex labels)."""

    w: np.ndarray
    weighted: bool
    offset: int

    @property
    def interior(self) -> np.ndarray:
        return self.w[1:-1]


def casoratian(
    u2: Sequence[float],
    u1: Sequence[float],
    weights: Sequence[float] | None = None,
    gap: float | None = None,
    tol: float = CASORATIAN_TOL,
) -> CasoratianSeq:
    """Casoratian w_i = u2_{i+1} u1_i - u2_i u1_{i+1} of the two lowest eigenvectors.

    Without ``weights`` the vectors are path eigenvectors, padded with the
    fictitious u_0 = u_1 and u_{N+1} = u_N, and w runs over i = 0..N. With
    ``weights`` (the c_m of the hypercube transform) the vectors are
    transformed v' padded with zeros, and w runs over i = -1..N.

    If ``gap`` is given, the telescoping identity
    w_i - w_{i-1} = -gap * c_i * u2_i * u1_i is checked to within
    ``tol * max(1, gap)``.
    """
    u2 = np.asarray(u2, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    if u2.shape != u1.shape:
        raise ValueError("vectors must have equal length")
    if np.any(u1 <= 0.0):
        raise SignConventionError("ground-state vector must be strictly positive")
    if weights is None:
        e2 = np.concatenate(([u2[0]], u2, [u2[-1]]))
        e1 = np.concatenate(([u1[0]], u1, [u1[-1]]))
        c = np.ones_like(u1)
        offset = 0
    else:
        c = np.asarray(weights, dtype=float)
        e2 = np.concatenate(([0.0], u2, [0.0]))
        e1 = np.concatenate(([0.0], u1, [0.0]))
        offset = -1
    w = e2[1:] * e1[:-1] - e2[:-1] * e1[1:]
    if gap is not None:
        defect = np.diff(w) + gap * c * u2 * u1
        worst = float(np.max(np.abs(defect)))
        if worst > tol * max(1.0, abs(gap)):
            raise ArithmeticError(f"Casoratian telescoping identity off by {worst:.3e}")
    return CasoratianSeq(w, weights is not None, offset)


@dataclass(frozen=True, eq=False)
class ThetaSeq:
    theta: np.ndarray


def theta_sequence(W_mu: Sequence[float], W_lambda: Sequence[float], gamma: float) -> ThetaSeq:
    """Theta_i = W_i(for u_mu) - W_i(for u_lambda) - gamma, with gamma = mu - lambda."""
    return ThetaSeq(np.asarray(W_mu, float) - np.asarray(W_lambda, float) - gamma)


def ratio_increments(u2: Sequence[float], u1: Sequence[float]) -> np.ndarray:
    u1 = np.asarray(u1, dtype=float)
    if np.any(u1 <= 0.0):
        raise SignConventionError("ground-state vector must be strictly positive")
    return np.diff(np.asarray(u2, dtype=float) / u1)


def _check_ratio_monotone(u2: np.ndarray, u1: np.ndarray) -> None:
    r = np.asarray(u2, float) / np.asarray(u1, float)
    dr = np.diff(r)
    slack = RATIO_SLACK * np.maximum(1.0, np.maximum(np.abs(r[1:]), np.abs(r[:-1])))
    bad = np.flatnonzero(dr > slack)
    if bad.size:
        i = int(bad[0])
        raise SignRegionError(f"u2/u1 increases by {dr[i]:.3e} at vertex {to_vertex_label(i)}")


def find_sign_regions(u2: Sequence[float], u1: Sequence[float]) -> tuple[int, int]:
    """Region boundaries (m, n), 1-based, of u2^2 - u1^2.

    The difference is >= 0 on [1, m] and [n+1, N] and < 0 on [m+1, n];
    m = 0 means the first outer region is empty. Ties within ZERO_TIE go to
    the outer regions. When nothing is strictly negative (N = 2, flat) the
    split falls at the middle: (N // 2, N // 2 + 1).

    Raises SignRegionError if the negative entries are not contiguous or the
    ratio u2/u1 increases anywhere.
    """
    u2 = np.asarray(u2, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    if u2.shape != u1.shape:
        raise ValueError("vectors must have equal length")
    if np.any(u1 <= 0.0):
        raise SignConventionError("ground-state vector must be strictly positive")
    _check_ratio_monotone(u2, u1)
    m, n, contiguous = _region_bounds(_squared_difference(u2, u1))
    if not contiguous:
        raise SignRegionError("u2^2 - u1^2 changes sign more than twice")
    return m, n


# --- path lemmas for the unit-linear family ------------------------------------

def check_ground_monotone(u1: Sequence[float], alpha: float) -> bool:
    """Ground state nonincreasing; strictly decreasing once alpha > 0."""
    du = np.diff(np.asarray(u1, dtype=float))
    if alpha > 0:
        return bool(np.all(du < 0.0))
    return bool(np.all(du <= MONOTONE_TOL))


def check_node_left_of_center(u2: Sequence[float]) -> bool:
    n = len(u2)
    return bool(nodes(u2).first <= (n + 1) / 2.0 + NODE_SLACK)


def node_trajectory(n: int, alphas: Sequence[float]) -> np.ndarray:
    """First node of u(lambda_2) of H_{alpha U}(P_n) for each alpha."""
    alphas = list(alphas)
    if any(a < 0 for a in alphas) or any(b < a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be ascending and nonnegative")
    out = np.empty(len(alphas))
    for k, a in enumerate(alphas):
        _, p2 = lowest_two(unit_linear_path(n, a))
        out[k] = nodes(p2.vector).first
    return out


def _node_split(u2: np.ndarray, node: float) -> tuple[int, float]:
    """(m, x): 1-based generalized-zero index and node position, after the precondition check."""
    n = u2.size
    if node > (n + 1) / 2.0 + NODE_SLACK:
        raise PreconditionError(f"node {node} lies right of the centre {(n + 1) / 2.0}")
    m = int(math.floor(node + 1e-12))
    return max(m, 1), node


def _at(u: np.ndarray, i: int) -> float:
    """u_i with 1-based i and the fictitious u_0 = u_1, u_{N+1} = u_N."""
    n = u.size
    if i == 0:
        return float(u[0])
    if i == n + 1:
        return float(u[-1])
    return float(u[i - 1])


def ordering_pairs(n: int, m: int, x: float) -> list[tuple[int, int]]:
    """(left, right) vertex pairs that the reflection ordering compares.

    Node in [m, m + 1/2]: reflect about m + 1/2, pairs (m - k, m + 1 + k).
    Node in (m + 1/2, m + 1): reflect about m + 1, pairs (m + 1 - k, m + 1 + k).
    Pairs reaching past vertex N are dropped.
    """
    if x <= m + 0.5 + 1e-12:
        pairs = [(m - k, m + 1 + k) for k in range(0, m)]
    else:
        pairs = [(m + 1 - k, m + 1 + k) for k in range(1, m + 1)]
    return [(a, b) for a, b in pairs if 1 <= a and b <= n]


def check_ordering(u2: Sequence[float], node: float) -> bool:
    """Reflected components right of the node dominate: u_right / u_left <= -1.

    Checked as u_right + u_left <= ORDERING_TOL, which is the same statement
    for u_left >= 0 and survives a zero at the node.
    """
    u2 = np.asarray(u2, dtype=float)
    m, x = _node_split(u2, node)
    for a, b in ordering_pairs(u2.size, m, x):
        if _at(u2, b) + _at(u2, a) > ORDERING_TOL:
            return False
    return True


def _interp(u: np.ndarray, t: float) -> float:
    """u_{i + eps} = eps u_{i+1} + (1 - eps) u_i for t = i + eps (1-based, fictitious ends)."""
    i = int(math.floor(t))
    eps = t - i
    if eps == 0.0:
        return _at(u, i)
    return eps * _at(u, i + 1) + (1.0 - eps) * _at(u, i)


def check_ordering_interpolated(u2: Sequence[float]) -> bool:
    """The reflection ordering on interpolated components around the first node.

    Node in (m + 1/2, m + 1): eps is the node offset and
    u_{m+k+eps} / u_{m-k+eps} <= -1 for k = 1..m.
    Node in [m, m + 1/2]: eps solves u_{m+eps} = -u_{m-1+eps} and
    u_{m+k+eps} / u_{m-1-k+eps} <= -1 for k = 0..m-1.
    """
    u2 = np.asarray(u2, dtype=float)
    n = u2.size
    x = nodes(u2).first
    m, x = _node_split(u2, x)
    if x > m + 0.5:
        eps = x - m
        pairs = [(m - k + eps, m + k + eps) for k in range(1, m + 1)]
    else:
        num = _at(u2, m) + _at(u2, m - 1)
        den = _at(u2, m - 1) - _at(u2, m + 1)
        eps = num / den if den != 0.0 else 0.0
        pairs = [(m - 1 - k + eps, m + k + eps) for k in range(0, m)]
    for a, b in pairs:
        if b > n or a < 0:
            continue
        if _interp(u2, b) + _interp(u2, a) > ORDERING_TOL:
            return False
    return True


def decreasing_region_end(n: int, node: float) -> int:
    """Last vertex of the region [1, end] symmetric about the node."""
    return min(n, int(math.ceil(2.0 * node - 1.0 - 1e-12)))


def check_decreasing_region(u2: Sequence[float]) -> bool:
    """u(lambda_2) is decreasing on the region [1, end] symmetric about its first node."""
    u2 = np.asarray(u2, dtype=float)
    end = decreasing_region_end(u2.size, nodes(u2).first)
    return bool(np.all(np.diff(u2[:end]) <= MONOTONE_TOL))


def simplify_applies(u2: Sequence[float], u1: Sequence[float]) -> bool:
    """True when u2_1^2 <= u1_1^2, the case in which the gap derivative is automatically positive."""
    return bool(u2[0] ** 2 <= u1[0] ** 2)


def convex_combination_recurrence_check(u: Sequence[float], alpha: float, i: int, eps: float) -> float:
    """Position j in [i, i+1] at which the interpolated recurrence holds.

    Solves u_{i+1+eps} = (2 + alpha (j - 1) - lambda) u_{i+eps} - u_{i-1+eps}
    for j, with lambda the Rayleigh quotient of u on H_{alpha U}(P_N).
    ``i`` is a 1-based vertex in 1..N-1.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    if not 1 <= i <= n - 1:
        raise ValueError(f"vertex {i} out of range 1..{n - 1}")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    if u[i - 1] == 0.0 or u[i - 1] * u[i] < 0.0:
        raise PreconditionError(f"u_{i} is a generalized zero")
    if alpha == 0.0:
        return i + eps
    J = unit_linear_path(n, alpha)
    lam = float(np.dot(u, J.matvec(u)) / np.dot(u, u))
    centre = _interp(u, i + eps)
    rhs = _interp(u, i + 1 + eps) + _interp(u, i - 1 + eps) - (2.0 - lam) * centre
    j = 1.0 + rhs / (alpha * centre)
    if not (i - 1e-9 <= j <= i + 1 + 1e-9):
        raise ArithmeticError(f"no j in [{i}, {i + 1}] solves the recurrence (got {j})")
    return j


# --- separation, interlacing, 3x3 bound --------------------------------------

def _extended_nodes(u: np.ndarray) -> list[float]:
    """Nodes of u padded with zeros at vertices 0 and N+1, 1-based."""
    ext = np.concatenate(([0.0], u, [0.0]))
    return [x - 1.0 for x in nodes(ext).nodes]


def separation_windows(u_lambda: Sequence[float]) -> list[tuple[int, int]]:
    """Windows (m, n) lying strictly between adjacent nodes of u_lambda (boundary nodes included)."""
    xs = _extended_nodes(np.asarray(u_lambda, dtype=float))
    out = []
    for eta, xi in zip(xs, xs[1:]):
        m = int(math.floor(eta + NODE_SLACK)) + 1
        n = int(math.ceil(xi - NODE_SLACK)) - 1
        if m <= n:
            out.append((m, n))
    return out


def verify_node_separation(
    u_mu: Sequence[float],
    u_lambda: Sequence[float],
    theta: ThetaSeq,
    window: tuple[int, int],
) -> bool:
    """Is there a node of u_mu strictly between the nodes of u_lambda that bracket ``window``?

    ``window`` = (m, n) in 1-based labels. u_lambda must have adjacent nodes
    eta in [m-1, m) and xi in (n, n+1] (boundary nodes at 0 and N+1 count),
    and Theta must be <= 0 on [m, n] and < 0 somewhere there; otherwise
    TheoremInapplicable is raised.
    """
    u_mu = np.asarray(u_mu, dtype=float)
    u_lambda = np.asarray(u_lambda, dtype=float)
    m, n = window
    N = u_lambda.size
    if not (1 <= m <= n <= N):
        raise PreconditionError(f"window {window} outside 1..{N}")
    th = theta.theta[m - 1 : n]
    if np.any(th > 0.0) or not np.any(th < 0.0):
        raise TheoremInapplicable("Theta must be <= 0 on the window and < 0 somewhere")
    lam_nodes = _extended_nodes(u_lambda)
    eta = max((x for x in lam_nodes if x < m), default=None)
    xi = min((x for x in lam_nodes if x > n), default=None)
    if eta is None or xi is None or eta < m - 1 - NODE_SLACK or xi > n + 1 + NODE_SLACK:
        raise TheoremInapplicable(f"u_lambda has no adjacent nodes bracketing {window}")
    if any(eta < x < xi for x in lam_nodes):
        raise TheoremInapplicable("bracketing nodes of u_lambda are not adjacent")
    return any(eta < x < xi for x in _extended_nodes(u_mu))


def interlacing_violation(J: JacobiMatrix, k: int | None = None) -> float:
    """Worst violation of lambda_i <= mu_i <= lambda_{i+1} for the leading k x k block."""
    n = J.n
    k = n - 1 if k is None else k
    lam = eigenvalues_lowest(J, n)
    mu = eigenvalues_lowest(J.leading(k), k)
    # repeated application of the one-step theorem: lambda_i <= mu_i <= lambda_{i+n-k}
    lower = lam[:k] - mu
    upper = mu - lam[n - k :]
    return float(max(lower.max(), upper.max()))


def verify_interlacing(J: JacobiMatrix, all_leading: bool = False, tol: float = 1e-9) -> bool:
    if J.n < 2:
        raise ValueError("interlacing needs dimension >= 2")
    sizes = range(1, J.n) if all_leading else [J.n - 1]
    return all(interlacing_violation(J, k) <= tol for k in sizes)


def upper_block(alpha: float, delta: float) -> JacobiMatrix:
    """The 3x3 block [[2-delta, -1, 0], [-1, 2+alpha, -1], [0, -1, 2+2 alpha]]."""
    return JacobiMatrix([2.0 - delta, 2.0 + alpha, 2.0 + 2.0 * alpha], [1.0, 1.0])


def lemma_upper_check(alpha: float, delta: float, h: float = 1e-6) -> tuple[float, bool]:
    """Middle eigenvalue of the 3x3 block and whether it is nonincreasing in delta."""
    if alpha < 0 or delta < 0:
        raise ValueError("alpha and delta must be >= 0")
    mu2 = lambda d: float(eigenvalues_lowest(upper_block(alpha, d), 2)[1])
    lo = max(delta - h, 0.0)
    slope = (mu2(delta + h) - mu2(lo)) / (delta + h - lo)
    return mu2(delta), slope <= 1e-8
