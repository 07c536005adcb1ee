"""Schrodinger operators on path and hypercube graphs, and potential generators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Union

import numpy as np

from .linalg import JacobiMatrix
from .prng import SplitMix64

HYPERCUBE_FULL_MAX_N = 12
CONVEXITY_RTOL = 1e-12


def second_differences(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return v[2:] - 2.0 * v[1:-1] + v[:-2]


def is_convex(values, rtol: float = CONVEXITY_RTOL) -> bool:
    """Nonnegative second differences, up to ``rtol`` times the largest |value|."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return True
    scale = max(1.0, float(np.abs(v).max()))
    return bool(np.all(second_differences(v) >= -rtol * scale))


class _Potential:
    values: np.ndarray
    convexity_certified: bool

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise ValueError("potential values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.convexity_certified and not is_convex(v):
            raise ValueError("potential marked convex has a negative second difference")

    @classmethod
    def certify(cls, values):
        """Build the potential and certify convexity when the data allow it."""
        return cls(values, is_convex(values))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class PathPotential(_Potential):
    """Potential W_1..W_N on the path, stored 0-based."""

    values: np.ndarray
    convexity_certified: bool = False

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class HammingPotential(_Potential):
    """Potential W_0..W_N indexed by Hamming weight on the N-cube."""

    values: np.ndarray
    convexity_certified: bool = False

    @property
    def n(self) -> int:
        """Number of qubits (one less than the number of weights)."""
        return self.values.size - 1


Potential = Union[PathPotential, HammingPotential]


@dataclass(frozen=True)
class UnitLinear:
    slope: float = 1.0

    def __post_init__(self) -> None:
        if not self.slope >= 0:
            raise ValueError("unit-linear slope must be >= 0")

    def path(self, n: int) -> PathPotential:
        """alpha * (i - 1) for i = 1..n."""
        return PathPotential(self.slope * np.arange(n, dtype=float), True)

    def hamming(self, n: int) -> HammingPotential:
        """alpha * (m - n/2) for weights m = 0..n."""
        return HammingPotential(self.slope * (np.arange(n + 1, dtype=float) - n / 2.0), True)


def build_path(W: PathPotential) -> JacobiMatrix:
    """H_W(P_N) = L(P_N) + diag(W).

    The endpoints have degree 1, which is the same as imposing
    u_0 = u_1 and u_{N+1} = u_N on the interior recurrence.
    """
    n = W.n
    if n < 2:
        raise ValueError("path needs N >= 2")
    diag = 2.0 + W.values
    diag[0] -= 1.0
    diag[-1] -= 1.0
    return JacobiMatrix(diag, np.ones(n - 1))


def hypercube_couplings(n: int) -> np.ndarray:
    """h(m) = sqrt((m+1)(n-m)) for m = 0..n-1."""
    m = np.arange(n, dtype=float)
    return np.sqrt((m + 1.0) * (n - m))


@dataclass(frozen=True, eq=False)
class SymmetricReduction:
    dim_N: int
    couplings: np.ndarray
    shifted: bool

    @classmethod
    def of(cls, n: int, shifted: bool = True) -> "SymmetricReduction":
        if n < 1:
            raise ValueError("hypercube needs N >= 1")
        return cls(n, hypercube_couplings(n), shifted)

    def matrix(self, W: HammingPotential) -> JacobiMatrix:
        if W.n != self.dim_N:
            raise ValueError(f"potential has {W.values.size} weights, expected {self.dim_N + 1}")
        offset = 0.0 if self.shifted else float(self.dim_N)
        return JacobiMatrix(offset + W.values, self.couplings)


def build_hypercube_reduced(W: HammingPotential, apply_shift: bool = True) -> JacobiMatrix:
    """(N+1)-dimensional matrix of the operator on the Hamming-symmetric subspace.

    With ``apply_shift`` the constant N is removed from the diagonal; the gap
    is unchanged.
    """
    return SymmetricReduction.of(W.n, apply_shift).matrix(W)


@dataclass(frozen=True, eq=False)
class HypercubeOperator:
    """L(H_{2^N}) + W on all 2^N bit strings, stored as neighbour lists."""

    n: int
    diagonal: np.ndarray
    neighbors: np.ndarray  # shape (2^n, n): index with bit b flipped

    @property
    def dim(self) -> int:
        return self.diagonal.size

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return self.diagonal * v - v[self.neighbors].sum(axis=1)

    def to_dense(self) -> np.ndarray:
        H = np.diag(self.diagonal)
        rows = np.repeat(np.arange(self.dim), self.n)
        H[rows, self.neighbors.ravel()] = -1.0
        return H

    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.to_dense())


def hamming_weights(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return np.array([bin(i).count("1") for i in idx])


def build_hypercube_full(W: HammingPotential) -> HypercubeOperator:
    n = W.n
    if n > HYPERCUBE_FULL_MAX_N:
        raise ValueError(f"full hypercube operator is capped at N <= {HYPERCUBE_FULL_MAX_N}")
    idx = np.arange(1 << n)
    neighbors = np.stack([idx ^ (1 << b) for b in range(n)], axis=1) if n else np.zeros((1, 0), int)
    diagonal = n + W.values[hamming_weights(n)]
    return HypercubeOperator(n, diagonal, neighbors)


def lift_symmetric(v: np.ndarray, n: int) -> np.ndarray:
    """Map weight-basis coefficients v_m to a full 2^n vector."""
    w = hamming_weights(n)
    norms = np.array([math.sqrt(math.comb(n, m)) for m in range(n + 1)])
    return np.asarray(v, dtype=float)[w] / norms[w]


def _gamma_half_integer_sq(k2: int) -> tuple[Fraction, int]:
    """Gamma(k2/2)^2 as (rational, power of pi)."""
    if k2 % 2 == 0:
        return Fraction(math.factorial(k2 // 2 - 1) ** 2), 0
    # Gamma(j + 1/2) = (2j)! sqrt(pi) / (4^j j!)
    j = (k2 - 1) // 2
    g = Fraction(math.factorial(2 * j), 4**j * math.factorial(j))
    return g * g, 1


def gamma_ratio(n: int) -> float:
    """f_1/f_0 = sqrt(n) Gamma(n) / (2^(n-1) Gamma((n+1)/2)^2), from exact products."""
    if n < 1:
        raise ValueError("n must be >= 1")
    denom, pi_power = _gamma_half_integer_sq(n + 1)
    rational = Fraction(math.factorial(n - 1), 2 ** (n - 1)) / denom
    return math.sqrt(n) * float(rational) / math.pi**pi_power


@dataclass(frozen=True, eq=False)
class VPrimeTransform:
    """Weight transform turning the reduced recurrence into a path-like one.

    ``apply`` maps v to v' with v'_m = v_m / f(m); the transformed vector
    obeys

        v'_{m-1} - 2 v'_m + v'_{m+1} = c_m (W_m - q_m - lambda) v'_m

    with v'_{-1} = v'_{N+1} = 0, c_m = f(m) / (h(m) f(m+1)) and c_m q_m = 2.
    """

    n: int
    f: np.ndarray
    q: np.ndarray
    f1_over_f0: float
    h: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        """c_m for m = 0..N."""
        return 2.0 / self.q

    def apply(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v, dtype=float) / self.f

    def recurrence_residual(self, v: np.ndarray, W: HammingPotential, lam: float) -> np.ndarray:
        """Componentwise defect of the transformed recurrence for an eigenpair (lam, v)."""
        vp = np.concatenate(([0.0], self.apply(v), [0.0]))
        lhs = vp[:-2] - 2.0 * vp[1:-1] + vp[2:]
        rhs = self.weights * (W.values - self.q - lam) * vp[1:-1]
        return lhs - rhs


def vprime_transform(n: int) -> VPrimeTransform:
    if n < 1:
        raise ValueError("n must be >= 1")
    h = hypercube_couplings(n)
    r = gamma_ratio(n)
    f = np.empty(n + 1)
    for m in range(n + 1):
        p = 1.0 if m % 2 == 0 else r
        for j in range(1, m):
            if j % 2 != m % 2:
                p *= h[j - 1] / h[j]
        f[m] = p
    q = np.empty(n + 1)
    q[:n] = 2.0 * h * f[1:] / f[:n]
    # h(N) = 0 and f(N+1) is infinite; their product is h(N-1) f(N-1).
    q[n] = 2.0 * h[n - 1] * f[n - 1] / f[n]
    return VPrimeTransform(n, f, q, r, h)


# --- potential generators -------------------------------------------------

def flat(length: int, level: float = 0.0) -> np.ndarray:
    return np.full(length, float(level))


def quadratic(length: int, alpha: float = 1.0, center: float | None = None) -> np.ndarray:
    """alpha * (i - center)^2 on positions i = 1..length (centered by default)."""
    i = np.arange(1, length + 1, dtype=float)
    c = (length + 1) / 2.0 if center is None else center
    return alpha * (i - c) ** 2


def random_convex_values(length: int, seed: int, scale: float) -> np.ndarray:
    """Convex samples: start value and slope in [-scale, scale], curvature in [0, scale]."""
    if length < 2:
        raise ValueError("need at least two samples")
    if scale < 0:
        raise ValueError("scale must be >= 0")
    rng = SplitMix64(seed)
    w = np.empty(length)
    w[0] = rng.uniform(-scale, scale)
    slope = rng.uniform(-scale, scale)
    w[1] = w[0] + slope
    for i in range(1, length - 1):
        w[i + 1] = 2.0 * w[i] - w[i - 1] + rng.uniform(0.0, scale)
    return w


def random_convex(n: int, seed: int, scale: float = 1.0, kind: str = "path") -> Potential:
    """Random convex potential on P_n (``kind="path"``) or on Hamming weights of the n-cube."""
    if kind == "path":
        if n < 2:
            raise ValueError("random_convex needs N >= 2 on a path")
        return PathPotential(random_convex_values(n, seed, scale), True)
    if kind == "hamming":
        if n < 1:
            raise ValueError("random_convex needs N >= 1 on a hypercube")
        return HammingPotential(random_convex_values(n + 1, seed, scale), True)
    raise ValueError(f"unknown potential kind {kind!r}")


GENERATORS = ("flat", "unit-linear", "quadratic", "random-convex")


def potential_from_spec(spec: dict[str, Any], kind: str | None = None, n: int | None = None) -> Potential:
    """Build a potential from its JSON description.

    Either ``{"kind": ..., "values": [...]}`` or
    ``{"kind": ..., "generator": name, "params": {"alpha", "seed", "scale", "n"}}``.
    ``kind`` and ``n`` act as fallbacks when the dict omits them.
    """
    kind = spec.get("kind", kind)
    if kind not in ("path", "hamming"):
        raise ValueError(f"potential kind must be 'path' or 'hamming', got {kind!r}")
    cls = PathPotential if kind == "path" else HammingPotential
    if "values" in spec:
        return cls.certify(spec["values"])
    gen = spec.get("generator")
    params = dict(spec.get("params", {}))
    n = int(params.get("n", n if n is not None else 0))
    if n < 1:
        raise ValueError("potential description needs a size: params.n or an explicit N")
    length = n if kind == "path" else n + 1
    alpha = float(params.get("alpha", 1.0))
    if gen == "flat":
        return cls(flat(length, params.get("level", 0.0)), True)
    if gen == "unit-linear":
        unit = UnitLinear(alpha)
        return unit.path(n) if kind == "path" else unit.hamming(n)
    if gen == "quadratic":
        return cls(quadratic(length, alpha), alpha >= 0)
    if gen == "random-convex":
        return random_convex(n, int(params.get("seed", 0)), float(params.get("scale", 1.0)), kind)
    raise ValueError(f"unknown generator {gen!r}; expected one of {', '.join(GENERATORS)}")


def build_operator(W: Potential, shift: bool = True) -> JacobiMatrix:
    """Path matrix for a PathPotential, reduced hypercube matrix for a HammingPotential."""
    if isinstance(W, PathPotential):
        return build_path(W)
    return build_hypercube_reduced(W, shift)
