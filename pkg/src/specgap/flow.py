"""Convex-to-linear potential flow.

The potential is pushed toward the secant line through the boundaries of
the negative sign region of u2^2 - u1^2. The secant lies above the
potential exactly where u2 is lighter than u1, so moving toward it can only
shrink the gap; repeating drives the potential to a line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterator, Union

import numpy as np

from .analysis import (
    HYPERCUBE_BOUND,
    ZERO_TIE,
    find_sign_regions,
    lowest_two,
    path_bound,
)
from .linalg import EigenSolverError
from .operators import HammingPotential, PathPotential, build_operator, is_convex, second_differences

Potential = Union[PathPotential, HammingPotential]

SANDWICH_SLACK = 1e-12
CONVEXITY_SLACK = 1e-10
FIXED_POINT_TOL = 1e-12
DEFAULT_DALPHA = 0.05
GAP_SLACK = 1e-10
MAX_REFINE = 12

CONVERGED = "converged_to_linear"
MAX_STEPS = "max_steps"
STEP_FAILURE = "step_failure"


class FlowStepError(ArithmeticError):
    pass


def _rebuild(W: Potential, values: np.ndarray) -> Potential:
    return type(W)(values, convexity_certified=is_convex(values))


def _scale(values: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(values))))


def least_squares_line(values: np.ndarray) -> np.ndarray:
    x = np.arange(1, values.size + 1, dtype=float)
    slope, icpt = np.polyfit(x, values, 1)
    return slope * x + icpt


def linearity_residual(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    if values.size <= 2:
        return 0.0
    return float(np.max(np.abs(values - least_squares_line(values))))


def secant_values(values: np.ndarray, m: int, n: int) -> np.ndarray:
    """Line through (m, values_m) and (n, values_n), 1-based, sampled at 1..len."""
    x = np.arange(1, values.size + 1, dtype=float)
    wm, wn = values[m - 1], values[n - 1]
    return ((n - x) * wm + (x - m) * wn) / (n - m)


def secant_potential(W: Potential, m: int, n: int, check: bool = True) -> Potential:
    """Secant potential through vertices m < n.

    With ``check`` the sandwich l <= W off [m+1, n] and l >= W on [m+1, n]
    is verified, which holds for any convex W.
    """
    N = len(W.values)
    if not 1 <= m < n <= N:
        raise ValueError(f"need 1 <= m < n <= {N}, got ({m}, {n})")
    line = secant_values(W.values, m, n)
    if check:
        slack = SANDWICH_SLACK * _scale(W.values)
        d = line - W.values
        inner = np.zeros(N, dtype=bool)
        inner[m:n] = True
        if np.any(d[~inner] > slack) or np.any(d[inner] < -slack):
            raise FlowStepError(f"secant through ({m}, {n}) does not sandwich the potential")
    return type(W)(line, convexity_certified=True)


@dataclass(frozen=True, eq=False)
class FlowState:
    alpha: float
    potential: Potential
    gap: float
    m: int
    n: int
    linearity_residual: float
    # d gap / d alpha along the flow: <L - W>_{u2} - <L - W>_{u1}, never positive
    gap_rate: float
    inner_empty: bool = False

    def target(self) -> np.ndarray:
        """Where the flow is heading from this state: the secant, or a fitted line."""
        if self.inner_empty:
            return least_squares_line(self.potential.values)
        return secant_values(self.potential.values, self.m, self.n)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "gap": self.gap,
            "m": self.m,
            "n": self.n,
            "linearity_residual": self.linearity_residual,
            "gap_rate": self.gap_rate,
            "kind": "path" if isinstance(self.potential, PathPotential) else "hamming",
            "potential": [float(v) for v in self.potential.values],
        }


def _secant_endpoints(m: int, n: int, size: int) -> tuple[int, int]:
    # an empty left outer region (m = 0) pins the secant at vertex 1
    m = max(m, 1)
    n = min(max(n, m + 1), size)
    return m, n


def evaluate(W: Potential, alpha: float = 0.0) -> FlowState:
    """Solve the operator for W and package the flow diagnostics."""
    p1, p2 = lowest_two(build_operator(W))
    u1, u2 = p1.vector, p2.vector
    try:
        m, n = find_sign_regions(u2, u1)
    except ArithmeticError as exc:
        raise FlowStepError(str(exc)) from exc
    diff = u2**2 - u1**2
    empty = not np.any(diff < -ZERO_TIE)
    vals = W.values
    if empty:
        line = least_squares_line(vals)
    else:
        m, n = _secant_endpoints(m, n, vals.size)
        line = secant_potential(W, m, n).values
    delta = line - vals
    rate = float(np.dot(delta, u2**2) - np.dot(delta, u1**2))
    return FlowState(
        alpha=alpha,
        potential=W,
        gap=p2.value - p1.value,
        m=m,
        n=n,
        linearity_residual=linearity_residual(vals),
        gap_rate=rate,
        inner_empty=empty,
    )


def flow_step(state: FlowState, dalpha: float = DEFAULT_DALPHA) -> FlowState:
    """One explicit Euler step of dW/dalpha = L_W - W.

    The step is a convex mix of W and a line, so second differences only
    shrink; losing convexity would mean a bug and raises.
    """
    if not dalpha > 0:
        raise ValueError("dalpha must be positive")
    w = state.potential.values
    new = (1.0 - dalpha) * w + dalpha * state.target()
    if np.any(second_differences(new) < -CONVEXITY_SLACK * _scale(new)):
        raise FlowStepError("flow step lost convexity")
    return evaluate(_rebuild(state.potential, new), state.alpha + dalpha)


@dataclass
class FlowTrace:
    states: list[FlowState] = field(default_factory=list)
    terminated_reason: str = CONVERGED
    error: str | None = None

    @property
    def final(self) -> FlowState:
        return self.states[-1]

    @property
    def gaps(self) -> np.ndarray:
        return np.array([s.gap for s in self.states])

    def max_gap_increase(self) -> float:
        g = self.gaps
        return float(np.max(np.diff(g))) if g.size > 1 else 0.0

    def lines(self) -> Iterator[str]:
        for s in self.states:
            yield json.dumps(s.to_dict())

    def to_jsonl(self) -> str:
        return "".join(line + "\n" for line in self.lines())


def flat_bound(W: Potential) -> float:
    """Gap of the flat potential on the graph W lives on."""
    if isinstance(W, PathPotential):
        return path_bound(W.n)
    return HYPERCUBE_BOUND


def _advance(state: FlowState, dalpha: float, depth: int) -> list[FlowState]:
    """Euler step over ``dalpha``, halved recursively while it raises the gap.

    The sign regions are frozen for the length of a step, so a step that
    crosses a region switch can overshoot; splitting it re-detects the
    regions part-way. Past ``depth`` halvings the step is kept as is.
    """
    nxt = flow_step(state, dalpha)
    if nxt.gap <= state.gap + GAP_SLACK or depth <= 0:
        return [nxt]
    half = dalpha / 2.0
    first = _advance(state, half, depth - 1)
    return first + _advance(first[-1], half, depth - 1)


def flow_to_linear(
    w0: Potential,
    dalpha: float = DEFAULT_DALPHA,
    max_steps: int = 10_000,
    lin_tol: float = 1e-6,
    on_step: Callable[[int, FlowState], None] | None = None,
    refine: int = MAX_REFINE,
) -> FlowTrace:
    """Integrate the flow until the potential is within ``lin_tol`` of a line.

    Each step covers ``dalpha``; steps that would raise the gap are split
    (up to ``refine`` halvings) and all intermediate states are kept.
    Running out of steps or a failed step ends the trace early with the
    matching ``terminated_reason``; the states so far are kept.
    """
    if not (w0.convexity_certified or is_convex(w0.values)):
        raise ValueError("flow requires a convex starting potential")
    if lin_tol <= 0:
        raise ValueError("lin_tol must be positive")
    if not dalpha > 0:
        raise ValueError("dalpha must be positive")
    trace = FlowTrace([evaluate(w0)])
    steps = 0
    while trace.final.linearity_residual >= lin_tol:
        if steps >= max_steps:
            trace.terminated_reason = MAX_STEPS
            return trace
        try:
            trace.states.extend(_advance(trace.final, dalpha, refine))
        except (FlowStepError, EigenSolverError) as exc:
            trace.terminated_reason = STEP_FAILURE
            trace.error = str(exc)
            return trace
        steps += 1
        if on_step is not None:
            on_step(steps, trace.final)
    trace.terminated_reason = CONVERGED
    return trace
