"""Lemma-by-lemma verification suite behind ``specgap verify``.

Every check reduces to a signed slack per case: nonnegative means the
property holds with room to spare, negative means a violation. A row passes
when every case has nonnegative slack and no case raised.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import analysis as an
from .flow import CONVERGED, flat_bound, flow_to_linear
from .linalg import JacobiMatrix, eigenpairs_lowest, eigenvalues_lowest
from .operators import (
    HammingPotential,
    PathPotential,
    SplitMix64,
    UnitLinear,
    build_hypercube_full,
    build_hypercube_reduced,
    build_path,
    quadratic,
    random_convex,
    vprime_transform,
)


@dataclass
class SuiteConfig:
    quick: bool = False
    adversarial: bool = False
    seed_base: int = 0

    def seeds(self, full: int, quick: int) -> range:
        return range(self.seed_base, self.seed_base + (quick if self.quick else full))

    def pick(self, full, quick):
        return quick if self.quick else full


@dataclass
class Row:
    name: str
    passed: bool
    cases: int
    violations: int
    errors: int
    worst_slack: float
    seconds: float = 0.0
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "violations": self.violations,
            "errors": self.errors,
            "worst_slack": self.worst_slack,
            "detail": self.detail,
        }


@dataclass
class _Tally:
    cases: int = 0
    violations: int = 0
    errors: int = 0
    worst: float = math.inf
    notes: list[str] = field(default_factory=list)

    def add(self, slack: float, label: str = "") -> None:
        self.cases += 1
        self.worst = min(self.worst, slack)
        if not slack >= 0:
            self.violations += 1
            if len(self.notes) < 3:
                self.notes.append(f"{label}: slack {slack:.3e}")

    def fail(self, label: str, exc: Exception) -> None:
        self.cases += 1
        self.errors += 1
        if len(self.notes) < 3:
            self.notes.append(f"{label}: {type(exc).__name__}: {exc}")

    def row(self, name: str, extra: str = "") -> Row:
        detail = "; ".join(([extra] if extra else []) + self.notes)
        passed = self.violations == 0 and self.errors == 0 and self.cases > 0
        worst = self.worst if self.cases > self.errors else math.nan
        return Row(name, passed, self.cases, self.violations, self.errors, worst, detail=detail)


def _guard(t: _Tally, label: str, fn: Callable[[], Iterable[float]]) -> None:
    try:
        for slack in fn():
            t.add(slack, label)
    except Exception as exc:  # failures are report rows, never crashes
        t.fail(label, exc)


def _unit_grid(cfg: SuiteConfig) -> tuple[list[int], list[float]]:
    ns = cfg.pick(list(range(4, 33)), [4, 7, 12, 20])
    alphas = list(np.linspace(0.0, 10.0, cfg.pick(41, 9)))
    return ns, alphas


def _nonconvex(n: int, seed: int, length: int) -> np.ndarray:
    """Concave bumps with random sign: deliberately outside the convex class."""
    rng = SplitMix64(seed ^ 0x5A5A)
    return -quadratic(length, 0.5 + rng.random()) * (1.0 + rng.random())


# --- rows --------------------------------------------------------------------

def check_sign_regions(cfg: SuiteConfig) -> Row:
    t = _Tally()
    ns = cfg.pick([3, 5, 10, 20, 35, 50], [3, 10, 25])
    for n in ns:
        for s in cfg.seeds(40, 8):
            def one(n=n, s=s):
                p1, p2 = an.lowest_two(build_path(random_convex(n, s, 1.0)))
                gap = p2.value - p1.value
                c = an.casoratian(p2.vector, p1.vector, gap=gap)
                an.find_sign_regions(p2.vector, p1.vector)
                diff = p2.vector**2 - p1.vector**2
                yield 1e-10 - float(np.max(c.w))
                yield float(2 - an.sign_changes(diff))
                # orthonormality forces a negative entry unless every entry ties
                yield 0.0 if np.min(diff) <= an.ZERO_TIE else -1.0
                yield an.RATIO_SLACK - float(np.max(an.ratio_increments(p2.vector, p1.vector)))
            _guard(t, f"N={n} seed={s}", one)
    return t.row("sign_regions")


def check_secant_flow(cfg: SuiteConfig) -> Row:
    t = _Tally()
    cases = [("path", 4), ("path", 8), ("hamming", 8)] if not cfg.quick else [("path", 8), ("hamming", 8)]
    for kind, n in cases:
        for s in cfg.seeds(10, 3):
            def one(kind=kind, n=n, s=s):
                W = random_convex(n, s, 1.0, kind)
                tr = flow_to_linear(W, 0.05, 5000, 1e-6)
                yield 0.0 if tr.terminated_reason == CONVERGED else -1.0
                yield 1e-10 - tr.max_gap_increase()
                yield 1e-10 - max(st.gap_rate for st in tr.states)
                yield tr.final.gap - flat_bound(W) + 1e-9
            _guard(t, f"{kind} N={n} seed={s}", one)
    return t.row("secant_flow")


def check_left_endpoint(cfg: SuiteConfig) -> Row:
    """When u2 is no heavier than u1 at vertex 1 the gap grows with the slope."""
    t = _Tally()
    ns, alphas = _unit_grid(cfg)
    applicable = 0
    for n in ns:
        fam = an.DiagonalFamily.scaled_potential(UnitLinear(1.0).path(n))
        for a in alphas:
            def one(n=n, a=a):
                nonlocal applicable
                p1, p2 = an.lowest_two(fam.at(a))
                if an.simplify_applies(p2.vector, p1.vector):
                    applicable += 1
                    yield an.gap_derivative(fam, a) + 1e-8
            _guard(t, f"N={n} alpha={a:g}", one)
    return t.row("left_endpoint_derivative", f"{applicable} applicable")


def check_ground_decreasing(cfg: SuiteConfig) -> Row:
    t = _Tally()
    ns, alphas = _unit_grid(cfg)
    for n in ns:
        for a in list(alphas) + [1e-6]:
            def one(n=n, a=a):
                u1 = eigenpairs_lowest(an.unit_linear_path(n, a), 1)[0].vector
                yield 0.0 if an.check_ground_monotone(u1, a) else -1.0
            _guard(t, f"N={n} alpha={a:g}", one)
    return t.row("ground_state_decreasing")


def check_interlacing(cfg: SuiteConfig) -> Row:
    t = _Tally()
    rng = SplitMix64(cfg.seed_base + 17)
    for trial in range(cfg.pick(500, 100)):
        n = 2 + int(rng.random() * 11)
        diag = [rng.uniform(-5, 5) for _ in range(n)]
        off = [rng.uniform(1e-3, 5) for _ in range(n - 1)]
        J = JacobiMatrix(diag, off)
        _guard(t, f"random #{trial}", lambda J=J: (1e-9 - an.interlacing_violation(J, k) for k in range(1, J.n)))
    for n in cfg.pick([3, 8, 16], [3, 8]):
        for s in cfg.seeds(5, 2):
            for J in (build_path(random_convex(n, s, 1.0)), build_hypercube_reduced(random_convex(n, s, 1.0, "hamming"))):
                _guard(t, f"operator N={n}", lambda J=J: (1e-9 - an.interlacing_violation(J, k) for k in range(1, J.n)))
    return t.row("interlacing")


def check_upper_block(cfg: SuiteConfig) -> Row:
    t = _Tally()
    alphas = cfg.pick(list(np.linspace(0, 10, 21)), [0.0, 1.0, 5.0])
    for a in alphas:
        def one(a=a):
            mu0, _ = an.lemma_upper_check(a, 0.0)
            yield 1e-12 - abs(mu0 - (2.0 + a))
            for d in (0.1, 0.5, 1.0, 3.0):
                mu, dec = an.lemma_upper_check(a, d)
                yield 0.0 if dec else -1.0
                yield mu0 - mu + 1e-12
            for n in (3, 6, 15):
                lam2 = eigenvalues_lowest(an.unit_linear_path(n, a), 2)[1]
                yield 2.0 + a - lam2 + 1e-12
        _guard(t, f"alpha={a:g}", one)
    return t.row("upper_block")


def check_interpolated_recurrence(cfg: SuiteConfig) -> Row:
    t = _Tally()
    for n in cfg.pick([5, 9, 16], [5, 9]):
        for a in (0.0, 0.5, 1.0, 4.0):
            J = an.unit_linear_path(n, a)
            for p in eigenpairs_lowest(J, 3):
                zeros = set(an.generalized_zeros(p.vector))
                for i in range(1, n):
                    if i - 1 in zeros:
                        continue
                    for eps in (0.0, 0.25, 0.5, 0.75, 1.0):
                        def one(u=p.vector, a=a, i=i, eps=eps):
                            j = an.convex_combination_recurrence_check(u, a, i, eps)
                            yield min(j - i, i + 1 - j) + 1e-9
                        _guard(t, f"N={n} alpha={a:g} i={i} eps={eps:g}", one)
    return t.row("interpolated_recurrence")


def _unit_u2_rows(cfg: SuiteConfig, name: str, test: Callable[[np.ndarray, float], float]) -> Row:
    t = _Tally()
    ns, alphas = _unit_grid(cfg)
    for n in ns:
        for a in alphas:
            def one(n=n, a=a):
                _, p2 = an.lowest_two(an.unit_linear_path(n, a))
                yield test(p2.vector, a)
            _guard(t, f"N={n} alpha={a:g}", one)
    return t.row(name)


def check_interpolated_ordering(cfg: SuiteConfig) -> Row:
    return _unit_u2_rows(cfg, "interpolated_ordering", lambda u, a: 0.0 if an.check_ordering_interpolated(u) else -1.0)


def check_node_left(cfg: SuiteConfig) -> Row:
    return _unit_u2_rows(cfg, "node_left_of_centre", lambda u, a: (u.size + 1) / 2.0 - an.nodes(u).first + an.NODE_SLACK)


def check_decreasing_region(cfg: SuiteConfig) -> Row:
    return _unit_u2_rows(cfg, "decreasing_region", lambda u, a: 0.0 if an.check_decreasing_region(u) else -1.0)


def check_reflection_ordering(cfg: SuiteConfig) -> Row:
    return _unit_u2_rows(
        cfg, "reflection_ordering", lambda u, a: 0.0 if an.check_ordering(u, an.nodes(u).first) else -1.0
    )


def check_path_bound(cfg: SuiteConfig) -> Row:
    t = _Tally()
    ns = cfg.pick([3, 4, 6, 10, 25, 50, 100], [3, 10, 50])
    for n in ns:
        bound = an.path_bound(n)
        _guard(t, f"flat N={n}", lambda n=n, b=bound: [1e-10 - abs(an.gap_report(build_path(PathPotential(np.zeros(n))), b).margin)])
        for s in cfg.seeds(50, 10):
            _guard(t, f"N={n} seed={s}", lambda n=n, s=s, b=bound: [an.gap_report(build_path(random_convex(n, s, 1.0)), b).margin + 1e-9])
        if cfg.adversarial:
            for s in cfg.seeds(5, 3):
                W = PathPotential(_nonconvex(n, s, n))
                _guard(t, f"non-convex N={n} seed={s}", lambda W=W, b=bound: [an.gap_report(build_path(W), b).margin + 1e-9])
    fam_ns = cfg.pick([4, 10, 30], [4, 10])
    for n in fam_ns:
        fam = an.DiagonalFamily.scaled_potential(UnitLinear(1.0).path(n))
        for a in np.linspace(0.0, 5.0, cfg.pick(11, 4)):
            _guard(t, f"derivative N={n} alpha={a:g}", lambda fam=fam, a=a: [an.gap_derivative(fam, a) + 1e-8])
    return t.row("path_gap_bound", "with non-convex inputs" if cfg.adversarial else "")


def check_hypercube_bound(cfg: SuiteConfig) -> Row:
    t = _Tally()
    for n in cfg.pick([2, 3, 6, 8, 20, 40], [2, 8, 20]):
        _guard(t, f"flat N={n}", lambda n=n: [1e-10 - abs(an.gap_report(build_hypercube_reduced(HammingPotential(np.zeros(n + 1))), 2.0).margin)])
        for s in cfg.seeds(50, 10):
            _guard(t, f"N={n} seed={s}", lambda n=n, s=s: [an.gap_report(build_hypercube_reduced(random_convex(n, s, 1.0, "hamming")), 2.0).margin + 1e-9])
        if cfg.adversarial:
            for s in cfg.seeds(5, 3):
                W = HammingPotential(_nonconvex(n, s, n + 1))
                _guard(t, f"non-convex N={n} seed={s}", lambda W=W: [an.gap_report(build_hypercube_reduced(W), 2.0).margin + 1e-9])
    return t.row("hypercube_gap_bound", "with non-convex inputs" if cfg.adversarial else "")


def check_hypercube_reduction(cfg: SuiteConfig) -> Row:
    t = _Tally()
    for n in range(1, cfg.pick(11, 7)):
        for s in cfg.seeds(2, 1):
            def one(n=n, s=s):
                W = random_convex(n, s, 1.0, "hamming") if n >= 2 else HammingPotential([0.3, -0.1])
                full = build_hypercube_full(W).spectrum()
                red = eigenvalues_lowest(build_hypercube_reduced(W, False), n + 1)
                for lam in red:
                    yield 1e-8 - float(np.min(np.abs(full - lam)))
                g_shift = np.diff(eigenvalues_lowest(build_hypercube_reduced(W, True), 2))[0]
                g_plain = np.diff(eigenvalues_lowest(build_hypercube_reduced(W, False), 2))[0]
                yield 1e-12 * max(1.0, n) - abs(g_shift - g_plain)
            _guard(t, f"N={n} seed={s}", one)
    return t.row("hypercube_reduction")


def check_vprime_transform(cfg: SuiteConfig) -> Row:
    t = _Tally()
    for n in cfg.pick([2, 3, 5, 8, 12, 20], [2, 8]):
        T = vprime_transform(n)
        for s in cfg.seeds(10, 3):
            def one(n=n, s=s, T=T):
                W = random_convex(n, s, 1.0, "hamming")
                J = build_hypercube_reduced(W, True)
                p1, p2 = an.lowest_two(J)
                for p in (p1, p2):
                    r = T.recurrence_residual(p.vector, W, p.value)
                    yield 1e-8 - float(np.max(np.abs(r)))
                c = an.casoratian(T.apply(p2.vector), T.apply(p1.vector), weights=T.weights, gap=p2.value - p1.value)
                yield -float(np.max(c.interior))
            _guard(t, f"N={n} seed={s}", one)
    return t.row("vprime_transform")


def check_closed_form(cfg: SuiteConfig) -> Row:
    t = _Tally()
    for a in (0.0, 0.5, 1.0, 3.0):
        for n in range(1, cfg.pick(41, 13)):
            def one(n=n, a=a):
                vals = eigenvalues_lowest(build_hypercube_reduced(UnitLinear(a).hamming(n), True), n + 1)
                exact = np.sort(np.array([k - n / 2.0 for k in range(n + 1)]) * math.sqrt(4.0 + a * a))
                yield 1e-8 * (1.0 + a) - float(np.max(np.abs(vals - exact)))
            _guard(t, f"N={n} alpha={a:g}", one)
    return t.row("hypercube_closed_form")


def check_node_separation(cfg: SuiteConfig) -> Row:
    t = _Tally()
    applicable = 0
    for n in cfg.pick([5, 9, 14], [5, 9]):
        mats = [build_path(PathPotential(np.zeros(n))), an.unit_linear_path(n, 1.5)]
        mats += [build_path(random_convex(n, s, 1.0)) for s in cfg.seeds(3, 1)]
        for J in mats:
            pairs = eigenpairs_lowest(J, min(n, 4))
            for lo, hi in zip(pairs, pairs[1:]):
                theta = an.theta_sequence(np.zeros(n), np.zeros(n), hi.value - lo.value)
                for w in an.separation_windows(lo.vector):
                    def one(lo=lo, hi=hi, theta=theta, w=w):
                        nonlocal applicable
                        applicable += 1
                        yield 0.0 if an.verify_node_separation(hi.vector, lo.vector, theta, w) else -1.0
                    _guard(t, f"N={n} window={w}", one)
        # same eigen-index across two slopes: the steeper one plays u_mu
        for a, b in ((0.0, 0.5), (0.5, 1.0), (1.0, 2.0)):
            pa = an.lowest_two(an.unit_linear_path(n, a))[1]
            pb = an.lowest_two(an.unit_linear_path(n, b))[1]
            theta = an.theta_sequence(UnitLinear(b).path(n).values, UnitLinear(a).path(n).values, pb.value - pa.value)
            for w in an.separation_windows(pa.vector):
                try:
                    ok = an.verify_node_separation(pb.vector, pa.vector, theta, w)
                except an.TheoremInapplicable:
                    continue
                applicable += 1
                t.add(0.0 if ok else -1.0, f"N={n} slopes {a:g}->{b:g}")
    return t.row("node_separation", f"{applicable} applicable")


def check_node_drift(cfg: SuiteConfig) -> Row:
    t = _Tally()
    ns, alphas = _unit_grid(cfg)
    for n in ns:
        def one(n=n):
            traj = an.node_trajectory(n, alphas)
            yield 1e-10 - float(np.max(np.diff(traj)))
        _guard(t, f"N={n}", one)
    return t.row("node_drift")


CHECKS: tuple[Callable[[SuiteConfig], Row], ...] = (
    check_sign_regions,
    check_secant_flow,
    check_left_endpoint,
    check_ground_decreasing,
    check_interlacing,
    check_upper_block,
    check_interpolated_recurrence,
    check_interpolated_ordering,
    check_node_left,
    check_decreasing_region,
    check_reflection_ordering,
    check_path_bound,
    check_hypercube_reduction,
    check_vprime_transform,
    check_closed_form,
    check_hypercube_bound,
    check_node_separation,
    check_node_drift,
)


def run_suite(cfg: SuiteConfig, on_row: Callable[[Row], None] | None = None) -> list[Row]:
    rows = []
    for check in CHECKS:
        t0 = time.perf_counter()
        row = check(cfg)
        row.seconds = time.perf_counter() - t0
        rows.append(row)
        if on_row is not None:
            on_row(row)
    return rows


def format_table(rows: list[Row]) -> str:
    width = max(len(r.name) for r in rows)
    lines = [f"{'check':<{width}}  result  cases  worst slack"]
    for r in rows:
        status = "pass" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {status:<6}  {r.cases:>5}  {r.worst_slack: .3e}" + (f"  {r.detail}" if r.detail else ""))
    return "\n".join(lines)
