import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specgap.analysis import (
    DegenerateEigenvalueError,
    DiagonalFamily,
    PreconditionError,
    SignConventionError,
    SignRegionError,
    TheoremInapplicable,
    casoratian,
    check_decreasing_region,
    check_ground_monotone,
    check_node_left_of_center,
    check_ordering,
    check_ordering_interpolated,
    convex_combination_recurrence_check,
    fd_eigenvalue_derivative,
    fd_gap_derivative,
    find_sign_regions,
    gap_derivative,
    gap_report,
    generalized_zeros,
    hf_derivative,
    interlacing_violation,
    lemma_upper_check,
    lowest_two,
    node_trajectory,
    nodes,
    ordering_pairs,
    path_bound,
    ratio_increments,
    separation_windows,
    sign_changes,
    theta_sequence,
    unit_linear_path,
    upper_block,
    verify_interlacing,
    verify_node_separation,
)
from specgap.linalg import JacobiMatrix, eigenpairs_lowest, eigenvalues_lowest
from specgap.operators import (
    HammingPotential,
    PathPotential,
    UnitLinear,
    build_hypercube_reduced,
    build_path,
    flat,
    random_convex,
    vprime_transform,
)

# reference values computed at 50 digits with an independent arbitrary-precision solver
NODE_N15_A2 = 1.2609712112744447915
NODE_TRAJ_N10 = {0.0: 5.5, 0.5: 1.5792216782303441792, 1.0: 1.3878728592464700617,
                 2.0: 1.2609712112744452399, 4.0: 1.1681384871179811311}
UPPER_MU2_A1_D1 = 2.7608767217434455357
WITNESS_J = {2: 2.2363926092193490506, 5: 5.1364633957163806093}
GAP_RATE_N6_A05 = 1.7552028559131636594
GAP_N6_A05 = 1.317143111667637113


def path_pairs(n, seed, scale=1.0):
    return lowest_two(build_path(random_convex(n, seed, scale)))


class TestZerosAndNodes:
    def test_generalized_zeros(self):
        assert generalized_zeros([1.0, 0.5, -0.5, -1.0]) == [1]
        assert generalized_zeros([1.0, 0.0, -1.0]) == [1]
        assert generalized_zeros([1.0, 2.0]) == []

    def test_nodes_interpolate(self):
        assert nodes([1.0, 0.5, -0.5, -1.0]).nodes == (2.5,)
        assert nodes([1.0, 0.0, -1.0]).nodes[-1] == 2.0
        assert nodes([3.0, -1.0]).zero_based == (0.75,)

    def test_nodes_zero_vector(self):
        with pytest.raises(ValueError):
            nodes([0.0, 0.0])

    def test_first_node_empty(self):
        assert math.isnan(nodes([1.0, 1.0]).first)

    def test_flat_node_at_centre(self):
        for n in (4, 7, 10):
            _, p2 = lowest_two(build_path(PathPotential(flat(n))))
            assert nodes(p2.vector).first == pytest.approx((n + 1) / 2, abs=1e-10)

    def test_node_reference(self):
        _, p2 = lowest_two(unit_linear_path(15, 2.0))
        assert nodes(p2.vector).first == pytest.approx(NODE_N15_A2, abs=1e-10)

    def test_node_trajectory_reference(self):
        alphas = sorted(NODE_TRAJ_N10)
        traj = node_trajectory(10, alphas)
        assert np.allclose(traj, [NODE_TRAJ_N10[a] for a in alphas], atol=1e-10)
        assert np.all(np.diff(traj) <= 1e-12)

    def test_node_trajectory_rejects_unsorted(self):
        with pytest.raises(ValueError):
            node_trajectory(5, [1.0, 0.5])


class TestGapReport:
    def test_flat_path(self):
        r = gap_report(build_path(PathPotential(flat(10))), path_bound(10))
        assert abs(r.margin) < 1e-12
        assert r.ground_state_monotone
        assert r.sign_regions[0] < r.sign_regions[1]

    def test_to_dict_keys(self):
        d = gap_report(build_path(PathPotential(flat(4))), path_bound(4)).to_dict()
        assert set(d) == {"lambda1", "lambda2", "gap", "bound", "margin", "node_x", "m", "n",
                          "ground_state_monotone"}

    def test_reference_gap(self):
        r = gap_report(unit_linear_path(6, 0.5), path_bound(6))
        assert r.gap == pytest.approx(GAP_N6_A05, abs=1e-12)

    def test_one_by_one_rejected(self):
        with pytest.raises(ValueError):
            gap_report(JacobiMatrix([1.0], []), 0.0)

    def test_hypercube_margin(self):
        r = gap_report(build_hypercube_reduced(HammingPotential(flat(7))), 2.0)
        assert abs(r.margin) < 1e-12


class TestDerivatives:
    def family(self, n=6):
        return DiagonalFamily.scaled_potential(UnitLinear(1.0).path(n))

    def test_reference_rate(self):
        assert gap_derivative(self.family(), 0.5) == pytest.approx(GAP_RATE_N6_A05, rel=1e-10)

    def test_matches_fd(self):
        f = self.family()
        assert fd_gap_derivative(f, 0.5) == pytest.approx(GAP_RATE_N6_A05, rel=1e-6)

    def test_single_eigenvalue(self):
        f = self.family(8)
        for which in (0, 1, 2):
            assert hf_derivative(f, 1.3, which) == pytest.approx(fd_eigenvalue_derivative(f, 1.3, which), rel=1e-6)

    def test_hypercube_family(self):
        f = DiagonalFamily.scaled_potential(random_convex(6, 11, 1.0, "hamming"))
        assert gap_derivative(f, 0.7) == pytest.approx(fd_gap_derivative(f, 0.7), rel=1e-5, abs=1e-9)

    def test_direction_length(self):
        with pytest.raises(ValueError):
            DiagonalFamily(build_path(PathPotential(flat(3))), [1.0, 2.0])

    def test_degenerate_rejected(self):
        # couplings must be positive, so near-degeneracy is as close as we can get
        J = JacobiMatrix([1.0, 1.0], [1e-13])
        with pytest.raises(DegenerateEigenvalueError):
            gap_derivative(DiagonalFamily(J, [0.0, 0.0]), 0.0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(3, 30), st.floats(0.0, 4.0), st.integers(0, 10**6))
    def test_hf_vs_fd(self, n, alpha, seed):
        f = DiagonalFamily.scaled_potential(random_convex(n, seed, 1.0))
        a = gap_derivative(f, alpha)
        b = fd_gap_derivative(f, alpha)
        assert abs(a - b) <= 1e-5 * abs(b)


class TestCasoratian:
    def test_nonpositive_on_path(self):
        for seed in range(20):
            p1, p2 = path_pairs(12, seed)
            w = casoratian(p2.vector, p1.vector, gap=p2.value - p1.value).w
            assert np.all(w <= 1e-12)
            assert abs(w[0]) < 1e-14 and abs(w[-1]) < 1e-12

    def test_telescoping_violation_detected(self):
        p1, p2 = path_pairs(8, 1)
        with pytest.raises(ArithmeticError):
            casoratian(p2.vector, p1.vector, gap=p2.value - p1.value + 0.5)

    def test_requires_positive_ground(self):
        with pytest.raises(SignConventionError):
            casoratian([1.0, -1.0], [1.0, -0.1])

    def test_hypercube_weighted_strictly_negative(self):
        for n in (3, 6, 11):
            W = random_convex(n, n, 1.0, "hamming")
            T = vprime_transform(n)
            p1, p2 = lowest_two(build_hypercube_reduced(W))
            v1, v2 = T.apply(p1.vector), T.apply(p2.vector)
            seq = casoratian(v2, v1, weights=T.weights, gap=p2.value - p1.value)
            assert seq.offset == -1 and seq.w.size == n + 2
            assert np.all(seq.interior < 0)

    def test_theta(self):
        th = theta_sequence([1.0, 2.0], [0.5, 0.5], 0.25).theta
        assert th.tolist() == [0.25, 1.25]


class TestSignRegions:
    def test_flat_p4(self):
        p1, p2 = lowest_two(build_path(PathPotential(flat(4))))
        assert find_sign_regions(p2.vector, p1.vector) == (1, 3)

    def test_no_negatives_convention(self):
        p1, p2 = lowest_two(build_path(PathPotential(flat(2))))
        assert find_sign_regions(p2.vector, p1.vector) == (1, 2)

    def test_rising_ratio_rejected(self):
        with pytest.raises(SignRegionError):
            find_sign_regions([-1.0, 1.0, -1.0], [1.0, 1.0, 1.0])

    def test_ratio_increments(self):
        assert ratio_increments([2.0, 1.0], [1.0, 1.0]).tolist() == [-1.0]

    def test_sign_changes_ties(self):
        assert sign_changes([1.0, -1.0, 1.0]) == 2
        assert sign_changes([1.0, -1e-13, 1.0]) == 0

    @settings(max_examples=150, deadline=None)
    @given(st.integers(2, 60), st.integers(0, 2**40), st.floats(0.01, 50))
    def test_invariants(self, n, seed, scale):
        for kind in ("path", "hamming"):
            if kind == "hamming" and n > 40:
                continue
            W = random_convex(n, seed, scale, kind)
            J = build_path(W) if kind == "path" else build_hypercube_reduced(W)
            p1, p2 = lowest_two(J)
            u1, u2 = p1.vector, p2.vector
            if kind == "hamming":
                T = vprime_transform(n)
                u1, u2 = T.apply(u1), T.apply(u2)
            m, k = find_sign_regions(u2, u1)
            assert 0 <= m < k <= len(u1)
            assert sign_changes(u2**2 - u1**2) <= 2
            assert np.all(ratio_increments(u2, u1) <= 1e-10 * np.maximum(1, np.abs(u2 / u1))[1:])
            if kind == "path":
                assert np.all(casoratian(u2, u1).w <= 1e-12)


class TestPathLemmas:
    @pytest.mark.parametrize("n", [3, 6, 15, 40])
    @pytest.mark.parametrize("alpha", [0.0, 0.3, 1.0, 5.0])
    def test_unit_linear_family(self, n, alpha):
        p1, p2 = lowest_two(unit_linear_path(n, alpha))
        assert check_ground_monotone(p1.vector, alpha)
        assert check_node_left_of_center(p2.vector)
        x = nodes(p2.vector).first
        assert check_ordering(p2.vector, x)
        assert check_ordering_interpolated(p2.vector)
        assert check_decreasing_region(p2.vector)

    def test_strict_monotone_only_for_positive_alpha(self):
        assert check_ground_monotone([1.0, 1.0, 1.0], 0.0)
        assert not check_ground_monotone([1.0, 1.0, 1.0], 0.5)

    def test_node_right_of_centre_rejected(self):
        with pytest.raises(PreconditionError):
            check_ordering([1.0, 1.0, 1.0, -1.0], 3.5)

    def test_ordering_pairs(self):
        assert ordering_pairs(10, 3, 3.2) == [(3, 4), (2, 5), (1, 6)]
        assert ordering_pairs(10, 3, 3.7) == [(3, 5), (2, 6), (1, 7)]
        assert ordering_pairs(4, 2, 2.7) == [(2, 4)]

    def test_witness_reference(self):
        p1, _ = lowest_two(unit_linear_path(9, 1.0))
        for i, ref in WITNESS_J.items():
            j = convex_combination_recurrence_check(p1.vector, 1.0, i, 0.5)
            assert j == pytest.approx(ref, abs=1e-10)

    def test_witness_at_integer(self):
        p1, _ = lowest_two(unit_linear_path(9, 1.0))
        assert convex_combination_recurrence_check(p1.vector, 1.0, 4, 0.0) == pytest.approx(4.0, abs=1e-9)

    def test_witness_rejects_zero(self):
        with pytest.raises(PreconditionError):
            convex_combination_recurrence_check([1.0, -1.0, 0.5], 1.0, 1, 0.5)
        with pytest.raises(ValueError):
            convex_combination_recurrence_check([1.0, 1.0], 1.0, 2, 0.5)


class TestSeparation:
    def test_windows_flat(self):
        _, p2 = lowest_two(build_path(PathPotential(flat(6))))
        assert separation_windows(p2.vector) == [(1, 3), (4, 6)]

    def test_same_matrix_consecutive(self):
        J = build_path(random_convex(12, 5, 2.0))
        s = eigenpairs_lowest(J, 5)
        hits = 0
        for lo, hi in zip(s, list(s)[1:]):
            th = theta_sequence(J.diag, J.diag, hi.value - lo.value)
            for win in separation_windows(lo.vector):
                assert verify_node_separation(hi.vector, lo.vector, th, win)
                hits += 1
        assert hits > 0

    def test_theta_sign_precondition(self):
        J = build_path(PathPotential(flat(6)))
        s = eigenpairs_lowest(J, 2)
        th = theta_sequence(J.diag, J.diag, -1.0)
        with pytest.raises(TheoremInapplicable):
            verify_node_separation(s[1].vector, s[0].vector, th, (1, 6))

    def test_window_range(self):
        with pytest.raises(PreconditionError):
            verify_node_separation([1.0, 1.0], [1.0, 1.0], theta_sequence([0, 0], [0, 0], 1.0), (0, 2))


class TestInterlacing:
    def test_example(self):
        J = JacobiMatrix([2.0, 2.0, 2.0], [1.0, 1.0])
        mu = eigenvalues_lowest(J.leading(2), 2)
        assert np.allclose(mu, [1.0, 3.0])
        assert verify_interlacing(J, all_leading=True)

    def test_rejects_1x1(self):
        with pytest.raises(ValueError):
            verify_interlacing(JacobiMatrix([1.0], []))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 20), st.lists(st.floats(-5, 5), min_size=20, max_size=20),
           st.lists(st.floats(0.01, 5), min_size=19, max_size=19))
    def test_random(self, n, d, e):
        J = JacobiMatrix(d[:n], e[: n - 1])
        assert all(interlacing_violation(J, k) <= 1e-9 for k in range(1, n))


class TestUpperBlock:
    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 3.0, 10.0])
    def test_delta_zero(self, alpha):
        mu2, ok = lemma_upper_check(alpha, 0.0)
        assert mu2 == pytest.approx(2.0 + alpha, abs=1e-12) and ok

    def test_reference(self):
        mu2, ok = lemma_upper_check(1.0, 1.0)
        assert mu2 == pytest.approx(UPPER_MU2_A1_D1, abs=1e-12) and ok

    def test_block(self):
        assert upper_block(1.0, 0.5).diag.tolist() == [1.5, 3.0, 4.0]

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.0, 20.0), st.floats(0.0, 20.0))
    def test_nonincreasing(self, alpha, delta):
        assert lemma_upper_check(alpha, delta)[1]

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            lemma_upper_check(-1.0, 0.0)
