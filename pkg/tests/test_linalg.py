import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specgap.analysis import generalized_zeros
from specgap.linalg import (
    EigenSolverError,
    JacobiMatrix,
    OracleSizeError,
    bisect_eigenvalues,
    dense_oracle_spectrum,
    eigenpair,
    eigenpairs_lowest,
    eigenvalues_lowest,
    sturm_count,
)


@st.composite
def jacobi(draw, max_n=12, lo=-5.0, hi=5.0):
    n = draw(st.integers(1, max_n))
    diag = draw(st.lists(st.floats(lo, hi), min_size=n, max_size=n))
    off = draw(st.lists(st.floats(1e-3, hi), min_size=n - 1, max_size=n - 1))
    return JacobiMatrix(diag, off)


def path2():
    return JacobiMatrix([1.0, 1.0], [1.0])


class TestJacobiMatrix:
    def test_rejects_nonpositive_coupling(self):
        with pytest.raises(ValueError):
            JacobiMatrix([0.0, 0.0], [0.0])
        with pytest.raises(ValueError):
            JacobiMatrix([0.0, 0.0], [-1.0])

    def test_rejects_empty_and_bad_lengths(self):
        with pytest.raises(ValueError):
            JacobiMatrix([], [])
        with pytest.raises(ValueError):
            JacobiMatrix([1.0, 2.0], [1.0, 1.0])

    def test_dense_has_negative_couplings(self):
        A = JacobiMatrix([1.0, 2.0, 1.0], [1.0, 3.0]).to_dense()
        assert A[0, 1] == -1.0 and A[2, 1] == -3.0

    def test_matvec_matches_dense(self):
        J = JacobiMatrix([1.0, -2.0, 0.5, 4.0], [1.0, 0.3, 2.0])
        v = np.array([0.2, -1.0, 3.0, 0.7])
        assert np.allclose(J.matvec(v), J.to_dense() @ v)

    def test_immutable(self):
        J = path2()
        with pytest.raises(ValueError):
            J.diag[0] = 3.0


class TestSturmCount:
    def test_path2_midpoint(self):
        assert sturm_count(path2(), 1.0) == 1

    def test_below_gershgorin_is_zero(self):
        J = JacobiMatrix([3.0, -1.0, 2.0], [0.5, 2.0])
        assert sturm_count(J, min(J.diag) - 2 * max(J.offdiag) - 1e-9) == 0

    def test_counts_strictly_below(self):
        # spectrum {2 - sqrt2, 2, 2 + sqrt2}
        assert sturm_count(JacobiMatrix([2.0, 2.0, 2.0], [1.0, 1.0]), 2.0) == 1

    def test_above_everything(self):
        J = JacobiMatrix([3.0, -1.0, 2.0], [0.5, 2.0])
        assert sturm_count(J, 100.0) == 3

    @settings(max_examples=200, deadline=None)
    @given(jacobi())
    def test_each_eigenvalue_is_simple(self, J):
        vals = dense_oracle_spectrum(J).values
        gaps = np.diff(vals)
        for i, lam in enumerate(vals):
            eps = 0.25 * min([g for g in (gaps[i - 1] if i else np.inf, gaps[i] if i < len(gaps) else np.inf)])
            eps = min(eps, 1e-6 * max(1.0, abs(lam)))
            assert sturm_count(J, lam + eps) - sturm_count(J, lam - eps) == 1

    @settings(max_examples=100, deadline=None)
    @given(jacobi(), st.lists(st.floats(-20, 20), min_size=2, max_size=10))
    def test_monotone_in_x(self, J, xs):
        xs = sorted(xs)
        counts = [sturm_count(J, x) for x in xs]
        assert counts == sorted(counts)


class TestEigenvalues:
    def test_path3_flat(self):
        J = JacobiMatrix([1.0, 2.0, 1.0], [1.0, 1.0])
        vals = eigenvalues_lowest(J, 3, 1e-12)
        assert np.allclose(vals, [0.0, 1.0, 3.0], atol=1e-12)
        closed = [2 * (1 - math.cos(k * math.pi / 3)) for k in range(3)]
        assert np.allclose(vals, closed, atol=1e-12)

    def test_one_by_one(self):
        assert eigenvalues_lowest(JacobiMatrix([-3.5], []), 1)[0] == -3.5

    def test_hypercube2_reduced(self):
        J = JacobiMatrix([0.0, 0.0, 0.0], [math.sqrt(2), math.sqrt(2)])
        assert np.allclose(eigenvalues_lowest(J, 3, 1e-12), [-2.0, 0.0, 2.0], atol=1e-12)

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            eigenvalues_lowest(path2(), 0)
        with pytest.raises(ValueError):
            eigenvalues_lowest(path2(), 3)

    def test_reports_bracket_width(self):
        vals, widths = bisect_eigenvalues(JacobiMatrix([1.0, 2.0, 1.0], [1.0, 1.0]), 3, 1e-8)
        assert np.all(widths < 1e-8)
        assert np.allclose(vals, [0.0, 1.0, 3.0], atol=1e-8)

    @settings(max_examples=300, deadline=None)
    @given(jacobi())
    def test_agrees_with_oracle(self, J):
        ours = eigenvalues_lowest(J, J.n, 1e-12)
        ref = dense_oracle_spectrum(J).values
        assert np.max(np.abs(ours - ref)) <= 1e-9

    @settings(max_examples=100, deadline=None)
    @given(jacobi())
    def test_strictly_increasing(self, J):
        assert np.all(np.diff(eigenvalues_lowest(J, J.n)) > 0)


class TestEigenpair:
    def test_path2_ground(self):
        p = eigenpair(path2(), 0)
        assert abs(p.value) < 1e-14
        assert np.allclose(p.vector, [1 / math.sqrt(2)] * 2, atol=1e-14)

    def test_path2_excited(self):
        p = eigenpair(path2(), 1)
        assert abs(p.value - 2.0) < 1e-14
        assert np.allclose(p.vector, [1 / math.sqrt(2), -1 / math.sqrt(2)], atol=1e-14)

    def test_path4_second(self):
        J = JacobiMatrix([1.0, 2.0, 2.0, 1.0], [1.0, 1.0, 1.0])
        p = eigenpair(J, 1)
        assert abs(p.value - 2 * (1 - math.cos(math.pi / 4))) < 1e-13
        assert np.all(np.diff(p.vector) < 0)
        # 50-digit reference vector
        ref = [0.65328148243818826, 0.27059805007309849, -0.27059805007309849, -0.65328148243818826]
        assert np.allclose(p.vector, ref, atol=1e-14)

    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            eigenpair(path2(), 2)

    def test_first_component_zero_sign_rule(self):
        # odd eigenvector of the symmetric 3-path has a zero middle; index 1 starts positive
        J = JacobiMatrix([1.0, 2.0, 1.0], [1.0, 1.0])
        v = eigenpair(J, 1).vector
        assert v[0] > 0 and abs(v[1]) < 1e-14

    def test_solver_error_carries_residual(self):
        err = EigenSolverError("failed", 0.5)
        assert err.best_residual == 0.5 and "5.000e-01" in str(err)

    @settings(max_examples=200, deadline=None)
    @given(jacobi())
    def test_contract(self, J):
        s = eigenpairs_lowest(J, J.n)
        scale = np.max(np.abs(J.diag)) + 2 * (np.max(J.offdiag) if J.n > 1 else 0.0)
        V = s.vectors
        for k, p in enumerate(s):
            assert p.index == k
            assert abs(np.linalg.norm(p.vector) - 1.0) <= 1e-12
            assert p.residual <= 1e-12 * scale
            nz = np.flatnonzero(p.vector)
            assert p.vector[nz[0]] > 0
        off = V.T @ V - np.eye(J.n)
        assert np.max(np.abs(off)) <= 1e-9

    @settings(max_examples=200, deadline=None)
    @given(jacobi())
    def test_zero_counts(self, J):
        # eigenvector k has exactly k generalized zeros (oscillation theorem)
        for k, p in enumerate(eigenpairs_lowest(J, J.n)):
            assert len(generalized_zeros(p.vector)) == k

    def test_steep_potential_tail_accuracy(self):
        # entries decay far below machine epsilon relative to the peak
        J = JacobiMatrix(np.arange(30) * 10.0, np.ones(29))
        p = eigenpair(J, 0)
        assert np.all(p.vector > 0)
        assert np.all(np.diff(p.vector) < 0)
        ratio = p.vector[1:] / p.vector[:-1]
        # deep in the tail u_{i+1}/u_i ~ 1 / (diag_i - lambda)
        assert abs(ratio[-2] * (J.diag[-2] - p.value) - 1.0) < 0.05


class TestOracle:
    def test_one(self):
        assert dense_oracle_spectrum(JacobiMatrix([0.0], [])).values.tolist() == [0.0]

    def test_path2(self):
        assert np.allclose(dense_oracle_spectrum(path2()).values, [0.0, 2.0], atol=1e-14)

    def test_path5_closed_form(self):
        J = JacobiMatrix([1.0, 2.0, 2.0, 2.0, 1.0], [1.0] * 4)
        closed = [2 * (1 - math.cos(k * math.pi / 5)) for k in range(5)]
        assert np.allclose(dense_oracle_spectrum(J).values, closed, atol=1e-13)

    def test_cap(self):
        with pytest.raises(OracleSizeError):
            dense_oracle_spectrum(JacobiMatrix(np.zeros(65), np.ones(64)))
        assert len(dense_oracle_spectrum(JacobiMatrix(np.zeros(64), np.ones(63)))) == 64

    @settings(max_examples=100, deadline=None)
    @given(jacobi())
    def test_oracle_matches_numpy(self, J):
        assert np.allclose(dense_oracle_spectrum(J).values, np.linalg.eigvalsh(J.to_dense()), atol=1e-10)
