import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from jordanperturb import (
    CanonicalPair,
    JordanStructure,
    assemble_pencil,
    finite_pencil_eigs,
    reduce_pencil,
    theta_spectrum,
)
from jordanperturb.errors import SingularW
from jordanperturb.pencil import scalar_roots, sort_complex

from conftest import SUITE_SIZES, random_pair


def example1_pair():
    d11 = np.zeros((4, 4), dtype=complex)
    d11[3, 0] = 1.0
    return CanonicalPair(JordanStructure(0.0, (0, 0, 0, 1)), d11)


class TestScalarRoots:
    def test_square_roots_of_4(self):
        roots = scalar_roots(4.0, 2)
        assert np.allclose(sorted(roots, key=lambda z: z.real), [-2.0, 2.0])

    @given(
        hst.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3,
                            allow_nan=False, allow_infinity=False),
        hst.integers(min_value=1, max_value=6),
    )
    @settings(max_examples=80, deadline=None)
    def test_roots_property(self, gamma, rho):
        roots = scalar_roots(gamma, rho)
        assert roots.size == rho
        assert np.abs(roots**rho - gamma).max() <= 1e-10 * max(1.0, abs(gamma))
        # distinct branches and sorted by argument
        args = np.angle(roots)
        assert np.all(np.diff(args) > 0) or rho == 1

    def test_fourth_roots_of_unity(self):
        roots = scalar_roots(1.0, 4)
        expected = {1.0, 1.0j, -1.0, -1.0j}
        assert all(min(abs(r - e) for e in expected) < 1e-14 for r in roots)

    def test_power_property(self):
        for gamma in (2.0 - 1.5j, -3.0, 1e-4j):
            for rho in (1, 2, 3, 5):
                for mu in scalar_roots(gamma, rho):
                    assert abs(mu**rho - gamma) <= 1e-12 * max(1.0, abs(gamma))


class TestAssemble:
    def test_example1(self):
        pair = example1_pair()
        ap = assemble_pencil(pair, 4)
        assert np.array_equal(ap.u0, np.eye(4))
        assert np.all(ap.eu == 0)
        v_expected = np.zeros((4, 4))
        v_expected[0, 1] = v_expected[1, 2] = v_expected[2, 3] = 1.0
        v_expected[3, 0] = 1.0
        assert np.array_equal(ap.v0.real, v_expected)
        assert ap.ev_coeffs == {}  # E_V(z) identically zero here

    def test_zero_d11_shift_only(self):
        st = JordanStructure(0.0, (0, 2))
        pair = CanonicalPair(st, np.zeros((4, 4)))
        ap = assemble_pencil(pair, 2)
        assert ap.ev_coeffs == {}
        assert int(ap.v0.real.sum()) == 2  # just the N superdiagonal

    def test_sizes_1_1_rho1_u_split(self):
        pair = random_pair((1, 1), seed=0)
        ap = assemble_pencil(pair, 1)
        assert np.array_equal(np.diag(ap.u0).real, [1, 0, 1])
        assert np.array_equal(np.diag(ap.eu).real, [0, 1, 0])

    def test_u_plus_eu_is_identity(self):
        for sizes in SUITE_SIZES:
            pair = random_pair(sizes, seed=1)
            for rho in pair.structure.valid_rhos():
                ap = assemble_pencil(pair, rho)
                assert np.array_equal(ap.u0 + ap.eu, np.eye(pair.structure.dim))

    def test_ev_orders_at_least_one(self):
        pair = random_pair((1, 2), seed=2)
        ap = assemble_pencil(pair, 1)
        assert min(ap.ev_coeffs) >= 1
        nz = ap.ev_orders[ap.ev_orders > 0]
        assert nz.size and nz.min() >= 1


class TestReduce:
    def test_example1_theta(self):
        pair = example1_pair()
        rp = reduce_pencil(assemble_pencil(pair, 4))
        expected = np.zeros((4, 4))
        expected[0, 1] = expected[1, 2] = expected[2, 3] = 1.0
        expected[3, 0] = 1.0
        assert np.array_equal(rp.theta.real, expected)
        assert np.array_equal(rp.s_rho, [[1.0]])
        assert rp.w_rho_next.shape == (0, 0)
        st = pair.structure
        assert all(g.shape == (0, st.s(j)) for j, g in enumerate(rp.g_blocks, start=1))

    def test_sizes_1_1_rho2_companion(self):
        pair = random_pair((1, 1), seed=0)
        rp = reduce_pencil(assemble_pencil(pair, 2))
        w2 = pair.d11[2, 1]
        assert np.allclose(rp.theta, [[0.0, 1.0], [w2, 0.0]])
        assert rp.s_rho[0, 0] == w2

    def test_sizes_1_1_rho1_schur_complement(self):
        pair = random_pair((1, 1), seed=0)
        d = pair.d11
        rp = reduce_pencil(assemble_pencil(pair, 1))
        expected = d[0, 0] - d[0, 1] * d[2, 0] / d[2, 1]
        assert abs(rp.s_rho[0, 0] - expected) < 1e-12

    def test_singular_w_raises(self):
        pair = random_pair((1, 1), seed=3)
        d = pair.d11.copy()
        d[2, 1] = 0.0  # kills W_2
        bad = CanonicalPair(pair.structure, d)
        with pytest.raises(SingularW):
            reduce_pencil(assemble_pencil(bad, 1))

    @pytest.mark.parametrize("sizes", SUITE_SIZES)
    def test_permutation_sanity(self, sizes):
        pair = random_pair(sizes, seed=2)
        for rho in pair.structure.valid_rhos():
            rp = reduce_pencil(assemble_pencil(pair, rho))
            for p in (rp.pi_l, rp.pi_r):
                assert set(np.unique(p.real)) <= {0.0, 1.0}
                assert np.allclose(p @ p.conj().T, np.eye(p.shape[0]))

    @pytest.mark.parametrize("sizes", SUITE_SIZES)
    def test_w_factorization(self, sizes):
        pair = random_pair(sizes, seed=0)
        st = pair.structure
        for rho in range(1, st.k):  # rho < k
            rp = reduce_pencil(assemble_pencil(pair, rho))
            s_r = st.s(rho)
            shat = st.shat(rho + 1)
            top = np.block(
                [
                    [rp.s_rho, rp.w_cross],
                    [np.zeros((shat, s_r)), rp.w_rho_next],
                ]
            )
            low = np.block(
                [
                    [np.eye(s_r), np.zeros((s_r, shat))],
                    [-rp.g_blocks[rho - 1], np.eye(shat)],
                ]
            )
            resid = np.linalg.norm(rp.w_rho - top @ low)
            assert resid <= 1e-12 * max(1.0, np.linalg.norm(rp.w_rho))

    @pytest.mark.parametrize("sizes", SUITE_SIZES)
    def test_final_identity(self, sizes):
        pair = random_pair(sizes, seed=1)
        for rho in pair.structure.valid_rhos():
            rp = reduce_pencil(assemble_pencil(pair, rho))
            for z, mu in [(1e-1, 0.37 + 0.21j), (1e-2, -0.53 + 0.11j)]:
                assert rp.identity_residual(z, mu) <= 1e-12

    def test_void_rho_block(self):
        # rho with s_rho = 0: Theta is empty but the reduction still holds
        pair = random_pair((1, 0, 1), seed=0)
        rp = reduce_pencil(assemble_pencil(pair, 2))
        assert rp.theta.shape == (0, 0) and rp.s_rho.shape == (0, 0)
        assert rp.identity_residual(1e-1, 0.2 + 0.1j) <= 1e-12
        st = pair.structure
        shat = st.shat(3)
        top = np.block(
            [[rp.s_rho, rp.w_cross], [np.zeros((shat, 0)), rp.w_rho_next]]
        )
        low = np.block([[np.eye(0), np.zeros((0, shat))], [-rp.g_blocks[1], np.eye(shat)]])
        assert np.linalg.norm(rp.w_rho - top @ low) <= 1e-12
        assert finite_pencil_eigs(pair, 2).size == 0

    def test_vhat_block_structure(self):
        # V-hat is [[V11, 0, 0], [V21, Theta, V23], [0, 0, V33]] with V11 nilpotent
        pair = random_pair((1, 2), seed=0)
        for rho in (1, 2):
            rp = reduce_pencil(assemble_pencil(pair, rho))
            g1, g2, g3 = rp.g1, rp.g2, rp.g3
            scale = max(1.0, np.linalg.norm(rp.v_hat))
            assert np.all(rp.v_hat[g1, g2] == 0)
            assert np.all(rp.v_hat[g1, g3] == 0)
            assert np.all(rp.v_hat[g3, g1] == 0)
            # the eliminated Z block vanishes only to roundoff
            assert np.linalg.norm(rp.v_hat[g3, g2]) <= 1e-13 * scale
            v11 = rp.v_hat[g1, g1]
            if v11.shape[0]:
                assert np.linalg.norm(np.linalg.matrix_power(v11, v11.shape[0])) == 0
            v33 = rp.v_hat[g3, g3]
            if v33.shape[0]:
                assert np.linalg.cond(v33) < 1e8


class TestSpectra:
    def test_example1_theta_spectrum(self):
        pair = example1_pair()
        rp = reduce_pencil(assemble_pencil(pair, 4))
        spec = theta_spectrum(rp)
        expected = sort_complex([1.0, 1.0j, -1.0, -1.0j])
        assert np.abs(spec - expected).max() < 1e-10

    def test_nongeneric_zero_s(self):
        st = JordanStructure(0.0, (0, 1))
        pair = CanonicalPair(st, np.zeros((2, 2)))
        rp = reduce_pencil(assemble_pencil(pair, 2))  # rho = k: no inversion
        assert np.abs(theta_spectrum(rp)).max() == 0.0

    def test_square_roots(self):
        st = JordanStructure(0.0, (0, 1))
        d = np.zeros((2, 2), dtype=complex)
        d[1, 0] = 4.0  # W_2 = B^{(22)}_{21} = 4
        pair = CanonicalPair(st, d)
        rp = reduce_pencil(assemble_pencil(pair, 2))
        spec = theta_spectrum(rp)
        assert np.allclose(sorted(spec, key=lambda z: z.real), [-2.0, 2.0])

    def test_example1_finite_pencil(self):
        assert np.allclose(finite_pencil_eigs(example1_pair(), 4), [1.0])

    def test_decoupled_block_diagonal(self):
        # W_rho block diagonal (cross/Z blocks zero): finite eigenvalues are
        # those of the leading s_rho x s_rho block
        pair = random_pair((1, 1), seed=5)
        d = pair.d11.copy()
        d[0, 1] = 0.0  # W_{1,2}
        d[2, 0] = 0.0  # Z_{2,1}
        pair = CanonicalPair(pair.structure, d)
        vals = finite_pencil_eigs(pair, 1)
        assert np.allclose(vals, [d[0, 0]])

    @pytest.mark.parametrize("sizes", SUITE_SIZES)
    def test_epen_spectrum_split(self, sizes):
        pair = random_pair(sizes, seed=3)
        for rho in pair.structure.valid_rhos():
            rp = reduce_pencil(assemble_pencil(pair, rho))
            pen = finite_pencil_eigs(pair, rho)
            s_eigs = sort_complex(np.linalg.eigvals(rp.s_rho))
            assert np.abs(pen - s_eigs).max() <= 1e-10 * max(1.0, np.abs(s_eigs).max())

    @pytest.mark.parametrize("sizes", SUITE_SIZES)
    def test_root_property(self, sizes):
        pair = random_pair(sizes, seed=2)
        for rho in pair.structure.valid_rhos():
            rp = reduce_pencil(assemble_pencil(pair, rho))
            spec = theta_spectrum(rp)
            roots = np.concatenate(
                [scalar_roots(g, rho) for g in np.linalg.eigvals(rp.s_rho)]
            )
            cost = np.abs(spec[:, None] - roots[None, :])
            from scipy.optimize import linear_sum_assignment

            r, c = linear_sum_assignment(cost)
            assert cost[r, c].max() <= 1e-10 * max(1.0, np.abs(roots).max())
