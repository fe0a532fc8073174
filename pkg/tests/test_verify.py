import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from jordanperturb import (
    CanonicalPair,
    JordanStructure,
    SweepPlan,
    assemble_pencil,
    complement_pair,
    match_eigenvalues,
    oracle_eigs,
    reduce_pencil,
    select_subspace,
    slope_fit,
    solve_riccati,
    verify_all,
)
from jordanperturb.errors import CardinalityMismatch, InsufficientSamples
from jordanperturb.verify import exact_subspace_basis

from conftest import random_pair


def example1_pair():
    d11 = np.zeros((4, 4), dtype=complex)
    d11[3, 0] = 1.0
    return CanonicalPair(JordanStructure(0.0, (0, 0, 0, 1)), d11)


class TestSweepPlan:
    def test_default_geometric(self):
        plan = SweepPlan.default(2)
        assert len(plan.t_values) == 13
        assert plan.t_values[0] == pytest.approx(1e-2)
        assert plan.t_values[-1] == pytest.approx(1e-8)
        ratios = np.diff(np.log(plan.t_values))
        assert np.allclose(ratios, ratios[0])

    def test_default_clamps_rho1_floor(self):
        plan = SweepPlan.default(1)
        floor = 10 * np.finfo(float).eps ** 0.5
        assert all(t > floor for t in plan.t_values)

    def test_rejects_increasing(self):
        with pytest.raises(ValueError):
            SweepPlan(t_values=(1e-8, 1e-2), rho=2)

    def test_rejects_below_floor(self):
        with pytest.raises(ValueError):
            SweepPlan(t_values=(1e-2, 1e-12), rho=1)


class TestOracleEigs:
    def test_example1(self):
        pair = example1_pair()
        w = oracle_eigs(pair.a_matrix(), pair.d11, 1e-4, 0.0, radius_exponent=1 / 5)
        expected = np.array([1e-1 * np.exp(0.5j * np.pi * j) for j in range(4)])
        _, err = match_eigenvalues(expected, w)
        assert err <= 1e-9 * 1e-1

    def test_zero_d(self):
        a = np.diag([2.0, 2.0, 5.0]).astype(complex)
        w = oracle_eigs(a, np.zeros((3, 3)), 1e-4, 2.0, radius_exponent=0.5)
        assert len(w) == 2 and np.allclose(w, 2.0)

    def test_t_zero(self):
        a = np.diag([2.0, 5.0]).astype(complex)
        w = oracle_eigs(a, np.ones((2, 2)), 0.0, 2.0, radius_exponent=0.5)
        assert len(w) == 1 and abs(w[0] - 2.0) < 1e-12


class TestMatchEigenvalues:
    def test_identical(self):
        vals = np.array([1.0, 2.0j, -3.0])
        pairs, err = match_eigenvalues(vals, vals)
        assert err == 0.0 and sorted(pairs) == [(0, 0), (1, 1), (2, 2)]

    def test_order_invariant(self):
        a = np.array([1.0, 2.0j, -3.0])
        b = a[[2, 0, 1]]
        _, err = match_eigenvalues(a, b)
        assert err == 0.0

    def test_cardinality(self):
        with pytest.raises(CardinalityMismatch):
            match_eigenvalues([1.0], [1.0, 2.0])

    def test_optimality_vs_identity_pairing(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=6) + 1j * rng.normal(size=6)
        b = a[rng.permutation(6)] + 1e-3 * rng.normal(size=6)
        pairs, err = match_eigenvalues(a, b)
        identity_cost = np.abs(a - b).max()
        assert err <= identity_cost + 1e-15

    @given(hst.permutations(list(range(5))))
    @settings(max_examples=30, deadline=None)
    def test_permutation_invariance(self, perm):
        vals = np.array([0.0, 1.0, 2.0j, -1.0 - 1.0j, 3.0 + 0.5j])
        _, err = match_eigenvalues(vals, vals[perm])
        assert err == 0.0


class TestSlopeFit:
    def test_exact_linear(self):
        ts = np.geomspace(1e-2, 1e-8, 8)
        rep = slope_fit([(t, t) for t in ts], claimed=1.0)
        assert rep.passed and rep.fitted_slope == pytest.approx(1.0)
        assert rep.r_squared == pytest.approx(1.0)

    def test_half_power(self):
        ts = np.geomspace(1e-2, 1e-8, 8)
        rep = slope_fit([(t, 3 * t**0.5) for t in ts], claimed=0.5)
        assert rep.passed and rep.fitted_slope == pytest.approx(0.5)

    def test_fail_when_slope_short(self):
        ts = np.geomspace(1e-2, 1e-8, 8)
        rep = slope_fit([(t, t**0.5) for t in ts], claimed=1.0)
        assert not rep.passed

    def test_insufficient_after_floor(self):
        samples = [(1e-2, 1e-20), (1e-3, 1e-20), (1e-4, 1e-20), (1e-5, 1e-20), (1e-6, 1e-20)]
        with pytest.raises(InsufficientSamples):
            slope_fit(samples, claimed=1.0, scale=1.0)

    def test_floor_samples_excluded(self):
        ts = list(np.geomspace(1e-2, 1e-6, 6))
        samples = [(t, t) for t in ts] + [(1e-10, 1e-30), (1e-11, 1e-30)]
        rep = slope_fit(samples, claimed=1.0)
        assert rep.passed and rep.fitted_slope == pytest.approx(1.0, abs=1e-6)


class TestVerifyAll:
    def test_example1_all_pass(self):
        pair = example1_pair()
        reports = verify_all(pair, 4)
        assert reports and all(r.passed for r in reports)
        eig_reports = [r for r in reports if r.quantity.startswith("eig")]
        # the prediction is exact here: the eigenvalue report is floor-limited
        assert eig_reports and all(r.floor_limited for r in eig_reports)

    def test_zero_perturbation_degenerate(self):
        st = JordanStructure(0.0, (0, 2))
        pair = CanonicalPair(st, np.zeros((4, 4)))
        reports = verify_all(pair, 2)
        assert len(reports) == 1
        assert reports[0].floor_limited and reports[0].passed

    def test_random_case_passes(self):
        pair = random_pair((1, 1), seed=2)
        for rho in (1, 2):
            reports = verify_all(pair, rho)
            assert all(r.passed for r in reports), [
                (r.quantity, r.fitted_slope, r.claimed_slope) for r in reports if not r.passed
            ]

    def test_determinism(self):
        pair = random_pair((0, 2), seed=1)
        r1 = verify_all(pair, 2)
        r2 = verify_all(pair, 2)
        assert len(r1) == len(r2)
        for a, b in zip(r1, r2):
            assert a == b

    def test_threads_env_consistent(self, monkeypatch):
        pair = random_pair((0, 2), seed=1)
        base = verify_all(pair, 2)
        monkeypatch.setenv("JORDANPERTURB_THREADS", "4")
        threaded = verify_all(pair, 2)
        assert len(base) == len(threaded)
        for a, b in zip(base, threaded):
            assert a.quantity == b.quantity and a.passed == b.passed
            assert a.samples == b.samples

    def test_negative_control_perturb_h1(self):
        pair = random_pair((0, 2), seed=2)
        reports = verify_all(pair, 2, perturb_h1=1e-3)
        resid = [r for r in reports if r.quantity.startswith("subspace-resid")]
        assert resid and all(not r.passed for r in resid)

    def test_negative_control_swap_root(self):
        pair = random_pair((0, 2), seed=2)
        reports = verify_all(pair, 2, swap_root=True)
        resid = [r for r in reports if r.quantity.startswith("subspace-resid")]
        assert resid and all(not r.passed for r in resid)

    def test_swap_root_needs_multiple_branches(self):
        pair = random_pair((1, 1), seed=0)
        with pytest.raises(ValueError):
            verify_all(pair, 1, swap_root=True)

    def test_exact_subspace_tracks_oracle(self):
        # the exact basis from the riccati route satisfies the invariant
        # relation against A + tD at solver precision
        pair = random_pair((1, 2), seed=1)
        rho = 2
        ap = assemble_pencil(pair, rho)
        rp = reduce_pencil(ap)
        g0 = np.linalg.eigvals(rp.s_rho)[0]
        sel = select_subspace(rp, lambda lam: abs(lam - g0) < 1e-6 * max(1, abs(g0)), 0)
        comp = complement_pair(rp, sel)
        z = 1e-2
        ric = solve_riccati(ap, rp, z)
        h, rep = exact_subspace_basis(ric, sel, comp)
        t = z**rho
        c = pair.structure.lambda0 * np.eye(sel.r) + z * rep
        resid = np.linalg.norm(pair.perturbed(t) @ h - h @ c)
        assert resid <= 1e-11 * max(1.0, np.linalg.norm(h))
