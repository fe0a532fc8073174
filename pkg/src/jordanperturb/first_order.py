"""First fractional-order corrections and the exact small-z refinement.

Given a selected, separated eigenvalue set Omega of Theta_rho, the perturbed
invariant-subspace basis and its eigenvalue block admit one more term:

    H(t) = H0 + t^(1/rho) H1 + O(t^(2/rho)),
    C(t) = lambda0 I + t^(1/rho) Omega + t^(2/rho) Delta11 + O(t^(3/rho)).

The coefficients come from the first-order solutions of two structured
Sylvester systems in the reduced pencil coordinates (closed forms below),
followed by a biorthogonal compression of the resulting Theta perturbation
and one small Sylvester solve for the complement coupling Y.

``solve_riccati`` keeps all orders instead: at a fixed z it solves the exact
coupling equations by fixed-point iteration, yielding the exact perturbed
block Theta-hat(z) and an exact invariant-subspace matrix, which the
verification module uses as ground truth for every claimed fractional order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as la

from . import core_linalg as cl
from .errors import ClusterNotSeparated, NoConvergence, NotSemisimple, SingularNormalizer
from .expansion import (
    CLUSTER_GAP_REL,
    SubspaceSelection,
    _cluster_bases,
    _matrix_root,
    blk_diag,
    scalar_roots,
)
from .pencil import AssembledPencil, ReducedPencil
from .structure import CanonicalPair, block

__all__ = [
    "ComplementPair",
    "FirstOrderExpansion",
    "RiccatiSolution",
    "ThetaPerturbation",
    "complement_pair",
    "theta_perturbation",
    "first_order_expansion",
    "semisimple_expansion",
    "solve_riccati",
]


@dataclass(frozen=True)
class ComplementPair:
    """Right/left bases splitting Theta_rho into Omega and its complement.

    ``psi`` and ``psi_c`` stack to the exact inverse of [phi phi_c]; the
    normalizers m / m_c realize that inverse from the left Schur factors.
    """

    q2: np.ndarray = field(repr=False)
    omega_c: np.ndarray = field(repr=False)
    q1t: np.ndarray = field(repr=False)
    q2t: np.ndarray = field(repr=False)
    m: np.ndarray = field(repr=False)
    m_c: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    psi_c: np.ndarray = field(repr=False)
    phi_c: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class FirstOrderExpansion:
    """H1, Delta11 = Omega_1 and the intermediate first-order objects."""

    rho: int
    lambda0: complex
    omega: np.ndarray = field(repr=False)
    h0: np.ndarray = field(repr=False)
    h1: np.ndarray = field(repr=False)
    delta11: np.ndarray = field(repr=False)
    delta12: np.ndarray = field(repr=False)
    delta21: np.ndarray = field(repr=False)
    delta22: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    c_tilde: np.ndarray = field(repr=False)
    c_hat: np.ndarray = field(repr=False)
    c_cor: np.ndarray = field(repr=False)          # C = C-hat + G_{rho-1} correction
    hatb_terms: dict = field(repr=False)
    delta_coef: np.ndarray = field(repr=False)     # first-order Theta perturbation
    x1_coef: np.ndarray = field(repr=False)
    x2_coef: np.ndarray = field(repr=False)

    def c_of(self, t: float) -> np.ndarray:
        r = self.omega.shape[0]
        z = t ** (1.0 / self.rho)
        return self.lambda0 * cl.eye(r) + z * self.omega + z**2 * self.delta11

    def h_of(self, t: float) -> np.ndarray:
        return self.h0 + t ** (1.0 / self.rho) * self.h1


@dataclass(frozen=True)
class RiccatiSolution:
    """Exact deflation data of the scaled pencil at one fixed z."""

    z: float
    x1: np.ndarray = field(repr=False)
    x2: np.ndarray = field(repr=False)
    theta_hat: np.ndarray = field(repr=False)
    iterations: int = 0
    residual: float = 0.0
    reduced: ReducedPencil = field(default=None, repr=False)

    def invariant_matrix(self) -> np.ndarray:
        """X-tilde = R(z) Pi_R G [X1; I; X2], satisfying
        (N + z^rho D11) X-tilde = X-tilde (z Theta-hat)."""
        r = self.reduced
        n2 = r.n2
        stack = np.vstack([self.x1, cl.eye(n2), self.x2])
        return r.assembled.scaling.r_matrix(self.z) @ (r.pi_r @ r.g @ stack)


def complement_pair(
    reduced: ReducedPencil, sel: SubspaceSelection, gap_tol_rel: float = CLUSTER_GAP_REL
) -> ComplementPair:
    """Complementary invariant subspace of Theta_rho plus left factors.

    The complement collects, for every eigenvalue cluster of S_rho, the root
    branches not chosen by ``sel``; its basis reuses the same right Schur
    block Q_i for each branch.  Raises :class:`SingularNormalizer` when a
    power-sum normalizer M or M_c is numerically singular.
    """
    rho = reduced.rho
    bases = sel.clusters
    chosen = set(sel.chosen)
    comp = [
        (ci, b) for ci in range(len(bases)) for b in range(rho) if (ci, b) not in chosen
    ]

    s_dim = reduced.s_rho.shape[0]

    def assemble(pairs):
        if not pairs:
            return cl.zeros(s_dim, 0), cl.zeros(0, 0), cl.zeros(0, s_dim)
        qs, oms, qts = [], [], []
        for ci, b in pairs:
            cb = bases[ci]
            from .expansion import _branch_rotation

            rot = _branch_rotation(cb.gamma, rho, b)
            qs.append(cb.q)
            oms.append(_matrix_root(cb.s11, rho, rot))
            qts.append(cb.qt)
        return np.hstack(qs), blk_diag(oms), np.vstack(qts)

    q1, omega, q1t = assemble(list(sel.chosen))
    q2, omega_c, q2t = assemble(comp)

    if omega.shape[0] and omega_c.shape[0]:
        w1 = cl.eig(omega)[0]
        w2 = cl.eig(omega_c)[0]
        gap = np.abs(w1[:, None] - w2[None, :]).min()
        scale = max(np.abs(w1).max(), np.abs(w2).max(), 1e-300)
        if gap <= gap_tol_rel * scale:
            raise ClusterNotSeparated(
                f"Lambda(Omega) and Lambda(Omega_c) separated by only {gap:.3e}"
            )

    def normalizer(om, qt, q, name):
        r = om.shape[0]
        if r == 0:
            return cl.zeros(0, 0)
        acc = cl.zeros(r, r)
        for j in range(rho):
            acc += (
                np.linalg.matrix_power(om, rho - 1 - j)
                @ qt
                @ q
                @ np.linalg.matrix_power(om, j)
            )
        if cl.smallest_singular_value(acc) < 1e-12 * max(1.0, cl.frob(acc)):
            raise SingularNormalizer(f"power-sum normalizer {name} is singular")
        return np.linalg.inv(acc)

    m = normalizer(omega, q1t, q1, "M")
    m_c = normalizer(omega_c, q2t, q2, "M_c")

    def left_rows(mm, om, qt):
        r = om.shape[0]
        if r == 0:
            return cl.zeros(0, rho * s_dim)
        return mm @ np.hstack(
            [np.linalg.matrix_power(om, rho - 1 - j) @ qt for j in range(rho)]
        )

    psi = left_rows(m, omega, q1t)
    psi_c = left_rows(m_c, omega_c, q2t)
    phi_c = (
        np.vstack([q2 @ np.linalg.matrix_power(omega_c, j) for j in range(rho)])
        if q2.shape[1]
        else cl.zeros(rho * s_dim, 0)
    )
    return ComplementPair(
        q2=q2, omega_c=omega_c, q1t=q1t, q2t=q2t, m=m, m_c=m_c,
        psi=psi, psi_c=psi_c, phi_c=phi_c,
    )


def _bhat(reduced: ReducedPencil, j: int, ell: int, i: int) -> np.ndarray:
    """B-hat_{i1}^{(j,ell)}: the leading-column block corrected by the
    elimination, B_{i1}^{(j,ell)} + [B_{i1}^{(j,rho+1)} .. B_{i1}^{(j,k)}] G_ell."""
    pair = reduced.pair
    st = pair.structure
    rho, k = reduced.rho, st.k
    b = block(pair, j, ell, i, 1)
    if k > rho and st.shat(rho + 1) > 0:
        tail = np.hstack([block(pair, j, q, i, 1) for q in range(rho + 1, k + 1)])
        b = b + tail @ reduced.g_blocks[ell - 1]
    return b


def _closed_form_x_blocks(reduced: ReducedPencil):
    """Closed-form first-order solutions of the two reduced Sylvester systems
    (valid for rho >= 2); returns (x1_coef, x2_coef, c_tilde, c_hat, c_cor)."""
    pair = reduced.pair
    st = pair.structure
    rho, k = reduced.rho, st.k
    s = st.s
    s_rho = s(rho)
    n2 = rho * s_rho
    shat = st.shat(rho + 1)
    s_rho_mat = reduced.s_rho

    def s_rho_solve_right(mat):
        # mat @ inv(S_rho)
        return la.solve(s_rho_mat.T, mat.T).T if mat.size else mat.reshape(mat.shape[0], s_rho)

    # --- X1: only the superdiagonal of block rho-1 survives at first order.
    x1_parts = []
    for i in range(1, rho):
        blk_i = cl.zeros(i * s(i), n2)
        if i == rho - 1 and s(i) > 0 and s_rho > 0:
            cpr = s_rho_solve_right(_bhat(reduced, rho - 1, rho, rho - 1))
            for ell in range(1, rho):
                blk_i[(ell - 1) * s(i) : ell * s(i), ell * s_rho : (ell + 1) * s_rho] = cpr
        x1_parts.append(blk_i)
    x1c = np.vstack(x1_parts) if x1_parts else cl.zeros(0, n2)

    # --- C-tilde, C-hat and the corrected C.
    ct_rows = []
    for i in range(rho + 1, k + 1):
        ci = cl.zeros(s(i), s_rho)
        if s(i) and s_rho:
            if i == rho + 1:
                ci += reduced.g_sub(rho + 1, rho) @ s_rho_mat
            ci -= _bhat(reduced, i, rho, i - 1)
            ci -= block(pair, i, rho, i, 2)
            for j in range(rho + 1, k + 1):
                ci -= block(pair, i, j, i, 2) @ reduced.g_sub(j, rho)
        ct_rows.append(ci)
    c_tilde = np.vstack(ct_rows) if ct_rows else cl.zeros(0, s_rho)
    c_hat = la.solve(reduced.w_rho_next, c_tilde) if shat else cl.zeros(0, s_rho)
    c_cor = c_hat
    if rho >= 2 and s(rho - 1) > 0 and shat:
        c_cor = c_hat + reduced.g_blocks[rho - 2] @ s_rho_solve_right(
            _bhat(reduced, rho - 1, rho, rho - 1)
        )

    # --- X2: eigenvector-row group then the remaining rows of blocks > rho.
    x_w = cl.zeros(shat, n2)
    if shat and s_rho:
        x_w[:, s_rho : 2 * s_rho] = c_hat
    x2_parts = [x_w]
    for i in range(rho + 1, k + 1):
        blk_i = cl.zeros((i - 1) * s(i), n2)
        if s(i) and s_rho:
            gi = reduced.g_sub(i, rho)
            if i == rho + 1:
                for ell in range(1, rho):
                    blk_i[(ell - 1) * s(i) : ell * s(i), ell * s_rho : (ell + 1) * s_rho] = gi
                blk_i[(rho - 1) * s(i) : rho * s(i), :s_rho] = (
                    gi @ s_rho_mat - _bhat(reduced, rho + 1, rho, rho)
                )
            else:
                blk_i[: s(i), s_rho : 2 * s_rho] = gi
                blk_i[(i - 2) * s(i) : (i - 1) * s(i), :s_rho] = -_bhat(reduced, i, rho, i - 1)
        x2_parts.append(blk_i)
    x2c = np.vstack(x2_parts)
    return x1c, x2c, c_tilde, c_hat, c_cor


def _nilpotent_sylvester_left(v, theta, rhs):
    """X with v X - X theta = -rhs, for nilpotent v and invertible theta."""
    if v.shape[0] == 0 or rhs.size == 0:
        return cl.zeros(v.shape[0], theta.shape[0])
    term = la.solve(theta.T, rhs.T).T
    acc = term.copy()
    for _ in range(v.shape[0] + 1):
        term = la.solve(theta.T, (v @ term).T).T
        if cl.frob(term) <= 1e-3 * cl.EPS * (cl.frob(acc) + 1.0):
            break
        acc += term
    return acc


def _nilpotent_sylvester_right(v33, u33, theta, rhs):
    """X with v33 X - u33 X theta = rhs; the pencil (u33, v33) has only
    infinite eigenvalues, so the Neumann series in v33^{-1} u33 terminates."""
    if v33.shape[0] == 0 or rhs.size == 0:
        return cl.zeros(v33.shape[0], theta.shape[0])
    term = la.solve(v33, rhs)
    acc = term.copy()
    for _ in range(v33.shape[0] + 1):
        term = la.solve(v33, u33 @ term) @ theta
        if cl.frob(term) <= 1e-3 * cl.EPS * (cl.frob(acc) + 1.0):
            break
        acc += term
    return acc


def _recursion_x_blocks(reduced: ReducedPencil):
    """First-order X blocks from the structured Sylvester solves themselves;
    used where the closed-form displays do not apply (rho = 1)."""
    v1h = reduced.hat_v1()
    euh = reduced.hat_eu()
    g1, g2, g3 = reduced.g1, reduced.g2, reduced.g3
    theta = reduced.theta
    v11 = reduced.v_hat[g1, g1]
    v33 = reduced.v_hat[g3, g3]
    u33 = reduced.u_hat[g3, g3]
    e12 = v1h[g1, g2]
    e32 = v1h[g3, g2]
    eu32 = euh[g3, g2]
    x1c = _nilpotent_sylvester_left(v11, theta, e12)
    x2c = _nilpotent_sylvester_right(v33, u33, theta, -(e32 - eu32 @ theta))
    return x1c, x2c


@dataclass(frozen=True)
class ThetaPerturbation:
    """Selection-independent first-order data: Theta-hat(z) = Theta + z*delta_coef + O(z^2)."""

    delta_coef: np.ndarray = field(repr=False)
    x1_coef: np.ndarray = field(repr=False)
    x2_coef: np.ndarray = field(repr=False)
    c_tilde: np.ndarray = field(repr=False)
    c_hat: np.ndarray = field(repr=False)
    c_cor: np.ndarray = field(repr=False)


def theta_perturbation(reduced: ReducedPencil) -> ThetaPerturbation:
    """First-order perturbation of Theta_rho and the X blocks behind it.

    Uses the closed forms for rho >= 2 and the structured recursion for
    rho = 1 (where several displayed formulas degenerate).
    """
    st = reduced.structure
    rho = reduced.rho
    s_rho = st.s(rho)
    if rho >= 2:
        x1c, x2c, c_tilde, c_hat, c_cor = _closed_form_x_blocks(reduced)
    else:
        x1c, x2c = _recursion_x_blocks(reduced)
        shat = st.shat(rho + 1)
        c_hat = x2c[:shat, :s_rho].copy()
        c_tilde = reduced.w_rho_next @ c_hat if shat else cl.zeros(0, s_rho)
        c_cor = c_hat

    v1h = reduced.hat_v1()
    g1, g2, g3 = reduced.g1, reduced.g2, reduced.g3
    e22 = v1h[g2, g2]
    v21 = reduced.v_hat[g2, g1]
    v23 = reduced.v_hat[g2, g3]
    delta_coef = e22 + v21 @ x1c + v23 @ x2c
    return ThetaPerturbation(
        delta_coef=delta_coef, x1_coef=x1c, x2_coef=x2c,
        c_tilde=c_tilde, c_hat=c_hat, c_cor=c_cor,
    )


def first_order_expansion(
    reduced: ReducedPencil,
    sel: SubspaceSelection,
    comp: ComplementPair,
    pair: CanonicalPair | None = None,
    xi: np.ndarray | None = None,
) -> FirstOrderExpansion:
    """Assemble H1 and Delta11 for the selected subspace.

    The Theta perturbation is compressed through the biorthogonal pair and
    the complement coupling Y solves ``Omega_c Y - Y Omega + Delta21 = 0``.

    ``xi`` expresses H0 and H1 in the coordinates of a general problem
    (columns of the spectral transformation).  The cross-block coupling of a
    general problem enters the basis only at order t, so for rho >= 2 the
    returned pair still satisfies the subspace relation through t^(2/rho);
    at rho = 1 that coupling is itself first order and the relation then
    holds through t only (same truncation caveat as ``effective_d11``).
    """
    if pair is None:
        pair = reduced.pair
    st = pair.structure
    rho, k = reduced.rho, st.k
    s_rho = st.s(rho)
    n2 = rho * s_rho
    r = sel.r

    tp = theta_perturbation(reduced)
    x1c, x2c = tp.x1_coef, tp.x2_coef
    c_tilde, c_hat, c_cor = tp.c_tilde, tp.c_hat, tp.c_cor
    delta_coef = tp.delta_coef

    left = np.vstack([comp.psi, comp.psi_c])
    right = np.hstack([sel.phi, comp.phi_c])
    dd = left @ delta_coef @ right
    delta11 = dd[:r, :r]
    delta12 = dd[:r, r:]
    delta21 = dd[r:, :r]
    delta22 = dd[r:, r:]

    if comp.omega_c.shape[0] and r:
        y = cl.solve_sylvester(comp.omega_c, sel.omega, delta21)
    else:
        y = cl.zeros(comp.omega_c.shape[0], r)

    # H0 and H1 as the exact z^0 and z^1 coefficients of Xi R(z) F(z) Phi-hat(z).
    mdim = st.dim
    f0 = reduced.pi_r @ reduced.g @ np.vstack(
        [cl.zeros(reduced.n1, n2), cl.eye(n2), cl.zeros(mdim - reduced.n1 - n2, n2)]
    )
    f1 = reduced.pi_r @ reduced.g @ np.vstack([x1c, cl.zeros(n2, n2), x2c])
    scaling = reduced.assembled.scaling
    p0 = scaling.right_power_selector(0)
    p1 = scaling.right_power_selector(1)
    h0_raw = p0 @ f0 @ sel.phi
    h1_raw = p1 @ f0 @ sel.phi + p0 @ (f1 @ sel.phi + f0 @ comp.phi_c @ y)
    if xi is not None:
        ximat = cl.as_matrix(xi)
        h0_raw = ximat @ h0_raw
        h1_raw = ximat @ h1_raw

    hatb = {}
    if rho >= 2 and s_rho:
        hatb["b_prev1_rho_rho"] = _bhat(reduced, rho, rho, rho - 1)
        hatb["b_rho2_rho_rho"] = delta_coef[(rho - 1) * s_rho : rho * s_rho, s_rho : 2 * s_rho]
        if st.s(rho - 1) > 0:
            hatb["b_prev1_prev_rho"] = _bhat(reduced, rho - 1, rho, rho - 1)
        hatb["b_jprev1_j_rho"] = tuple(
            _bhat(reduced, j, rho, j - 1) for j in range(rho + 1, k + 1)
        )

    return FirstOrderExpansion(
        rho=rho,
        lambda0=st.lambda0,
        omega=sel.omega,
        h0=h0_raw,
        h1=h1_raw,
        delta11=delta11,
        delta12=delta12,
        delta21=delta21,
        delta22=delta22,
        y=y,
        c_tilde=c_tilde,
        c_hat=c_hat,
        c_cor=c_cor,
        hatb_terms=hatb,
        delta_coef=delta_coef,
        x1_coef=x1c,
        x2_coef=x2c,
    )


def semisimple_expansion(
    reduced: ReducedPencil,
    gamma: complex,
    root_index: int,
    pair: CanonicalPair | None = None,
    xi: np.ndarray | None = None,
    gap_tol_rel: float = CLUSTER_GAP_REL,
) -> FirstOrderExpansion:
    """Special case: gamma semi-simple with multiplicity r, Omega = mu I_r.

    Uses the scalar closed form for Delta11 when rho >= 2,

        Delta11 = (rho mu^(rho-2))^{-1} Qt (Bhat_{rho-1,1} + Bhat_{rho,2}) Q,

    which coincides with the general biorthogonal compression; the identity
    is asserted numerically.  Raises :class:`NotSemisimple` when the
    geometric multiplicity falls short.
    """
    if pair is None:
        pair = reduced.pair
    rho = reduced.rho
    bases, tol = _cluster_bases(reduced, gap_tol_rel)
    gaps = [abs(cb.gamma - gamma) for cb in bases]
    ci = int(np.argmin(gaps))
    cb = bases[ci]
    if gaps[ci] > max(10 * tol, 1e-8 * max(1.0, abs(gamma))):
        raise ValueError(f"gamma={gamma:.6g} is not an eigenvalue of S_rho")
    r = cb.count
    svals = la.svdvals(reduced.s_rho - cb.gamma * cl.eye(reduced.s_rho.shape[0]))
    geo = int(np.sum(svals < max(10 * tol, 1e-10 * max(1.0, float(svals[0])))))
    if geo != r:
        raise NotSemisimple(
            f"gamma={cb.gamma:.6g}: geometric multiplicity {geo} < algebraic {r}"
        )

    mu = complex(scalar_roots(cb.gamma, rho)[root_index])
    omega = mu * cl.eye(r)
    phi = np.vstack([cb.q * mu**j for j in range(rho)])
    sel = SubspaceSelection(
        rho=rho, q1=cb.q, omega=omega, phi=phi, clusters=bases,
        chosen=((ci, int(root_index)),),
    )
    comp = complement_pair(reduced, sel, gap_tol_rel)
    fo = first_order_expansion(reduced, sel, comp, pair, xi)

    if rho >= 2:
        s_rho = reduced.structure.s(rho)
        b1 = fo.hatb_terms.get("b_prev1_rho_rho", cl.zeros(s_rho, s_rho))
        b2 = fo.hatb_terms.get("b_rho2_rho_rho", cl.zeros(s_rho, s_rho))
        closed = (1.0 / (rho * mu ** (rho - 2))) * (cb.qt @ (b1 + b2) @ cb.q)
        if cl.frob(closed - fo.delta11) > 1e-8 * max(1.0, cl.frob(closed)):
            raise AssertionError("semi-simple Delta11 closed form disagrees with compression")
        fo = replace(fo, delta11=closed)
    return fo


def solve_riccati(
    p: AssembledPencil,
    r: ReducedPencil,
    z: float,
    tol: float | None = None,
    max_iter: int = 200,
) -> RiccatiSolution:
    """Exact deflating-subspace coupling at a fixed z by fixed-point iteration.

    Starting from X1 = X2 = 0, each sweep freezes the current Theta-hat and
    right-hand sides and re-solves the two structured Sylvester equations.
    Converges linearly at rate O(z); raises :class:`NoConvergence` when z is
    too large for contraction.
    """
    if z <= 0:
        raise ValueError("z must be positive")
    uz = r.u_hat_of(z)
    vz = r.v_hat_of(z)
    ev = vz - r.v_hat
    eu = uz - r.u_hat
    g1, g2, g3 = r.g1, r.g2, r.g3
    n1, n2 = r.n1, r.n2
    n3 = r.structure.dim - n1 - n2

    scale = max(1.0, cl.frob(vz))
    if tol is None:
        tol = 1e-12 * scale

    x1 = cl.zeros(n1, n2)
    x2 = cl.zeros(n3, n2)
    theta_hat = r.theta.copy()
    resid = np.inf
    first_resid = None
    eye2 = cl.eye(n2)
    for it in range(max_iter + 1):
        stack = np.vstack([x1, eye2, x2])
        theta_hat = vz[g2, :] @ stack
        r1 = vz[g1, :] @ stack - x1 @ theta_hat
        r3 = vz[g3, :] @ stack - (uz[g3, :] @ stack) @ theta_hat
        resid = np.sqrt(cl.frob(r1) ** 2 + cl.frob(r3) ** 2)
        if resid <= tol:
            return RiccatiSolution(
                z=z, x1=x1, x2=x2, theta_hat=theta_hat,
                iterations=it, residual=resid, reduced=r,
            )
        if first_resid is None:
            first_resid = resid
        if not np.isfinite(resid) or resid > 1e6 * first_resid:
            raise NoConvergence(
                f"riccati iteration diverges at z={z:.3e} (residual {resid:.3e}); z too large"
            )
        if it == max_iter:
            break
        # Newton step on the (quadratic) coupling system, with the exact
        # Jacobian in Kronecker form.  The quadratic term enters only through
        # Theta-hat = V(z)[g2,:] S, so every Jacobian block stays small.
        th_t = theta_hat.T
        p3 = uz[g3, :] @ stack
        j11 = (
            np.kron(eye2, vz[g1, g1])
            - np.kron(th_t, cl.eye(n1))
            - np.kron(eye2, x1 @ vz[g2, g1])
        )
        j13 = np.kron(eye2, vz[g1, g3]) - np.kron(eye2, x1 @ vz[g2, g3])
        j31 = (
            np.kron(eye2, vz[g3, g1])
            - np.kron(th_t, eu[g3, g1])
            - np.kron(eye2, p3 @ vz[g2, g1])
        )
        j33 = (
            np.kron(eye2, vz[g3, g3])
            - np.kron(th_t, uz[g3, g3])
            - np.kron(eye2, p3 @ vz[g2, g3])
        )
        jmat = np.block([[j11, j13], [j31, j33]])
        rhs = -np.concatenate([r1.flatten(order="F"), r3.flatten(order="F")])
        sol = la.solve(jmat, rhs)
        x1 = x1 + sol[: n1 * n2].reshape((n1, n2), order="F")
        x2 = x2 + sol[n1 * n2 :].reshape((n3, n2), order="F")
    raise NoConvergence(
        f"riccati iteration stalled at residual {resid:.3e} (tol {tol:.3e}) after {max_iter} sweeps; z may be too large"
    )
