"""Zeroth-order expansions: split eigenvalues, eigenvectors, invariant subspaces.

The eigenvalues of ``A + tD`` that split at order ``t^(1/rho)`` are
``lambda0 + t^(1/rho) mu`` where ``mu`` runs over the rho-th roots of the
eigenvalues ``gamma`` of S_rho.  Picking a subset of those roots that is
separated from the rest selects a perturbed invariant subspace; its basis
matrix has the constant term ``XiTilde_rho [I; G_rho] Q1`` where ``Q1`` spans
the S_rho-invariant subspace of the selected gammas and ``Omega`` is the
corresponding rho-th root of the triangular block.  The remaining blocks of
the basis decay with known fractional orders, recorded here as data so the
verification sweep can fit them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import core_linalg as cl
from .errors import ClusterNotSeparated, MatrixRootFailure, NotSimple
from .pencil import ReducedPencil, scalar_roots
from .structure import CanonicalPair, JordanStructure

__all__ = [
    "EigenvalueExpansion",
    "SubspaceSelection",
    "SubspaceExpansion",
    "EigenvectorExpansion",
    "OrderEntry",
    "eigenvalue_expansions",
    "select_subspace",
    "subspace_expansion",
    "eigenvector_expansion",
    "h_order_table",
    "x_order_table",
    "eigvec_stack",
    "xi_tilde",
    "gtilde_matrix",
    "CLUSTER_GAP_REL",
]

# Relative gap (times the spectral radius of S_rho) below which two
# eigenvalues of S_rho are treated as one cluster.
CLUSTER_GAP_REL = 1e-6


@dataclass(frozen=True)
class EigenvalueExpansion:
    """One gamma of S_rho and its rho first-order eigenvalue branches."""

    rho: int
    gamma: complex
    mus: np.ndarray = field(repr=False)
    lambda0: complex = 0.0
    simple: bool = True
    # Exponent of the first unmodelled term: 2/rho for simple gamma (series
    # exists), else 1/rho with the bound only o(t^(1/rho)).
    order_next: Fraction = Fraction(1)
    little_o: bool = False

    def predict(self, t: float) -> np.ndarray:
        """lambda0 + t^(1/rho) * mu for each branch."""
        return self.lambda0 + t ** (1.0 / self.rho) * self.mus


@dataclass(frozen=True)
class _ClusterBasis:
    """Schur data of one eigenvalue cluster of S_rho."""

    gamma: complex
    count: int
    q: np.ndarray = field(repr=False)     # right basis: S q = q s11
    s11: np.ndarray = field(repr=False)
    qt: np.ndarray = field(repr=False)    # left basis: qt S = s11 qt, qt q = I


@dataclass(frozen=True)
class SubspaceSelection:
    """A separated set of Theta_rho eigenvalues and its subspace data.

    ``phi`` stacks ``Q1 Omega^j`` for j = 0..rho-1 and spans the selected
    invariant subspace of Theta_rho; ``chosen`` records (cluster, branch)
    pairs, one per diagonal block of Omega.
    """

    rho: int
    q1: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    clusters: tuple = field(repr=False)   # all _ClusterBasis of S_rho
    chosen: tuple = ()                    # ((cluster_index, branch), ...)

    @property
    def r(self) -> int:
        return self.q1.shape[1]

    def root_values(self) -> np.ndarray:
        """The selected mu values, one per chosen (cluster, branch), with
        multiplicity equal to each cluster size."""
        vals = []
        for ci, b in self.chosen:
            cb = self.clusters[ci]
            vals.extend([scalar_roots(cb.gamma, self.rho)[b]] * cb.count)
        return np.asarray(vals, dtype=np.complex128)


@dataclass(frozen=True)
class OrderEntry:
    """Claimed fractional decay of one sub-row block of H (or of X)."""

    block: int       # Jordan size group i
    subrow: int      # 1-based sub-row within the group
    exponent: Fraction
    note: str = ""


@dataclass(frozen=True)
class SubspaceExpansion:
    """Constant term of the perturbed invariant-subspace basis H."""

    rho: int
    lambda0: complex
    h0: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    order_table: tuple = ()
    x_full: np.ndarray | None = field(default=None, repr=False)

    def c_of(self, t: float) -> np.ndarray:
        """lambda0 I + t^(1/rho) Omega, the leading block the subspace pairs with."""
        r = self.omega.shape[0]
        return self.lambda0 * cl.eye(r) + t ** (1.0 / self.rho) * self.omega


@dataclass(frozen=True)
class EigenvectorExpansion:
    gamma: complex
    mu: complex
    constant: np.ndarray = field(repr=False)
    order_table: tuple = ()


def _cluster(vals: np.ndarray, tol: float) -> list[list[int]]:
    """Group indices of nearly-equal eigenvalues (union-find by distance)."""
    n = vals.size
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if abs(vals[i] - vals[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    reps = sorted(groups.values(), key=lambda g: (np.angle(vals[g[0]]), abs(vals[g[0]])))
    return reps


def _cluster_bases(reduced: ReducedPencil, gap_tol_rel: float = CLUSTER_GAP_REL):
    """All eigenvalue clusters of S_rho with right/left Schur bases."""
    s = reduced.s_rho
    if s.shape[0] == 0:
        return (), 0.0
    vals = cl.eig(s)[0]
    scale = max(float(np.abs(vals).max()), 1e-300)
    tol = gap_tol_rel * scale
    groups = _cluster(vals, tol)
    bases = []
    for g in groups:
        members = vals[g]
        rep = complex(members.mean())

        def inside(lam, members=members, tol=tol):
            return bool(np.min(np.abs(members - lam)) <= 10 * tol)

        q_full, t_full, r = cl.ordered_schur(s, inside)
        if r != len(g):
            raise ClusterNotSeparated(
                f"Schur reordering selected {r} eigenvalues for a cluster of {len(g)}"
            )
        q = q_full[:, :r]
        s11 = t_full[:r, :r]
        t12 = t_full[:r, r:]
        t22 = t_full[r:, r:]
        if t22.shape[0]:
            rr = cl.solve_sylvester(s11, t22, t12)
            qt = np.hstack([cl.eye(r), -rr]) @ q_full.conj().T
        else:
            qt = q_full.conj().T
        bases.append(_ClusterBasis(gamma=rep, count=r, q=q, s11=s11, qt=qt))
    return tuple(bases), tol


def eigenvalue_expansions(
    reduced: ReducedPencil, gap_tol_rel: float = CLUSTER_GAP_REL
) -> list[EigenvalueExpansion]:
    """One expansion per eigenvalue of S_rho, with multiplicity.

    Simple eigenvalues (cluster of size one) get the sharp next-order
    exponent 2/rho; multiple ones only the o(t^(1/rho)) bound.
    """
    rho = reduced.rho
    lam0 = reduced.structure.lambda0
    bases, _ = _cluster_bases(reduced, gap_tol_rel)
    out = []
    for cb in bases:
        simple = cb.count == 1
        exp = EigenvalueExpansion(
            rho=rho,
            gamma=cb.gamma,
            mus=scalar_roots(cb.gamma, rho),
            lambda0=lam0,
            simple=simple,
            order_next=Fraction(2, rho) if simple else Fraction(1, rho),
            little_o=not simple,
        )
        out.extend([exp] * cb.count)
    return out


def _matrix_root(s11: np.ndarray, rho: int, branch_rotation: complex) -> np.ndarray:
    """Triangular rho-th root on a chosen branch: rotation times the
    principal fractional power (exact for the 1x1 case)."""
    r = s11.shape[0]
    if r == 0:
        return cl.zeros(0, 0)
    sigma = cl.smallest_singular_value(s11)
    if sigma < 1e-14 * max(1.0, cl.frob(s11)):
        raise MatrixRootFailure("S11 is numerically singular; no invertible rho-th root")
    if r == 1:
        root = np.array([[complex(s11[0, 0]) ** (1.0 / rho)]])
    else:
        import scipy.linalg as la

        root = la.fractional_matrix_power(s11, 1.0 / rho).astype(np.complex128)
    omega = branch_rotation * root
    res = cl.frob(np.linalg.matrix_power(omega, rho) - s11) / max(1.0, cl.frob(s11))
    if res > 1e-10:
        raise MatrixRootFailure(f"matrix root residual {res:.3e} too large")
    return omega


def _branch_rotation(gamma: complex, rho: int, root_index: int) -> complex:
    """Rotation e^(2 pi i b / rho) whose root lands at position root_index
    of the argument-sorted root list."""
    if not 0 <= root_index < rho:
        raise ValueError(f"root_index={root_index} outside 0..{rho - 1}")
    principal = complex(gamma) ** (1.0 / rho)
    rots = sorted(
        range(rho), key=lambda b: np.angle(principal * np.exp(2j * np.pi * b / rho))
    )
    return np.exp(2j * np.pi * rots[root_index] / rho)


def select_subspace(
    reduced: ReducedPencil,
    cluster,
    root_index=0,
    gap_tol_rel: float = CLUSTER_GAP_REL,
) -> SubspaceSelection:
    """Select eigenvalues of Theta_rho that are separated from the rest.

    Parameters
    ----------
    reduced : ReducedPencil
    cluster : callable
        Predicate on an eigenvalue of S_rho; a whole near-equal cluster is
        selected when its representative satisfies the predicate.
    root_index : int or sequence
        Which rho-th root branch(es) to take, indexed into the
        argument-sorted root list.  An int applies to every selected
        cluster; a sequence gives one entry per selected cluster, where each
        entry may itself be an int or a tuple of branch indices.

    Returns
    -------
    SubspaceSelection
        With ``S_rho Q1 = Q1 Omega^rho`` and full-column-rank ``phi``.

    Raises
    ------
    ClusterNotSeparated
        If some selected root is too close to an unselected one.
    MatrixRootFailure
        If a triangular root cannot be formed (singular S11).
    """
    rho = reduced.rho
    s_rho_dim = reduced.s_rho.shape[0]
    bases, tol = _cluster_bases(reduced, gap_tol_rel)
    selected = [i for i, cb in enumerate(bases) if cluster(cb.gamma)]

    if isinstance(root_index, (int, np.integer)):
        per_cluster = [(int(root_index),)] * len(selected)
    else:
        if len(root_index) != len(selected):
            raise ValueError(
                f"root_index has {len(root_index)} entries for {len(selected)} selected clusters"
            )
        per_cluster = [
            (int(e),) if isinstance(e, (int, np.integer)) else tuple(int(b) for b in e)
            for e in root_index
        ]

    chosen = []
    for ci, branches in zip(selected, per_cluster):
        for b in branches:
            chosen.append((ci, b))

    # Separation of the selected mu set from every other root of Theta_rho.
    sel_set = set(chosen)
    sel_vals, other_vals = [], []
    for ci, cb in enumerate(bases):
        roots = scalar_roots(cb.gamma, rho)
        for b in range(rho):
            (sel_vals if (ci, b) in sel_set else other_vals).append(roots[b])
    if sel_vals and other_vals:
        gap = np.abs(
            np.asarray(sel_vals)[:, None] - np.asarray(other_vals)[None, :]
        ).min()
        root_scale = max(max(abs(v) for v in sel_vals + other_vals), 1e-300)
        if gap <= gap_tol_rel * root_scale:
            raise ClusterNotSeparated(
                f"selected and unselected Theta eigenvalues separated by only {gap:.3e}"
            )

    q_parts, omega_parts = [], []
    for ci, b in chosen:
        cb = bases[ci]
        rot = _branch_rotation(cb.gamma, rho, b)
        omega_parts.append(_matrix_root(cb.s11, rho, rot))
        q_parts.append(cb.q)
    if q_parts:
        q1 = np.hstack(q_parts)
        omega = cl.as_matrix(blk_diag(omega_parts))
    else:
        q1 = cl.zeros(s_rho_dim, 0)
        omega = cl.zeros(0, 0)

    phi = np.vstack([q1 @ np.linalg.matrix_power(omega, j) for j in range(rho)]) if q1.shape[1] else cl.zeros(rho * s_rho_dim, 0)
    sel = SubspaceSelection(
        rho=rho, q1=q1, omega=omega, phi=phi, clusters=bases, chosen=tuple(chosen)
    )
    _check_selection(reduced, sel)
    return sel


def blk_diag(blocks) -> np.ndarray:
    """Block diagonal of square complex blocks (empty-safe)."""
    blocks = [cl.as_matrix(b) for b in blocks]
    n = sum(b.shape[0] for b in blocks)
    out = cl.zeros(n, n)
    pos = 0
    for b in blocks:
        w = b.shape[0]
        out[pos : pos + w, pos : pos + w] = b
        pos += w
    return out


def _check_selection(reduced: ReducedPencil, sel: SubspaceSelection):
    if sel.r == 0:
        return
    res = cl.frob(reduced.s_rho @ sel.q1 - sel.q1 @ np.linalg.matrix_power(sel.omega, reduced.rho))
    if res > 1e-8 * max(1.0, cl.frob(reduced.s_rho)):
        raise AssertionError(f"S_rho Q1 = Q1 Omega^rho violated: residual {res:.3e}")
    if cl.smallest_singular_value(sel.phi) <= 1e-8:
        raise AssertionError("phi lost full column rank")


def xi_tilde(pair: CanonicalPair, rho: int, xi: np.ndarray | None = None, col: int = 1) -> np.ndarray:
    """Columns [Xi_{rho,col} Xi_{rho+1,col} ... Xi_{k,col}] of xi.

    ``col = 1`` gives the eigenvector columns; ``col = 2`` the first
    generalized eigenvectors (blocks of size 1 contribute nothing).
    """
    st = pair.structure
    if xi is None:
        xi = cl.eye(st.dim)
    parts = []
    for i in range(rho, st.k + 1):
        if col <= i:
            parts.append(xi[:, pair.index.cols(i, col)])
    if not parts:
        return cl.zeros(xi.shape[0], 0)
    return np.hstack(parts)


def eigvec_stack(reduced: ReducedPencil) -> np.ndarray:
    """[I_{s_rho}; G_rho^(rho)]: pencil eigenvector coordinates over XiTilde_rho."""
    s_rho = reduced.structure.s(reduced.rho)
    return np.vstack([cl.eye(s_rho), reduced.g_blocks[reduced.rho - 1]])


def gtilde_matrix(reduced: ReducedPencil) -> np.ndarray:
    """Constant term of the full invariant-subspace basis: m x (rho s_rho), with I_{s_rho}
    (resp. G_{i rho}) in the first column block of each row group i >= rho."""
    st = reduced.structure
    rho = reduced.rho
    s_rho = st.s(rho)
    out = cl.zeros(st.dim, rho * s_rho)
    idx = reduced.pair.index
    if s_rho == 0:
        return out
    out[idx.rows(rho, 1), :s_rho] = np.eye(s_rho)
    for i in range(rho + 1, st.k + 1):
        out[idx.rows(i, 1), :s_rho] = reduced.g_sub(i, rho)
    return out


def h_order_table(structure: JordanStructure, rho: int) -> tuple[OrderEntry, ...]:
    """Claimed decay exponents for the blocks H_i of the subspace basis.

    For i = rho the exponents bound the residual after subtracting the
    explicit terms Q1 (t^(1/rho) Omega)^(l-1).
    """
    entries = []
    for i in range(1, structure.k + 1):
        if structure.s(i) == 0:
            continue
        if i < rho:
            for ell in range(1, i + 1):
                entries.append(
                    OrderEntry(i, ell, Fraction(rho - (i - ell + 1), rho))
                )
        elif i == rho:
            for ell in range(1, rho + 1):
                entries.append(
                    OrderEntry(i, ell, Fraction(ell, rho), note="after explicit term")
                )
        else:
            for ell in range(1, i + 1):
                if ell <= 2:
                    e = Fraction(1, rho)
                elif ell <= rho:
                    e = Fraction(ell - 1, rho)
                else:
                    e = Fraction(1)
                entries.append(OrderEntry(i, ell, e))
    return tuple(entries)


def x_order_table(structure: JordanStructure, rho: int) -> tuple[OrderEntry, ...]:
    """Claimed decay exponents for the blocks of the full basis X.

    The i = rho block is exactly diag(0, t^(1/rho) I, ..., t^(1-1/rho) I) on
    top of the constant part, so its rows carry exact exponents.
    """
    entries = []
    for i in range(1, structure.k + 1):
        if structure.s(i) == 0:
            continue
        if i < rho:
            for ell in range(1, i + 1):
                entries.append(OrderEntry(i, ell, Fraction(rho - (i - ell + 1), rho)))
        elif i == rho:
            for ell in range(2, rho + 1):
                entries.append(OrderEntry(i, ell, Fraction(ell - 1, rho), note="exact"))
        else:
            for ell in range(1, i + 1):
                if ell <= 2:
                    e = Fraction(1, rho)
                elif ell <= rho:
                    e = Fraction(ell - 1, rho)
                else:
                    e = Fraction(1)
                entries.append(OrderEntry(i, ell, e))
    return tuple(entries)


def subspace_expansion(
    reduced: ReducedPencil,
    sel: SubspaceSelection,
    pair: CanonicalPair | None = None,
    xi: np.ndarray | None = None,
    include_x_full: bool = True,
) -> SubspaceExpansion:
    """Constant term and order table of the perturbed invariant subspace.

    ``h0 = XiTilde_rho [I; G_rho] Q1`` may be column-rank deficient even
    though the exact perturbed basis has full rank; no rank invariant is
    asserted on it.
    """
    if pair is None:
        pair = reduced.pair
    xt = xi_tilde(pair, reduced.rho, xi, col=1)
    h0 = xt @ eigvec_stack(reduced) @ sel.q1
    x_full = None
    if include_x_full:
        base = gtilde_matrix(reduced)
        x_full = base if xi is None else cl.as_matrix(xi) @ base
    return SubspaceExpansion(
        rho=reduced.rho,
        lambda0=reduced.structure.lambda0,
        h0=h0,
        omega=sel.omega,
        order_table=h_order_table(reduced.structure, reduced.rho),
        x_full=x_full,
    )


def eigenvector_expansion(
    reduced: ReducedPencil,
    which: int,
    root_index: int,
    pair: CanonicalPair | None = None,
    xi: np.ndarray | None = None,
    gap_tol_rel: float = CLUSTER_GAP_REL,
) -> EigenvectorExpansion:
    """Constant eigenvector term for a simple gamma of S_rho.

    ``which`` indexes the argument-sorted eigenvalue clusters of S_rho; the
    chosen cluster must be simple.  Returns ``XiTilde_rho [phi; G phi]`` and
    the fractional-order table of the correction blocks.
    """
    if pair is None:
        pair = reduced.pair
    bases, _ = _cluster_bases(reduced, gap_tol_rel)
    if not 0 <= which < len(bases):
        raise ValueError(f"which={which} outside 0..{len(bases) - 1}")
    cb = bases[which]
    if cb.count != 1:
        raise NotSimple(f"gamma={cb.gamma:.6g} has multiplicity {cb.count}")
    mu = scalar_roots(cb.gamma, reduced.rho)[root_index]
    phi_vec = cb.q
    constant = xi_tilde(pair, reduced.rho, xi, col=1) @ eigvec_stack(reduced) @ phi_vec
    return EigenvectorExpansion(
        gamma=cb.gamma,
        mu=complex(mu),
        constant=constant,
        order_table=h_order_table(reduced.structure, reduced.rho),
    )
