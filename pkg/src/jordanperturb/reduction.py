"""Reduction of a general pair (A, D) to canonical coordinates.

The caller supplies the spectral transformation: an invertible [Xi Xi_c]
with ``A [Xi Xi_c] = [Xi Xi_c] diag(lambda0 I + N, A22)`` and lambda0 not an
eigenvalue of A22.  Computing such a transformation from a raw matrix is an
ill-posed problem and out of scope here; validating one and splitting D
through it is not.  The cross-block coupling enters only through the
truncated series P(t) = t P1 + O(t^2), where P1 solves the Sylvester
equation ``A22 P1 - P1 A11 + D21 = 0``; replacing D11 by
``D11 + t D12 P1`` captures the coupling to the order every implemented
expansion resolves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from . import core_linalg as cl
from .errors import InvalidTransformation
from .structure import CanonicalPair, JordanStructure, build_nilpotent

__all__ = ["SpectralTransformation", "ReducedProblem", "reduce", "effective_d11"]

# Validation tolerances: relative similarity residual, absolute eigenvalue
# separation of lambda0 from Lambda(A22).
SIMILARITY_TOL = 1e-8
SEPARATION_TOL = 1e-6


@dataclass(frozen=True)
class SpectralTransformation:
    """User-supplied similarity exposing the lambda0 canonical block."""

    xi: np.ndarray = field(repr=False)
    xi_c: np.ndarray = field(repr=False)
    a22: np.ndarray = field(repr=False)
    structure: JordanStructure = None

    def __post_init__(self):
        object.__setattr__(self, "xi", cl.as_matrix(self.xi, "xi"))
        object.__setattr__(self, "xi_c", cl.as_matrix(self.xi_c, "xi_c"))
        object.__setattr__(self, "a22", cl.as_matrix(self.a22, "a22"))
        m = self.structure.dim
        n = self.xi.shape[0]
        if self.xi.shape != (n, m):
            raise InvalidTransformation(f"xi must be {n}x{m}, got {self.xi.shape}")
        if self.xi_c.shape != (n, n - m):
            raise InvalidTransformation(f"xi_c must be {n}x{n - m}, got {self.xi_c.shape}")
        if self.a22.shape != (n - m, n - m):
            raise InvalidTransformation(f"a22 must be {n - m}x{n - m}")

    @property
    def full(self) -> np.ndarray:
        return np.hstack([self.xi, self.xi_c])

    def validate(self, a: np.ndarray):
        """Check invertibility, the similarity relation, and the eigenvalue
        separation; raises :class:`InvalidTransformation` naming the failure."""
        a = cl.as_matrix(a, "a")
        t = self.full
        n = t.shape[0]
        if a.shape != (n, n):
            raise InvalidTransformation(f"a must be {n}x{n} to match the transformation")
        svals = la.svdvals(t)
        if svals[-1] <= 1e-12 * svals[0]:
            raise InvalidTransformation(
                f"[xi xi_c] is numerically singular (sigma_min/sigma_max = {svals[-1] / svals[0]:.3e})"
            )
        st = self.structure
        a11 = st.lambda0 * cl.eye(st.dim) + build_nilpotent(st)
        blockdiag = la.block_diag(a11, self.a22)
        resid = cl.frob(a @ t - t @ blockdiag) / max(1.0, cl.frob(a))
        if resid > SIMILARITY_TOL:
            raise InvalidTransformation(
                f"similarity residual {resid:.3e} exceeds {SIMILARITY_TOL:.1e}"
            )
        if self.a22.shape[0]:
            sep = float(np.abs(cl.eig(self.a22)[0] - st.lambda0).min())
            if sep < SEPARATION_TOL:
                raise InvalidTransformation(
                    f"lambda0 is within {sep:.3e} of Lambda(A22) (tol {SEPARATION_TOL:.1e})"
                )


@dataclass(frozen=True)
class ReducedProblem:
    """The four D blocks in transformed coordinates plus the coupling P1."""

    pair: CanonicalPair
    d12: np.ndarray = field(repr=False)
    d21: np.ndarray = field(repr=False)
    d22: np.ndarray = field(repr=False)
    p1: np.ndarray = field(repr=False)


def reduce(a, d, trans: SpectralTransformation) -> ReducedProblem:
    """Split D through the transformation and solve for P1.

    Returns the canonical pair (structure, D11) together with D12, D21, D22
    and the first-order coupling P1 with ``A22 P1 - P1 A11 + D21 = 0``.
    """
    a = cl.as_matrix(a, "a")
    d = cl.as_matrix(d, "d")
    trans.validate(a)
    t = trans.full
    m = trans.structure.dim
    dt = la.solve(t, d @ t)
    d11 = dt[:m, :m]
    d12 = dt[:m, m:]
    d21 = dt[m:, :m]
    d22 = dt[m:, m:]
    st = trans.structure
    a11 = st.lambda0 * cl.eye(m) + build_nilpotent(st)
    p1 = cl.solve_sylvester(trans.a22, a11, d21) if d21.shape[0] else cl.zeros(0, m)
    return ReducedProblem(pair=CanonicalPair(st, d11), d12=d12, d21=d21, d22=d22, p1=p1)


def effective_d11(red: ReducedProblem, t: float) -> np.ndarray:
    """D11 + t * D12 P1: the canonical block with first-order coupling folded in.

    The neglected remainder perturbs each pencil entry at relative order
    t^2, one full order below every expansion computed here; for rho = 1 the
    truncation touches only the second-order eigenvalue coefficients.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if red.d12.shape[1] == 0:
        return red.pair.d11.copy()
    return red.pair.d11 + t * (red.d12 @ red.p1)
