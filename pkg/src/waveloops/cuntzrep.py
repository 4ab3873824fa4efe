"""Finite-dimensional analysis of the isometry family attached to a loop.

Everything happens on the window K = span{z^0, z^-1, ..., z^-r0},
r0 = floor((gN-1)/(N-1)), which absorbs all the adjoint operators.  Basis
vectors are ordered e_0, e_{-1}, ..., e_{-r0}, so "index k" means the
monomial z^-k throughout this module.

The compression of the isometries to K drives a completely positive map
sigma(X) = sum_i V_i X V_i*; the dimension of its fixed space decides
irreducibility of the representation, and its diagonal fixed vectors give
the invariant (non-faithful) state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .filterbank import FilterBank, filters_from_loop, loop_from_filters
from .loopgroup import MatrixLoop, detect_diagonal_structure

RANK_TOL = 1e-9
AMBIGUOUS_BAND = (1e-9, 1e-7)


class AmbiguousRankError(RuntimeError):
    """Fixed-space dimension sits in the numerically undecidable band."""

    def __init__(self, values):
        self.values = list(values)
        pretty = ", ".join(f"{v:.3e}" for v in self.values)
        super().__init__(f"singular values in the ambiguous band [1e-9, 1e-7]: {pretty}")


def window_size(n: int, g: int) -> int:
    """r0 = floor((g*N - 1)/(N - 1)); the window has r0 + 1 basis vectors."""
    if n < 2 or g < 1:
        raise ValueError("need scale >= 2 and genus >= 1")
    return (g * n - 1) // (n - 1)


def adjoint_matrices(loop: MatrixLoop) -> list[np.ndarray]:
    """Matrices of the adjoint operators compressed to the window.

    Sending e_{-k} with k = n*N - j (0 <= j < N) to the conjugated
    coefficients of the loop entry (i, j) laid out at rows n .. n+g-1.
    The window size makes every image land inside the window again.
    """
    n_scale, g = loop.N, loop.genus
    r0 = window_size(n_scale, g)
    mats = []
    for i in range(n_scale):
        m = np.zeros((r0 + 1, r0 + 1), dtype=complex)
        for k in range(r0 + 1):
            shift = math.ceil(k / n_scale)
            j = shift * n_scale - k
            m[shift : shift + g, k] = np.conj(loop.coeffs[:, i, j])
        mats.append(m)
    return mats


def lambda0(loop: MatrixLoop) -> float:
    """Squared norm of the first column of the constant coefficient matrix."""
    return float(np.sum(np.abs(loop.coeffs[0][:, 0]) ** 2))


def R_matrix(loop: MatrixLoop, k: int, l: int) -> np.ndarray:
    """Cross-Gram matrix A_l* A_k of two coefficient matrices."""
    g = loop.genus
    if not (0 <= k < g and 0 <= l < g):
        raise IndexError(f"R-matrix indices must lie in 0..{g - 1}")
    return loop.coeffs[l].conj().T @ loop.coeffs[k]


def minimal_subspace(loop: MatrixLoop, tol: float = RANK_TOL):
    """Orthonormal basis of the smallest adjoint-invariant cyclic subspace.

    Scale 2 only.  The space is spanned inside the window by the conjugates
    of the 4g polynomials A_ij(z) z^(k+j); its dimension is 2g exactly when
    the constant coefficient's first column is nonzero.

    Returns (dimension, basis) with basis columns orthonormal.
    """
    if loop.N != 2:
        raise ValueError("minimal subspace formula is implemented for scale 2")
    g = loop.genus
    r0 = window_size(2, g)
    gens = np.zeros((r0 + 1, 4 * g), dtype=complex)
    col = 0
    for i in range(2):
        for j in range(2):
            for k in range(g):
                gens[k + j : k + j + g, col] += np.conj(loop.coeffs[:, i, j])
                col += 1
    u, s, _ = np.linalg.svd(gens)
    dim = int(np.sum(s > tol))
    return dim, u[:, :dim]


def _sigma_matrix(mats: list[np.ndarray]) -> np.ndarray:
    """sigma(X) = sum_i M_i^dagger X M_i as a matrix on row-major vec(X)."""
    return sum(np.kron(m.conj().T, m.T) for m in mats)


def _dual_sigma_matrix(mats: list[np.ndarray]) -> np.ndarray:
    """Trace-dual map sigma*(D) = sum_i M_i D M_i^dagger, same vec layout."""
    return sum(np.kron(m, m.conj()) for m in mats)


@dataclass
class FixedSpace:
    dimension: int
    basis: list  # window-sized matrices spanning the fixed space
    singular_values: np.ndarray  # ascending, of (sigma - id)
    ambiguous: bool
    ambiguous_values: list = field(default_factory=list)


def sigma_fixed_space(loop: MatrixLoop, tol: float = RANK_TOL) -> FixedSpace:
    """Nullspace of (sigma - id) on window operators.

    The identity is always fixed, so the dimension is at least 1.  Singular
    values inside [1e-9, 1e-7] flag the rank decision as ambiguous instead
    of silently classifying.
    """
    mats = adjoint_matrices(loop)
    dim_k = mats[0].shape[0]
    smat = _sigma_matrix(mats) - np.eye(dim_k * dim_k)
    _, s, vh = np.linalg.svd(smat)
    s = s[::-1]  # ascending
    vh = vh[::-1]
    fixed_dim = int(np.sum(s < tol))
    amb = [float(v) for v in s if AMBIGUOUS_BAND[0] <= v <= AMBIGUOUS_BAND[1]]
    basis = [vh[i].conj().reshape(dim_k, dim_k) for i in range(fixed_dim)]
    return FixedSpace(
        dimension=fixed_dim,
        basis=basis,
        singular_values=s,
        ambiguous=bool(amb),
        ambiguous_values=amb,
    )


@dataclass
class Classification:
    tag: str  # "irreducible" | "reducible"
    fixed_dim: int
    projections: list  # minimal fixed projections, diagonal 0/1 matrices
    diagonal_structure: object

    @property
    def irreducible(self) -> bool:
        return self.tag == "irreducible"


def classify(loop: MatrixLoop, tol: float = RANK_TOL) -> Classification:
    """Irreducible iff the fixed space is spanned by the identity alone.

    In the reducible case the fixed projections are extracted; they are
    asserted diagonal in the window basis and mutually commuting, which is
    what confines reducibility to loops with a monomial corner.
    """
    fs = sigma_fixed_space(loop, tol)
    if fs.ambiguous:
        raise AmbiguousRankError(fs.ambiguous_values)
    structure = detect_diagonal_structure(loop)
    if fs.dimension == 1:
        return Classification("irreducible", 1, [], structure)

    dim_k = fs.basis[0].shape[0]
    for x in fs.basis:
        off = x - np.diag(np.diag(x))
        if np.max(np.abs(off)) > 1e-7:
            raise AmbiguousRankError([np.max(np.abs(off))])

    diag_stack = np.array([np.real(np.diag(x)) for x in fs.basis])
    diag_stack = np.vstack([diag_stack, np.array([np.imag(np.diag(x)) for x in fs.basis])])
    blocks: list[list[int]] = []
    for idx in range(dim_k):
        for blk in blocks:
            if np.max(np.abs(diag_stack[:, idx] - diag_stack[:, blk[0]])) < 1e-6:
                blk.append(idx)
                break
        else:
            blocks.append([idx])

    mats = adjoint_matrices(loop)
    projections = []
    for blk in blocks:
        e = np.zeros((dim_k, dim_k), dtype=complex)
        for idx in blk:
            e[idx, idx] = 1.0
        resid = np.max(np.abs(sum(m.conj().T @ e @ m for m in mats) - e))
        if resid > 1e-7:
            raise AmbiguousRankError([float(resid)])
        projections.append(e)
    return Classification("reducible", fs.dimension, projections, structure)


def _left_drop_count(loop: MatrixLoop, tol: float = 1e-10) -> int:
    """How many leading window vectors can be cut (0, 1, or 2), scale 2.

    One vector goes iff the first filter coefficients all vanish.  A second
    goes either because the filters are divisible by z twice over (the whole
    constant coefficient matrix is zero), or by the 2x2 spectral test:
    eigenvalue 1 absent means the twice-cut window is still cyclic.
    """
    if lambda0(loop) > tol:
        return 0
    if np.max(np.abs(loop.coeffs[0])) <= tol:
        return 2
    m2 = np.array(
        [
            [R_matrix(loop, 1, 1)[0, 0], R_matrix(loop, 0, 1)[0, 1]],
            [R_matrix(loop, 1, 0)[1, 0], R_matrix(loop, 0, 0)[1, 1]],
        ]
    )
    eigs = np.linalg.eigvals(m2)
    if np.min(np.abs(eigs - 1.0)) > 1e-8:
        return 2
    return 1


def _reversed_loop(loop: MatrixLoop) -> MatrixLoop:
    """Loop of the conjugate coefficient-reversed filters (right/left mirror)."""
    bank = filters_from_loop(loop)
    full = loop.N * loop.genus
    rev = []
    for c in bank.coeffs:
        padded = np.zeros(full, dtype=complex)
        padded[: len(c)] = c
        rev.append(np.conj(padded[::-1]))
    return loop_from_filters(FilterBank(loop.N, rev))


def truncate_window(loop: MatrixLoop, tol: float = 1e-10):
    """Endpoints (p, q) of the maximal invariant cyclic window cut, scale 2.

    For scale 2 the two ends are mirror images: the right end is probed by
    applying the left-end tests to the coefficient-reversed bank.  At most
    two vectors come off each end.
    """
    if loop.N != 2:
        raise ValueError("window truncation tests are implemented for scale 2")
    r0 = window_size(loop.N, loop.genus)
    p = _left_drop_count(loop, tol)
    q = r0 - _left_drop_count(_reversed_loop(loop), tol)
    return p, q


def fixed_density_matrix(loop: MatrixLoop, tol: float = RANK_TOL) -> np.ndarray:
    """Diagonal PSD trace-one fixed point of the trace-dual map, scale 2.

    The solution lives on the interior window indices (endpoints excluded),
    which makes the associated state automatically non-faithful.  On the
    diagonal the dual map is a column-stochastic matrix, so the fixed point
    is a Perron vector; tiny negative entries from degeneracy are clipped
    and the residual re-checked.
    """
    if loop.N != 2:
        raise ValueError("fixed density matrix is implemented for scale 2")
    mats = adjoint_matrices(loop)
    dim_k = mats[0].shape[0]
    interior = list(range(1, dim_k - 1))
    # action on diagonals: L[k, p] = sum_i |(M_i)_{k,p}|^2
    big = sum(np.abs(m) ** 2 for m in mats)
    l_int = big[np.ix_(interior, interior)]
    _, s, vh = np.linalg.svd(l_int - np.eye(len(interior)))
    if s[-1] > 1e-7:
        raise RuntimeError(
            f"no fixed diagonal state found (smallest residual {s[-1]:.3e}); "
            "input loop is likely invalid"
        )
    d = np.real(vh[-1])
    if d.sum() < 0:
        d = -d
    d = np.clip(d, 0.0, None)
    d /= d.sum()
    dense = np.zeros((dim_k, dim_k), dtype=complex)
    for idx, val in zip(interior, d):
        dense[idx, idx] = val
    resid = np.max(np.abs(sum(m @ dense @ m.conj().T for m in mats) - dense))
    if resid > tol:
        raise RuntimeError(f"fixed-point residual {resid:.3e} exceeds {tol:.1e}")
    return dense


def projection_product_test(projections, tol: float = 1e-9):
    """Flags (IsProjection, AllCommute) for R = Pg...P2 P1 P2...Pg.

    Inputs must individually be orthogonal projections; the two flags agree
    whenever R is nonzero.
    """
    ps = [np.asarray(p, dtype=complex) for p in projections]
    for p in ps:
        if np.max(np.abs(p - p.conj().T)) > 1e-10 or np.max(np.abs(p @ p - p)) > 1e-10:
            raise ValueError("input is not an orthogonal projection")
    left = ps[::-1]  # P_g ... P_1
    r = left[0]
    for p in left[1:]:
        r = r @ p
    for p in ps[1:]:
        r = r @ p
    is_proj = (
        np.max(np.abs(r - r.conj().T)) <= tol and np.max(np.abs(r @ r - r)) <= tol
    )
    commute = all(
        np.max(np.abs(ps[i] @ ps[j] - ps[j] @ ps[i])) <= tol
        for i in range(len(ps))
        for j in range(i + 1, len(ps))
    )
    return bool(is_proj), bool(commute)
