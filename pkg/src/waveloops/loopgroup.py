"""Unitary polynomial loops T -> U_N(C): validation, factorization, families.

A loop is stored by its matrix Fourier coefficients A(z) = sum_k z**k A_k,
k = 0..g-1.  The integer g (one plus the top degree) is the genus; it
controls filter length and the size of the analysis window used elsewhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .polyalg import COEFF_TOL, matpoly_eval

UNITARITY_TOL = 1e-10
PROJECTION_TOL = 1e-10
REBUILD_TOL = 1e-9

# Constant unitary used by the two-parameter genus-3 family.
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


class FactorizationFailed(RuntimeError):
    """Degree reduction stalled or the rebuilt product missed the input."""


def circle_points(count: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(count) / count)


class MatrixLoop:
    """Polynomial loop with coefficient stack of shape (g, N, N)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ValueError("expected a (g, N, N) coefficient stack")
        top = c.shape[0]
        while top > 1 and np.max(np.abs(c[top - 1])) <= COEFF_TOL:
            top -= 1
        if top == 1 and np.max(np.abs(c[0])) <= COEFF_TOL:
            raise ValueError("zero loop")
        self.coeffs = c[:top].copy()

    @property
    def N(self) -> int:
        return self.coeffs.shape[1]

    @property
    def genus(self) -> int:
        return self.coeffs.shape[0]

    def __call__(self, z: complex) -> np.ndarray:
        return matpoly_eval(self.coeffs, z)

    def entry(self, i: int, j: int) -> np.ndarray:
        """Coefficients of the scalar polynomial A_ij(z)."""
        return self.coeffs[:, i, j].copy()

    def block_diag(self, other: "MatrixLoop") -> "MatrixLoop":
        g = max(self.genus, other.genus)
        n1, n2 = self.N, other.N
        c = np.zeros((g, n1 + n2, n1 + n2), dtype=complex)
        c[: self.genus, :n1, :n1] = self.coeffs
        c[: other.genus, n1:, n1:] = other.coeffs
        return MatrixLoop(c)

    def allclose(self, other: "MatrixLoop", tol: float = REBUILD_TOL) -> bool:
        if self.N != other.N:
            return False
        g = max(self.genus, other.genus)
        a = np.zeros((g, self.N, self.N), dtype=complex)
        b = np.zeros_like(a)
        a[: self.genus] = self.coeffs
        b[: other.genus] = other.coeffs
        return bool(np.max(np.abs(a - b)) <= tol)

    def to_json_dict(self) -> dict:
        return {
            "N": self.N,
            "coeffs": [
                [[[float(v.real), float(v.imag)] for v in row] for row in mat]
                for mat in self.coeffs
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "MatrixLoop":
        n = int(data["N"])
        mats = data["coeffs"]
        c = np.zeros((len(mats), n, n), dtype=complex)
        for k, mat in enumerate(mats):
            for i, row in enumerate(mat):
                for j, (re, im) in enumerate(row):
                    c[k, i, j] = complex(re, im)
        return cls(c)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "MatrixLoop":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    @classmethod
    def identity(cls, n: int) -> "MatrixLoop":
        return cls(np.eye(n, dtype=complex)[None, :, :])

    def __repr__(self) -> str:
        return f"MatrixLoop(N={self.N}, genus={self.genus})"


@dataclass
class LoopReport:
    """Outcome of validate_loop; failures are carried, never raised."""

    unitary_on_circle: bool
    coefficients_orthogonal: bool
    unitarity_residual: float
    orthogonality_residual: float

    @property
    def valid(self) -> bool:
        return self.unitary_on_circle and self.coefficients_orthogonal


@dataclass
class Factorization:
    """Constant unitary V with degree-one factors, rebuilt as V*F0(z)*F1(z)*...

    Each factor (P, r) stands for I - P + z**r P.  Factor lists are a ledger
    of one valid decomposition; only rebuilt products are comparable across
    implementations.
    """

    V: np.ndarray
    factors: list = field(default_factory=list)

    @property
    def projections(self) -> list:
        return [p for p, _ in self.factors]


@dataclass(frozen=True)
class TwoParamPoint:
    """Angles parametrizing the real genus-3 two-projection family."""

    theta: float
    rho: float


@dataclass
class DiagonalStructure:
    """How much of the loop is monomial: all, a corner, or nothing.

    kind is one of "fully_diagonal", "diagonal_corner",
    "purely_non_diagonal".  For the fully diagonal case V and the monomial
    exponents are filled in; for a corner, (d0, b, d1) gives the sizes of the
    leading diagonal block, the middle block and the trailing diagonal block.
    """

    kind: str
    V: np.ndarray | None = None
    exponents: tuple = ()
    d0: int = 0
    b: int = 0
    d1: int = 0


def validate_loop(loop: MatrixLoop, tol: float = UNITARITY_TOL, samples: int = 128) -> LoopReport:
    """Check unitarity on the circle and the coefficient orthogonality rules.

    The two conditions are equivalent in exact arithmetic; the report carries
    the worst residual of each so near-failures can be inspected.
    """
    eye = np.eye(loop.N)
    uni_res = 0.0
    for z in circle_points(samples):
        a = loop(z)
        uni_res = max(uni_res, float(np.max(np.abs(a.conj().T @ a - eye))))

    g = loop.genus
    orth_res = 0.0
    for n in range(-(g - 1), g):
        acc = np.zeros((loop.N, loop.N), dtype=complex)
        for k in range(g):
            if 0 <= k + n < g:
                acc += loop.coeffs[k].conj().T @ loop.coeffs[k + n]
        target = eye if n == 0 else 0.0
        orth_res = max(orth_res, float(np.max(np.abs(acc - target))))

    return LoopReport(
        unitary_on_circle=uni_res <= tol,
        coefficients_orthogonal=orth_res <= tol,
        unitarity_residual=uni_res,
        orthogonality_residual=orth_res,
    )


def genus(loop: MatrixLoop) -> int:
    """Largest k+1 with a nonzero k-th coefficient matrix."""
    return loop.genus


def _range_projection(mat: np.ndarray, tol: float = PROJECTION_TOL) -> np.ndarray:
    """Orthogonal projection onto the column space of mat (SVD threshold)."""
    u, s, _ = np.linalg.svd(mat)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 1.0)))
    basis = u[:, :rank]
    return basis @ basis.conj().T


def factorize(loop: MatrixLoop) -> Factorization:
    """Split a valid loop into a constant unitary and degree-one factors.

    Factors are stripped from the right: with Q projecting onto the row
    space of the current top coefficient, A(z) (Q^perp + z^-1 Q) drops the
    degree by one and stays a polynomial because the top and bottom
    coefficients annihilate the complementary ranges.  The stripped factors
    are stored so that V * F0(z) * F1(z) * ... rebuilds the input; the
    rebuild residual is verified before returning.
    """
    work = loop.coeffs.copy()
    reversed_factors = []
    guard = loop.genus + 2
    while work.shape[0] > 1:
        if guard == 0:
            raise FactorizationFailed("degree reduction stalled; input loop is likely invalid")
        guard -= 1
        top = work[-1]
        q = _range_projection(top.conj().T)
        q_perp = np.eye(loop.N) - q
        g = work.shape[0]
        new = np.zeros((g - 1, loop.N, loop.N), dtype=complex)
        # coefficient m of A(z) (Q^perp + z^-1 Q) is A_m Q^perp + A_{m+1} Q
        for m in range(g - 1):
            new[m] = work[m] @ q_perp + work[m + 1] @ q
        if np.max(np.abs(work[0] @ q)) > REBUILD_TOL or np.max(np.abs(top @ q_perp)) > REBUILD_TOL:
            raise FactorizationFailed("projection did not cancel the boundary coefficients")
        reversed_factors.append((q, 1))
        work = new

    fact = Factorization(V=work[0], factors=list(reversed(reversed_factors)))
    rebuilt = build_loop(fact.V, fact.factors, check=False)
    if not rebuilt.allclose(loop, REBUILD_TOL):
        raise FactorizationFailed("rebuilt product does not match the input loop")
    return fact


def build_loop(V: np.ndarray, factors, check: bool = True) -> MatrixLoop:
    """Assemble V * prod_j (I - P_j + z**r_j P_j) into coefficient form."""
    V = np.asarray(V, dtype=complex)
    n = V.shape[0]
    if check:
        if np.max(np.abs(V.conj().T @ V - np.eye(n))) > PROJECTION_TOL * 100:
            raise ValueError("V is not unitary")
        for p, r in factors:
            p = np.asarray(p)
            if r < 1:
                raise ValueError("factor exponents must be positive")
            if (
                np.max(np.abs(p - p.conj().T)) > PROJECTION_TOL * 100
                or np.max(np.abs(p @ p - p)) > PROJECTION_TOL * 100
            ):
                raise ValueError("factor is not an orthogonal projection")

    coeffs = V[None, :, :].copy()
    for p, r in factors:
        p = np.asarray(p, dtype=complex)
        g = coeffs.shape[0]
        new = np.zeros((g + r, n, n), dtype=complex)
        p_perp = np.eye(n) - p
        for k in range(g):
            new[k] += coeffs[k] @ p_perp
            new[k + r] += coeffs[k] @ p
        coeffs = new
    return MatrixLoop(coeffs)


def two_param_coeffs(pt: TwoParamPoint) -> np.ndarray:
    """Closed-form six real filter coefficients of the (theta, rho) family.

    The coefficients sum to 2, with even- and odd-indexed sums each equal
    to 1, and are pi-periodic in both angles.
    """
    t2, r2 = 2.0 * pt.theta, 2.0 * pt.rho
    ct, st = np.cos(t2), np.sin(t2)
    cr, sr = np.cos(r2), np.sin(r2)
    cd, sd = np.cos(t2 - r2), np.sin(t2 - r2)
    return np.array(
        [
            0.25 * (1 - ct - st - cr - sr + cd + sd),
            0.25 * (1 + ct - st + cr - sr + cd - sd),
            0.50 * (1 - cd - sd),
            0.50 * (1 - cd + sd),
            0.25 * (1 + ct + st + cr + sr + cd + sd),
            0.25 * (1 - ct + st - cr + sr + cd - sd),
        ]
    )


def angle_projection(angle: float) -> np.ndarray:
    """Rank-one projection onto (cos angle, sin angle)."""
    v = np.array([np.cos(angle), np.sin(angle)], dtype=complex)
    return np.outer(v, v.conj())


def two_param_loop(pt: TwoParamPoint) -> MatrixLoop:
    """The genus-3 loop H * (Qt^perp + z Qt) * (Qr^perp + z Qr)."""
    return build_loop(
        HADAMARD,
        [(angle_projection(pt.theta), 1), (angle_projection(pt.rho), 1)],
        check=False,
    )


def norm_bound_check(loop: MatrixLoop, z_samples, slack: float = 1e-9) -> bool:
    """Check min(1,|z|^2)^(g-1) <= eig(A*A) <= max(1,|z|^2)^(g-1) at each z."""
    g = loop.genus
    for z in z_samples:
        a = loop(z)
        eigs = np.linalg.eigvalsh(a.conj().T @ a)
        m2 = abs(z) ** 2
        lo = min(1.0, m2) ** (g - 1)
        hi = max(1.0, m2) ** (g - 1)
        if eigs[0] < lo - slack or eigs[-1] > hi + slack:
            return False
    return True


def _monomial_column(loop: MatrixLoop, j: int, tol: float = PROJECTION_TOL):
    """If column j is z**m times a fixed unit vector, return (m, vector)."""
    norms = np.linalg.norm(loop.coeffs[:, :, j], axis=1)
    hits = np.nonzero(norms > 1e-8)[0]
    if len(hits) != 1:
        return None
    m = int(hits[0])
    v = loop.coeffs[m, :, j]
    if abs(np.linalg.norm(v) - 1.0) > 100 * tol:
        return None
    return m, v


def detect_diagonal_structure(loop: MatrixLoop) -> DiagonalStructure:
    """Classify the loop as fully diagonal, corner-diagonal, or neither.

    A column is "monomial" when exactly one coefficient matrix touches it;
    unitarity then forces the rest of the loop to be pointwise orthogonal to
    that column's direction, so a monomial first (last) column is exactly a
    leading (trailing) diagonal block after factoring out a constant unitary.
    """
    n = loop.N
    cols = [_monomial_column(loop, j) for j in range(n)]

    if all(c is not None for c in cols):
        v = np.stack([c[1] for c in cols], axis=1)
        exps = tuple(int(c[0]) for c in cols)
        return DiagonalStructure(kind="fully_diagonal", V=v, exponents=exps)

    d0 = 0
    while d0 < n and cols[d0] is not None:
        d0 += 1
    d1 = 0
    while d1 < n - d0 and cols[n - 1 - d1] is not None:
        d1 += 1
    if d0 > 0 or d1 > 0:
        return DiagonalStructure(
            kind="diagonal_corner", d0=d0, b=n - d0 - d1, d1=d1
        )
    return DiagonalStructure(kind="purely_non_diagonal", b=n)


def random_loop(n: int, g: int, rng: np.random.Generator) -> MatrixLoop:
    """Random valid loop of scale n and (generic) genus g via build_loop."""
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    v = q @ np.diag(np.exp(1j * np.angle(np.diag(r))))
    factors = []
    for _ in range(g - 1):
        w = rng.normal(size=n) + 1j * rng.normal(size=n)
        w /= np.linalg.norm(w)
        factors.append((np.outer(w, w.conj()), 1))
    return build_loop(v, factors, check=False)
