"""Complex polynomial arithmetic for filter symbols and matrix loops.

Polynomials are finite coefficient sequences indexed by the power of z.
Coefficient matrices of matrix-valued polynomials are plain numpy arrays.
"""

from __future__ import annotations

import numpy as np

# Absolute size below which a coefficient counts as zero; everything in this
# problem domain is O(1), so an absolute cutoff is safe.
COEFF_TOL = 1e-12


class RootFindingError(RuntimeError):
    """Raised when polished roots fail the residual check."""


class ComplexPoly:
    """Polynomial with complex coefficients, coeffs[k] multiplying z**k.

    The zero polynomial has an empty coefficient array and degree -1;
    otherwise trailing coefficients below ``COEFF_TOL`` are stripped so the
    leading coefficient is nonzero.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        nz = np.nonzero(np.abs(c) > COEFF_TOL)[0]
        self.coeffs = c[: nz[-1] + 1].copy() if nz.size else np.zeros(0, dtype=complex)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def coeff(self, k: int) -> complex:
        if 0 <= k < len(self.coeffs):
            return complex(self.coeffs[k])
        return 0.0 + 0.0j

    def __call__(self, z: complex) -> complex:
        return poly_eval(self, z)

    def __add__(self, other: "ComplexPoly") -> "ComplexPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        c = np.zeros(n, dtype=complex)
        c[: len(self.coeffs)] += self.coeffs
        c[: len(other.coeffs)] += other.coeffs
        return ComplexPoly(c)

    def __sub__(self, other: "ComplexPoly") -> "ComplexPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        c = np.zeros(n, dtype=complex)
        c[: len(self.coeffs)] += self.coeffs
        c[: len(other.coeffs)] -= other.coeffs
        return ComplexPoly(c)

    def __mul__(self, other) -> "ComplexPoly":
        if isinstance(other, ComplexPoly):
            if self.is_zero() or other.is_zero():
                return ComplexPoly([])
            return ComplexPoly(np.convolve(self.coeffs, other.coeffs))
        return ComplexPoly(self.coeffs * complex(other))

    __rmul__ = __mul__

    def shift(self, s: int) -> "ComplexPoly":
        """Multiply by z**s (s >= 0) or divide by z**-s, dropping low terms."""
        if s >= 0:
            return ComplexPoly(np.concatenate([np.zeros(s, dtype=complex), self.coeffs]))
        return ComplexPoly(self.coeffs[-s:])

    def conj_reflect(self) -> "ComplexPoly":
        """Coefficient-reversed conjugate: z**deg * conj(p(1/conj(z)))."""
        return ComplexPoly(np.conj(self.coeffs[::-1]))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs)) if len(self.coeffs) else 0.0

    def __repr__(self) -> str:
        return f"ComplexPoly({np.array2string(self.coeffs, precision=6)})"


def poly_eval(p: ComplexPoly, z: complex) -> complex:
    """Evaluate p at z by Horner's rule."""
    acc = 0.0 + 0.0j
    for c in p.coeffs[::-1]:
        acc = acc * z + c
    return complex(acc)


def poly_divmod(p: ComplexPoly, d: ComplexPoly) -> tuple[ComplexPoly, ComplexPoly]:
    """Long division: p = q*d + r with deg r < deg d.

    Raises ZeroDivisionError for a zero divisor.
    """
    if d.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    rem = p.coeffs.astype(complex).copy()
    dd = d.degree
    lead = d.coeffs[-1]
    if len(rem) - 1 < dd:
        return ComplexPoly([]), ComplexPoly(rem)
    q = np.zeros(len(rem) - dd, dtype=complex)
    for k in range(len(rem) - 1, dd - 1, -1):
        f = rem[k] / lead
        q[k - dd] = f
        rem[k - dd : k + 1] -= f * d.coeffs
        rem[k] = 0.0
    return ComplexPoly(q), ComplexPoly(rem[:dd])


def poly_from_roots(roots, lead: complex = 1.0) -> ComplexPoly:
    """Monic-up-to-lead polynomial with the given root multiset."""
    c = np.array([lead], dtype=complex)
    for r in roots:
        c = np.convolve(c, np.array([-r, 1.0], dtype=complex))
    return ComplexPoly(c)


def poly_roots(p: ComplexPoly, tol: float = 1e-8):
    """All roots with multiplicity, via companion-matrix eigenvalues.

    Each eigenvalue gets one Newton polish step.  Residuals are then checked
    against tol * ||p||; a failure raises RootFindingError naming the number
    of refinement steps taken.
    """
    if p.is_zero():
        raise ValueError("the zero polynomial has no well-defined root set")
    if p.degree == 0:
        return []
    monic = p.coeffs / p.coeffs[-1]
    n = len(monic) - 1
    comp = np.zeros((n, n), dtype=complex)
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -monic[:-1]
    roots = np.linalg.eigvals(comp)

    dcoeffs = p.coeffs[1:] * np.arange(1, len(p.coeffs))
    dp = ComplexPoly(dcoeffs)
    polished = []
    for r in roots:
        pr = poly_eval(p, r)
        dr = poly_eval(dp, r)
        if abs(dr) > COEFF_TOL:
            step = pr / dr
            if abs(step) < 1.0:  # reject wild steps near multiple roots
                r = r - step
        polished.append(complex(r))

    scale = p.norm()
    worst = max(abs(poly_eval(p, r)) for r in polished)
    if worst > tol * scale:
        raise RootFindingError(
            f"root residual {worst:.3e} exceeds {tol:.1e} * ||p|| after 1 Newton step"
        )
    return polished


def matpoly_eval(coeffs, z: complex) -> np.ndarray:
    """Evaluate a matrix polynomial sum_k z**k * coeffs[k] at z.

    ``coeffs`` is a sequence (or (g, N, N) array) of square matrices.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    acc = np.zeros_like(coeffs[0])
    for ck in coeffs[::-1]:
        acc = acc * z + ck
    return acc
