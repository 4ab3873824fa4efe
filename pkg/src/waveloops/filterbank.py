"""Subband filter banks and their action on two-sided sequences.

A bank of scale N holds polynomials m_0..m_{N-1}; the scaled coefficients
of m_0 are the lowpass taps a_k with sum 2.  Banks correspond one-to-one
with unitary polynomial loops by polyphase splitting: the loop entry (j, k)
collects every N-th coefficient of m_j starting at offset k.

Sequences are sparse dicts {index: value} over all integers.  Support grows
by at most N*g per isometry application and is never truncated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .loopgroup import MatrixLoop, circle_points, validate_loop
from .polyalg import COEFF_TOL, ComplexPoly

SparseSeq = dict  # {int: complex}, finitely supported


class FilterBank:
    """Scale-N bank of subband symbols m_0..m_{N-1} stored coefficientwise."""

    __slots__ = ("N", "coeffs")

    def __init__(self, n: int, coeff_lists):
        if n < 2:
            raise ValueError("scale must be at least 2")
        if len(coeff_lists) != n:
            raise ValueError(f"expected {n} filters, got {len(coeff_lists)}")
        self.N = n
        self.coeffs = [np.atleast_1d(np.asarray(c, dtype=complex)) for c in coeff_lists]

    @property
    def genus(self) -> int:
        longest = max(len(c) for c in self.coeffs)
        return max(1, math.ceil(longest / self.N))

    def m(self, j: int) -> ComplexPoly:
        return ComplexPoly(self.coeffs[j])

    @property
    def lowpass(self) -> np.ndarray:
        """Taps a_k = sqrt(N) * coefficients of m_0 (sum 2 when normalized)."""
        return np.sqrt(self.N) * self.coeffs[0]

    @property
    def highpass(self) -> np.ndarray:
        if self.N != 2:
            raise ValueError("highpass taps are defined for scale 2 banks")
        return np.sqrt(2.0) * self.coeffs[1]

    def taps(self, j: int) -> np.ndarray:
        return np.sqrt(self.N) * self.coeffs[j]

    @classmethod
    def from_lowpass(cls, a) -> "FilterBank":
        """Scale-2 bank from the lowpass taps and the canonical highpass."""
        a = np.atleast_1d(np.asarray(a, dtype=complex))
        b = highpass_from_lowpass(a)
        return cls(2, [a / np.sqrt(2.0), b / np.sqrt(2.0)])

    def to_json_dict(self) -> dict:
        return {
            "N": self.N,
            "m": [[[float(v.real), float(v.imag)] for v in c] for c in self.coeffs],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "FilterBank":
        return cls(int(data["N"]), [[complex(re, im) for re, im in c] for c in data["m"]])

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "FilterBank":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass
class QMFReport:
    circle_residual: float  # sum_k |m0(z w^k)|^2 - N over circle samples
    normalization_residual: float  # |m0(1) - sqrt(N)|
    orthogonality_residual: float  # shifted tap autocorrelations

    def passed(self, tol: float = 1e-10) -> bool:
        return (
            self.circle_residual <= tol
            and self.normalization_residual <= tol
            and self.orthogonality_residual <= tol
        )


@dataclass
class FiltrationResult:
    """Outcome of stripping the largest common monomial from a bank."""

    s: int
    reduced: "FilterBank"
    lambda0: float
    degenerate_diagonal: bool  # lambda0 == 1: loop is V * diag(1, b z^(g-1))


def filters_from_loop(loop: MatrixLoop) -> FilterBank:
    """m_j(z) = sum_k A_jk(z^N) z^k; degree at most N*g - 1."""
    n, g = loop.N, loop.genus
    coeffs = np.zeros((n, n * g), dtype=complex)
    for j in range(n):
        for k in range(n):
            coeffs[j, k::n] = loop.coeffs[:, j, k]
    return FilterBank(n, list(coeffs))


def loop_from_filters(bank: FilterBank, tol: float = 1e-10) -> MatrixLoop:
    """Inverse polyphase split; rejects banks that are not unitary."""
    n = bank.N
    g = bank.genus
    c = np.zeros((g, n, n), dtype=complex)
    for j in range(n):
        mj = bank.coeffs[j]
        for idx, v in enumerate(mj):
            c[idx // n, j, idx % n] = v
    loop = MatrixLoop(c)
    report = validate_loop(loop, tol)
    if not report.valid:
        raise ValueError(
            "filters do not form a unitary bank "
            f"(unitarity residual {report.unitarity_residual:.3e})"
        )
    return loop


def highpass_from_lowpass(a) -> np.ndarray:
    """Canonical scale-2 highpass b_k = (-1)^k conj(a_{L-1-k}), L = 2g."""
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    if len(a) % 2 != 0:
        raise ValueError("lowpass length must be even (2g taps)")
    signs = (-1.0) ** np.arange(len(a))
    return signs * np.conj(a[::-1])


def qmf_check(bank: FilterBank, samples: int = 128) -> QMFReport:
    """Residuals of the three lowpass conditions; never raises."""
    n = bank.N
    m0 = bank.m(0)
    rot = np.exp(2j * np.pi * np.arange(n) / n)
    circle_res = 0.0
    for z in circle_points(samples):
        total = sum(abs(m0(z * w)) ** 2 for w in rot)
        circle_res = max(circle_res, abs(total - n))
    norm_res = abs(m0(1.0) - np.sqrt(n))

    a = bank.lowpass
    orth_res = 0.0
    upper = math.ceil(len(a) / n)
    for l in range(-upper, upper + 1):
        acc = 0.0 + 0.0j
        for k in range(len(a)):
            if 0 <= k + n * l < len(a):
                acc += a[k + n * l] * np.conj(a[k])
        target = n if l == 0 else 0.0
        orth_res = max(orth_res, abs(acc - target))
    return QMFReport(float(circle_res), float(norm_res), float(orth_res))


def seq_norm(xi: SparseSeq) -> float:
    return math.sqrt(sum(abs(v) ** 2 for v in xi.values()))


def seq_inner(xi: SparseSeq, eta: SparseSeq) -> complex:
    small, big = (xi, eta) if len(xi) < len(eta) else (eta, xi)
    if small is xi:
        return sum(np.conj(v) * big.get(k, 0.0) for k, v in small.items())
    return sum(np.conj(xi.get(k, 0.0)) * v for k, v in small.items())


def seq_sub(xi: SparseSeq, eta: SparseSeq) -> SparseSeq:
    out = dict(xi)
    for k, v in eta.items():
        out[k] = out.get(k, 0.0) - v
    return out


def apply_S(bank: FilterBank, j: int, xi: SparseSeq) -> SparseSeq:
    """(S_j xi)_k = (1/sqrt(N)) sum_l taps_j[k - l*N] xi_l."""
    taps = bank.taps(j)
    n = bank.N
    scale = 1.0 / np.sqrt(n)
    out: SparseSeq = {}
    for l, v in xi.items():
        base = n * l
        for k, t in enumerate(taps):
            if t != 0.0:
                idx = base + k
                out[idx] = out.get(idx, 0.0) + scale * t * v
    return {k: v for k, v in out.items() if v != 0.0}


def apply_S_adjoint(bank: FilterBank, j: int, xi: SparseSeq) -> SparseSeq:
    """(S_j* xi)_l = (1/sqrt(N)) sum_k conj(taps_j[k - l*N]) xi_k."""
    taps = bank.taps(j)
    n = bank.N
    scale = 1.0 / np.sqrt(n)
    out: SparseSeq = {}
    for k, v in xi.items():
        for t_idx, t in enumerate(taps):
            if t != 0.0 and (k - t_idx) % n == 0:
                l = (k - t_idx) // n
                out[l] = out.get(l, 0.0) + scale * np.conj(t) * v
    return {k: v for k, v in out.items() if v != 0.0}


def subband_projection(bank: FilterBank, n: int, xi: SparseSeq) -> SparseSeq:
    """Project onto the n-th detail subband: S0^(n-1)S0*^(n-1) - S0^n S0*^n."""
    if n < 1:
        raise ValueError("subband index starts at 1")

    def down_up(power: int, seq: SparseSeq) -> SparseSeq:
        cur = dict(seq)
        for _ in range(power):
            cur = apply_S_adjoint(bank, 0, cur)
        for _ in range(power):
            cur = apply_S(bank, 0, cur)
        return cur

    return seq_sub(down_up(n - 1, xi), down_up(n, xi))


def monomial_filtration(bank: FilterBank, tol: float = COEFF_TOL) -> FiltrationResult:
    """Strip the largest power of z dividing every m_j.

    Each stripped power lowers the genus by one (the loop loses its vanishing
    first and last polyphase columns).  When no stripping is possible because
    the loop instead satisfies lambda0 = 1, the bank is the degenerate
    two-monomial form and the result is flagged.
    """
    firsts = []
    for c in bank.coeffs:
        nz = np.nonzero(np.abs(c) > tol)[0]
        if nz.size == 0:
            raise ValueError("bank contains a zero filter")
        firsts.append(int(nz[0]))
    s = min(firsts)
    reduced = FilterBank(bank.N, [c[s:] for c in bank.coeffs]) if s else bank

    lam0 = float(sum(abs(c[0]) ** 2 for c in bank.coeffs))
    return FiltrationResult(
        s=s,
        reduced=reduced,
        lambda0=lam0,
        degenerate_diagonal=abs(lam0 - 1.0) <= 1e-10,
    )
