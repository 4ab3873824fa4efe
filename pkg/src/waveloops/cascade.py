"""Local cascade iteration for scaling- and wavelet-function grids (scale 2).

Level n attaches one value to each grid point x_i = i * 2^-n,
i = 0 .. q-1 with q = (2g-1)*2^n - 2(g-1).  One step maps a level-n list to
the level-(n+1) list by

    out[i] = sum over taps k with k = i (mod 2) of  a_k * val[(i - k) / 2],

which appends one more digit (the finest one) to the base-2 positional
expansion x = sum_j d_j 2^-j with digits d_j in 0..2g-1; the value at x is
the sum of the tap products over all digit strings representing x.  Values
between grid points are deliberately undefined; exports emit point sets and
never interpolate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass
class CascadeGrid:
    genus: int
    level: int
    values: np.ndarray  # length (2g-1)*2^level - 2(g-1)

    @property
    def spacing(self) -> Fraction:
        return Fraction(1, 2**self.level)

    @property
    def endpoint(self) -> Fraction:
        """x_f, the last grid point carrying a value."""
        return Fraction(len(self.values) - 1, 2**self.level)

    def x(self, i: int) -> Fraction:
        return Fraction(i, 2**self.level)


@dataclass
class DivergenceFlags:
    diverges_left: bool  # first tap exceeds 1: blow-up at the left end
    diverges_right: bool  # last tap exceeds 1: blow-up at the right end
    marginal: bool  # an end tap equals 1 to within 1e-10


@dataclass
class TransferMatrices:
    """The 4x4 and two 5x5 stage-transfer matrices for six taps (g=3)."""

    four_by_four: np.ndarray
    five_a: np.ndarray  # left eigenpair (a5, (1,0,0,0,0))
    five_b: np.ndarray  # left eigenpair (a0, (0,0,0,0,1))
    eigen_report: dict


def grid_size(g: int, n: int) -> int:
    """(2g-1)*2^n - 2(g-1); follows q -> 2(q + g - 1) from one element."""
    if g < 1 or n < 0:
        raise ValueError("need genus >= 1 and level >= 0")
    return (2 * g - 1) * 2**n - 2 * (g - 1)


def cascade_step(values, taps):
    """One refinement step; works on numeric arrays and object sequences.

    ``values`` has length q at some level, ``taps`` length 2g; the result
    has length 2(q + g - 1).
    """
    taps = list(taps)
    if len(taps) % 2 != 0 or not taps:
        raise ValueError("tap list must have even length 2g")
    g = len(taps) // 2
    q = len(values)

    arr = np.asarray(values)
    taps_arr = np.asarray(taps)
    if arr.dtype != object and taps_arr.dtype != object:
        a = taps_arr
        if np.iscomplexobj(a) or np.iscomplexobj(arr):
            arr = arr.astype(complex)
            a = a.astype(complex)
        else:
            arr = arr.astype(float)
            a = a.astype(float)
        even = np.convolve(arr, a[0::2])
        odd = np.convolve(arr, a[1::2])
        out = np.empty(2 * (q + g - 1), dtype=arr.dtype)
        out[0::2] = even
        out[1::2] = odd
        return out

    # object path (exact or symbolic coefficients)
    out = [0] * (2 * (q + g - 1))
    for i in range(len(out)):
        acc = 0
        for k in range(i % 2, len(taps), 2):
            j = (i - k) // 2
            if 0 <= j < q:
                acc = acc + taps[k] * values[j]
        out[i] = acc
    return np.array(out, dtype=object)


def cascade_run(a, n: int) -> CascadeGrid:
    """Iterate the refinement step n times from the one-element start."""
    a = np.atleast_1d(np.asarray(a))
    g = len(a) // 2
    dtype = complex if np.iscomplexobj(a) else float
    values = np.ones(1, dtype=dtype)
    for _ in range(n):
        values = cascade_step(values, a)
    return CascadeGrid(genus=g, level=n, values=values)


def wavelet_run(a, b, n: int) -> CascadeGrid:
    """Detail-function grid at level n+1: one highpass step, then n lowpass.

    The highpass taps supply the coarsest digit, so the result samples
    sum_k b_k phi(2x - k) on the 2^-(n+1) grid.
    """
    a = np.atleast_1d(np.asarray(a))
    b = np.atleast_1d(np.asarray(b))
    if len(a) != len(b):
        raise ValueError("lowpass and highpass tap lists must have equal length")
    g = len(a) // 2
    dtype = complex if (np.iscomplexobj(a) or np.iscomplexobj(b)) else float
    values = cascade_step(np.ones(1, dtype=dtype), b.astype(dtype))
    for _ in range(n):
        values = cascade_step(values, a.astype(dtype))
    return CascadeGrid(genus=g, level=n + 1, values=values)


def term_position(digits) -> Fraction:
    """Dyadic position of a tap-product term: x = sum_j digits[j] * 2^-(j+1)."""
    x = Fraction(0)
    for j, d in enumerate(digits, start=1):
        x += Fraction(int(d), 2**j)
    return x


def divergence_flags(a, tol: float = 1e-10) -> DivergenceFlags:
    """End-tap divergence test for six taps (g=3)."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if len(a) != 6:
        raise ValueError("divergence flags are defined for six taps")
    return DivergenceFlags(
        diverges_left=a[0] > 1.0 + tol,
        diverges_right=a[5] > 1.0 + tol,
        marginal=abs(a[0] - 1.0) <= tol or abs(a[5] - 1.0) <= tol,
    )


def transfer_matrices(a) -> TransferMatrices:
    """Square stage-transfer matrices for six taps, with eigen diagnostics.

    Every matrix has (1,...,1) as a left eigenvector whenever the even and
    odd taps sum to the same constant; the two 5x5 matrices additionally
    carry the simple left eigenpairs (a5, (1,0,0,0,0)) and (a0, (0,0,0,0,1)).
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if len(a) != 6:
        raise ValueError("transfer matrices are defined for six taps")
    a0, a1, a2, a3, a4, a5 = a
    four = np.array(
        [
            [a4, a5, 0, 0],
            [a2, a3, a4, a5],
            [a0, a1, a2, a3],
            [0, 0, a0, a1],
        ]
    )
    five_a = np.array(
        [
            [a5, 0, 0, 0, 0],
            [a3, a4, a5, 0, 0],
            [a1, a2, a3, a4, a5],
            [0, a0, a1, a2, a3],
            [0, 0, 0, a0, a1],
        ]
    )
    five_b = np.array(
        [
            [a4, a5, 0, 0, 0],
            [a2, a3, a4, a5, 0],
            [a0, a1, a2, a3, a4],
            [0, 0, a0, a1, a2],
            [0, 0, 0, 0, a0],
        ]
    )
    ones4, ones5 = np.ones(4), np.ones(5)
    e_first = np.array([1.0, 0, 0, 0, 0])
    e_last = np.array([0, 0, 0, 0, 1.0])
    report = {
        "ones_left_residual_4": float(np.max(np.abs(ones4 @ four - ones4))),
        "ones_left_residual_5a": float(np.max(np.abs(ones5 @ five_a - ones5))),
        "ones_left_residual_5b": float(np.max(np.abs(ones5 @ five_b - ones5))),
        "five_a_pair_residual": float(np.max(np.abs(e_first @ five_a - a5 * e_first))),
        "five_b_pair_residual": float(np.max(np.abs(e_last @ five_b - a0 * e_last))),
        "four_eigenvalues": np.linalg.eigvals(four),
        "five_a_eigenvalues": np.linalg.eigvals(five_a),
        "five_b_eigenvalues": np.linalg.eigvals(five_b),
    }
    return TransferMatrices(four, five_a, five_b, report)


def symmetry_check(theta: float, rho: float, n: int) -> dict:
    """Max violation of the coefficient and grid symmetries at level n.

    Keys: periodicity_coeffs, periodicity_grid, reflection_coeffs,
    reflection_grid, half_period_coeffs, twofold_a2, threefold_a0.
    """
    from .loopgroup import TwoParamPoint, two_param_coeffs

    if n > 10:
        raise ValueError("symmetry grids are capped at level 10")

    a = two_param_coeffs(TwoParamPoint(theta, rho))
    a_per = two_param_coeffs(TwoParamPoint(theta + np.pi, rho + np.pi))
    a_ref = two_param_coeffs(TwoParamPoint(-theta, -rho))
    a_half = two_param_coeffs(TwoParamPoint(theta - np.pi / 2, rho - np.pi / 2))
    # the quarter-period shift must ride on the first angle: the middle taps
    # depend only on the angle difference, which this map sends to pi/2 minus
    # itself, the unique reflection fixing 1 - cos - sin
    a_two = two_param_coeffs(TwoParamPoint(np.pi / 4 - theta, -rho))
    a_three = two_param_coeffs(TwoParamPoint(-rho + np.pi / 4, theta - rho + np.pi / 2))

    grid = cascade_run(a, n).values
    grid_per = cascade_run(a_per, n).values
    grid_ref = cascade_run(a_ref, n).values

    half_pairing = np.array([a_half[4], a_half[5], a_half[2], a_half[3], a_half[0], a_half[1]])
    return {
        "periodicity_coeffs": float(np.max(np.abs(a - a_per))),
        "periodicity_grid": float(np.max(np.abs(grid - grid_per))),
        "reflection_coeffs": float(np.max(np.abs(a - a_ref[::-1]))),
        "reflection_grid": float(np.max(np.abs(grid - grid_ref[::-1]))),
        "half_period_coeffs": float(np.max(np.abs(a - half_pairing))),
        "twofold_a2": float(abs(a[2] - a_two[2])),
        "threefold_a0": float(abs(a[0] - a_three[0])),
    }


def dyadic_str(i: int, n: int) -> str:
    """Exact decimal string of i * 2^-n (finite because 2^-n = 5^n/10^n)."""
    if n == 0:
        return str(i)
    digits = str(i * 5**n).rjust(n + 1, "0")
    head, tail = digits[:-n], digits[-n:]
    tail = tail.rstrip("0")
    return f"{head}.{tail}" if tail else head


def write_grid_csv(grid: CascadeGrid, fh) -> None:
    """CSV rows `x,value` with exact dyadic x; complex values as re+imj."""
    fh.write("x,value\n")
    for i, v in enumerate(grid.values):
        if isinstance(v, complex) or np.iscomplexobj(grid.values):
            val = complex(v)
            text = (
                format(val.real, ".17g")
                if val.imag == 0.0
                else f"{format(val.real, '.17g')}{val.imag:+.17g}j"
            )
        else:
            text = format(float(v), ".17g")
        fh.write(f"{dyadic_str(i, grid.level)},{text}\n")
