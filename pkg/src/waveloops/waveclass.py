"""Classification layer: vanishing moments, cycle test, census, grid scans.

A lowpass symbol generates an orthonormal wavelet basis (not merely a tight
frame) exactly when the zero set of m0(-z) avoids every nontrivial finite
orbit of the squaring map on the circle.  The orbits live on roots of unity
of order 2^k - 1, which makes the test finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cascade import divergence_flags
from .cuntzrep import classify, lambda0
from .filterbank import FilterBank, loop_from_filters
from .loopgroup import TwoParamPoint, two_param_coeffs
from .polyalg import ComplexPoly, poly_divmod, poly_eval

CYCLE_TOL = 1e-8  # relative containment tolerance on |m0(-c)|


@dataclass(frozen=True)
class Cycle:
    """Finite orbit of z -> z^2 on the circle, other than {1}.

    Points are (2^length - 1)-th roots of unity; squaring permutes them
    cyclically.  ``fractions`` stores the exact angles as multiples of 2*pi.
    """

    fractions: tuple  # of Fraction, orbit-sorted: each squares to the next
    @property
    def length(self) -> int:
        return len(self.fractions)

    @property
    def root_order(self) -> int:
        return 2**self.length - 1

    @property
    def points(self) -> tuple:
        return tuple(np.exp(2j * np.pi * float(f)) for f in self.fractions)


@dataclass
class CohenResult:
    kind: str  # "strict" | "tight_frame_only"
    cycle: Cycle | None = None

    @property
    def strict(self) -> bool:
        return self.kind == "strict"


@dataclass
class CensusRecord:
    coeffs: np.ndarray
    lambda0: float
    cycle_length: int
    classification: str  # "irreducible" | "reducible"
    witness: TwoParamPoint


@dataclass
class ScanRecord:
    theta: float
    rho: float
    coeffs: np.ndarray
    lambda0: float
    diverges_left: bool
    diverges_right: bool
    marginal: bool
    moment_order: int
    cohen: str  # "strict" or "tightK"
    embed_0_3: bool  # four active taps supported on [0,3]
    embed_1_4: bool
    embed_2_5: bool


SCAN_CSV_HEADER = (
    "theta,rho,a0,a1,a2,a3,a4,a5,lambda0,div_left,div_right,marginal,"
    "moment_order,cohen,embed0_3,embed1_4,embed2_5"
)


def moment_order(m0: ComplexPoly, tol: float = 1e-9) -> int:
    """Largest p with (1+z)^p dividing m0, by repeated synthetic division."""
    if m0.is_zero():
        raise ValueError("zero polynomial has no moment order")
    one_plus_z = ComplexPoly([1.0, 1.0])
    scale = max(m0.norm(), 1e-300)
    p = 0
    work = m0
    while work.degree >= 1:
        q, r = poly_divmod(work, one_plus_z)
        if r.norm() > tol * scale:
            break
        p += 1
        work = q
    return p


def enumerate_cycles(max_len: int) -> list[Cycle]:
    """All squaring-map cycles of length <= max_len, deduplicated.

    Orbits are generated exactly on the angle fractions m/(2^k - 1); the
    trivial fixed point {1} is excluded.  Results are sorted by length and
    then by smallest angle, so the order is deterministic.
    """
    if max_len > 6:
        raise ValueError("cycle enumeration is capped at length 6")
    seen: set = set()
    cycles = []
    for k in range(1, max_len + 1):
        order = 2**k - 1
        for m in range(1, order):
            f = Fraction(m, order)
            orbit = [f]
            cur = (2 * f) % 1
            while cur != f:
                orbit.append(cur)
                cur = (2 * cur) % 1
            key = frozenset(orbit)
            if key in seen or len(orbit) > max_len:
                continue
            seen.add(key)
            start = min(orbit)
            idx = orbit.index(start)
            cycles.append(Cycle(tuple(orbit[idx:] + orbit[:idx])))
    cycles.sort(key=lambda c: (c.length, c.fractions))
    return cycles


def cohen_classify(m0: ComplexPoly, tol: float = CYCLE_TOL) -> CohenResult:
    """Strict wavelet vs tight-frame-only, by cycle containment in zeros.

    Containment is tested by evaluating |m0(-c)| at the cycle points against
    tol times the largest coefficient; a cycle inside the zero set needs
    length at most deg(m0) - 1 because -1 is always consumed by the root
    forced at z = 1.
    """
    if m0.is_zero():
        raise ValueError("zero polynomial cannot be classified")
    scale = float(np.max(np.abs(m0.coeffs)))
    max_len = min(6, max(m0.degree - 1, 0))
    for cyc in enumerate_cycles(max_len) if max_len >= 1 else []:
        if all(abs(poly_eval(m0, -c)) <= tol * scale for c in cyc.points):
            return CohenResult("tight_frame_only", cyc)
    return CohenResult("strict")


_CENSUS_WITNESSES = (
    TwoParamPoint(math.pi / 4, math.pi / 2),
    TwoParamPoint(3 * math.pi / 4, math.pi / 2),
    TwoParamPoint(0.0, 0.0),
    TwoParamPoint(math.pi / 2, math.pi / 2),
)
_CENSUS_ROWS = (
    (0, 0, 1, 0, 0, 1),
    (1, 0, 0, 1, 0, 0),
    (0, 1, 0, 0, 1, 0),
    (1, 0, 0, 0, 0, 1),
)


def tight_frame_census() -> list[CensusRecord]:
    """The four six-tap banks that are tight frames but not strict wavelets.

    Each record is recomputed live from its parameter witness and
    cross-checked: coefficients against the closed form, cycle length by the
    containment test, and reducibility by the fixed-space dimension.
    """
    records = []
    for witness, row in zip(_CENSUS_WITNESSES, _CENSUS_ROWS):
        a = two_param_coeffs(witness)
        if np.max(np.abs(a - np.array(row, dtype=float))) > 1e-10:
            raise AssertionError(f"witness {witness} does not reproduce row {row}")
        bank = FilterBank.from_lowpass(a)
        loop = loop_from_filters(bank)
        cohen = cohen_classify(bank.m(0))
        if cohen.strict:
            raise AssertionError(f"census row {row} failed the cycle test")
        cls = classify(loop)
        records.append(
            CensusRecord(
                coeffs=a,
                lambda0=lambda0(loop),
                cycle_length=cohen.cycle.length,
                classification=cls.tag,
                witness=witness,
            )
        )
    return records


def _embedding_flags(a: np.ndarray, tol: float = 1e-9):
    """Which three-interval subfamily (two vanishing end taps) a belongs to."""
    e03 = abs(a[4]) <= tol and abs(a[5]) <= tol
    e14 = abs(a[0]) <= tol and abs(a[5]) <= tol
    e25 = abs(a[0]) <= tol and abs(a[1]) <= tol
    return e03, e14, e25


def scan_cell(theta: float, rho: float) -> ScanRecord:
    """Classification data for one parameter point."""
    a = two_param_coeffs(TwoParamPoint(theta, rho))
    lam0 = 0.5 * float(a[0] ** 2 + a[5] ** 2)  # first-tap mass of the pair (m0, m1)
    flags = divergence_flags(a)
    m0 = ComplexPoly(a / np.sqrt(2.0))
    cohen = cohen_classify(m0)
    e03, e14, e25 = _embedding_flags(a)
    return ScanRecord(
        theta=theta,
        rho=rho,
        coeffs=a,
        lambda0=lam0,
        diverges_left=flags.diverges_left,
        diverges_right=flags.diverges_right,
        marginal=flags.marginal,
        moment_order=moment_order(m0),
        cohen="strict" if cohen.strict else f"tight{cohen.cycle.length}",
        embed_0_3=e03,
        embed_1_4=e14,
        embed_2_5=e25,
    )


def grid_scan(
    theta_range=(0.0, math.pi),
    rho_range=(0.0, math.pi),
    step: float = math.pi / 12,
) -> list[ScanRecord]:
    """Half-open scan over [theta0, theta1) x [rho0, rho1), row-major in
    (theta, rho); output order is by cell index and never depends on how the
    cells are computed."""
    if step <= 0:
        raise ValueError("step must be positive")
    thetas = _half_open_grid(*theta_range, step)
    rhos = _half_open_grid(*rho_range, step)
    return [scan_cell(t, r) for t in thetas for r in rhos]


def _half_open_grid(lo: float, hi: float, step: float) -> np.ndarray:
    count = max(0, math.ceil((hi - lo) / step - 1e-12))
    return lo + step * np.arange(count)


def tight_frame_cells(step: float, tol: float = CYCLE_TOL) -> list[tuple[float, float]]:
    """Vectorized sweep of [0, pi)^2 for tight-frame-only cells.

    Evaluates the cycle containment test for every candidate cycle on the
    whole grid at once; used for the census completeness check at fine steps.
    """
    axis = _half_open_grid(0.0, math.pi, step)
    tt, rr = np.meshgrid(axis, axis, indexing="ij")
    t2, r2 = 2.0 * tt, 2.0 * rr
    ct, st = np.cos(t2), np.sin(t2)
    cr, sr = np.cos(r2), np.sin(r2)
    cd, sd = np.cos(t2 - r2), np.sin(t2 - r2)
    a = np.stack(
        [
            0.25 * (1 - ct - st - cr - sr + cd + sd),
            0.25 * (1 + ct - st + cr - sr + cd - sd),
            0.50 * (1 - cd - sd),
            0.50 * (1 - cd + sd),
            0.25 * (1 + ct + st + cr + sr + cd + sd),
            0.25 * (1 - ct + st - cr + sr + cd - sd),
        ]
    )  # shape (6, T, R)
    scale = np.max(np.abs(a), axis=0)
    hit = np.zeros(tt.shape, dtype=bool)
    for cyc in enumerate_cycles(4):
        inside = np.ones(tt.shape, dtype=bool)
        for c in cyc.points:
            powers = np.array([(-c) ** k for k in range(6)])
            val = np.tensordot(powers, a, axes=(0, 0))
            inside &= np.abs(val) <= tol * scale
            if not inside.any():
                break
        hit |= inside
    idx = np.argwhere(hit)
    return [(float(axis[i]), float(axis[j])) for i, j in idx]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def scan_to_csv(records, fh) -> None:
    """Deterministic CSV in the documented column order."""
    fh.write(SCAN_CSV_HEADER + "\n")
    for r in records:
        cells = [_fmt(r.theta), _fmt(r.rho)]
        cells += [_fmt(v) for v in r.coeffs]
        cells.append(_fmt(r.lambda0))
        cells += [
            str(int(r.diverges_left)),
            str(int(r.diverges_right)),
            str(int(r.marginal)),
            str(r.moment_order),
            r.cohen,
            str(int(r.embed_0_3)),
            str(int(r.embed_1_4)),
            str(int(r.embed_2_5)),
        ]
        fh.write(",".join(cells) + "\n")
