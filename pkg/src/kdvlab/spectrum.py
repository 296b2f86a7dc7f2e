"""Spectrum of the linearised operator by two independent routes.

The matrix route diagonalises ``A_h``.  The determinant route needs no
discretisation.  Eigenfunctions solve ``v''' + v' + lam v = 0`` with
``v(0) = v(L) = v'(L) = 0``.  Take the fundamental matrix
``Y(x) = expm(M x)`` of the companion system and keep the two solutions with
``v(0) = 0``.  The characteristic function is then the 2x2 minor of
``Y(L)`` formed by the ``v(L)`` and ``v'(L)`` rows.  This equals the
3x3 boundary determinant of the exponential basis ``exp(mu_j x)`` divided
by the Vandermonde determinant of the roots ``mu_j``.  So it is entire in
``lam``, and a repeated root needs no special basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import NoKernelError, NumericalError, SearchFailureError
from .grid import Grid, GridFunction, sample
from .operator import DEFAULT_SCHEME, OperatorMatrix, Scheme, assemble_operator

MERGE_TOL = 1e-8
ROOT_TOL = 1e-10


@dataclass
class EigenPair:
    value: complex
    vector: Optional[GridFunction] = field(default=None, repr=False)


@dataclass
class SpectrumResult:
    method: str
    length: float
    pairs: list = field(repr=False)

    def __post_init__(self):
        self.pairs = sorted(self.pairs, key=lambda p: (-p.value.real, p.value.imag))

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.value for p in self.pairs], dtype=complex)

    @property
    def growth_bound(self) -> float:
        return float(self.pairs[0].value.real) if self.pairs else -math.inf


@dataclass
class CriticalLengthTable:
    max_index: int
    entries: list  # (j, l, value), sorted by value, duplicates merged

    @property
    def values(self) -> np.ndarray:
        return np.array([e[2] for e in self.entries])


def critical_lengths(max_index: int) -> CriticalLengthTable:
    """Lengths ``2 pi sqrt((j^2 + l^2 + j l) / 3)`` for ``1 <= j <= l <= max_index``."""
    if max_index < 1:
        raise ValueError("max_index must be >= 1")
    raw = sorted(
        (2 * math.pi * math.sqrt((j * j + l * l + j * l) / 3.0), j, l)
        for j in range(1, max_index + 1)
        for l in range(j, max_index + 1)
    )
    entries = []
    for value, j, l in raw:
        if entries and abs(value - entries[-1][2]) <= 1e-12 * max(1.0, value):
            continue
        entries.append((j, l, value))
    return CriticalLengthTable(max_index, entries)


def is_critical(length: float, max_index: int = 10, tol: float = 1e-9) -> bool:
    table = critical_lengths(max_index)
    return bool(np.any(np.abs(table.values - length) <= tol))


def cubic_roots(lam: complex) -> np.ndarray:
    """Roots of ``mu^3 + mu + lam = 0``."""
    return np.roots([1.0, 0.0, 1.0, lam])


def _companion(lam: complex) -> np.ndarray:
    return np.array([[0, 1, 0], [0, 0, 1], [-lam, -1, 0]], dtype=complex)


_D_COMPANION = np.zeros((3, 3), dtype=complex)
_D_COMPANION[2, 0] = -1.0


def _raw_determinant(lam: complex, length: float, derivative: bool = False):
    m = _companion(lam) * length
    if derivative:
        y, dy = scipy.linalg.expm_frechet(m, _D_COMPANION * length)
    else:
        y = scipy.linalg.expm(m)
    # columns 1, 2: solutions with (v, v', v'')(0) = (0, 1, 0) and (0, 0, 1)
    f = y[0, 1] * y[1, 2] - y[0, 2] * y[1, 1]
    if not derivative:
        return f
    df = dy[0, 1] * y[1, 2] + y[0, 1] * dy[1, 2] - dy[0, 2] * y[1, 1] - y[0, 2] * dy[1, 1]
    return f, df


def _scale(lam: complex, length: float) -> float:
    growth = np.maximum(cubic_roots(lam).real, 0.0).sum()
    return math.exp(-growth * length)


def characteristic_function(lam: complex, length: float) -> complex:
    """Overflow-safe characteristic function; zero exactly on the point spectrum.

    The value is the boundary determinant with each exponential column scaled
    by ``exp(-max(Re mu_j, 0) L)``.  At ``lam = 0`` it reduces to
    ``1 - cos L``.
    """
    lam = complex(lam)
    return complex(_raw_determinant(lam, length) * _scale(lam, length))


def _newton(lam: complex, length: float, max_iter: int = 60):
    for _ in range(max_iter):
        f, df = _raw_determinant(lam, length, derivative=True)
        if df == 0 or not np.isfinite(df):
            return None
        step = f / df
        lam = lam - step
        if not np.isfinite(lam) or abs(lam) > 1e6:
            return None
        if abs(step) <= 1e-14 * max(1.0, abs(lam)):
            break
    else:
        return None
    if abs(characteristic_function(lam, length)) > ROOT_TOL:
        return None
    return lam


def _seeds(length, re_range, im_range, density):
    nre = max(2, int(math.ceil(density * (re_range[1] - re_range[0]))) + 1)
    nim = max(2, int(math.ceil(density * (im_range[1] - im_range[0]))) + 1)
    re = np.linspace(re_range[0], re_range[1], nre)
    im = np.linspace(im_range[0], im_range[1], nim)
    values = np.array(
        [[characteristic_function(complex(a, b), length) for a in re] for b in im]
    )
    mag = np.abs(values)
    seeds = []
    # argument principle on each grid cell
    for k in range(nim - 1):
        for i in range(nre - 1):
            loop = [values[k, i], values[k, i + 1], values[k + 1, i + 1], values[k + 1, i], values[k, i]]
            if np.any(np.array(loop) == 0):
                seeds.append(complex(re[i], im[k]))
                continue
            turn = sum(np.angle(loop[q + 1] / loop[q]) for q in range(4))
            if abs(turn) > math.pi:
                seeds.append(complex(0.5 * (re[i] + re[i + 1]), 0.5 * (im[k] + im[k + 1])))
    # local minima of |F| catch roots the coarse winding count misses
    padded = np.pad(mag, 1, constant_values=np.inf)
    for k in range(nim):
        for i in range(nre):
            window = padded[k : k + 3, i : i + 3]
            if mag[k, i] <= window.min():
                seeds.append(complex(re[i], im[k]))
    return seeds


def find_eigenvalues_determinant(
    length: float,
    re_range=(-1.0, 0.1),
    im_range=(-5.0, 5.0),
    grid_density: int = 8,
) -> SpectrumResult:
    """Zeros of the characteristic function inside a rectangle.

    Grid seeds (winding number per cell and local minima of |F|) are refined
    by Newton's method; seeds that fail to converge are dropped.
    """
    if grid_density < 8:
        raise ValueError("grid_density must be >= 8")
    if not (re_range[0] < re_range[1] and im_range[0] < im_range[1]):
        raise ValueError("empty search region")
    roots: list[complex] = []
    pad = 1e-9
    for seed in _seeds(length, re_range, im_range, grid_density):
        root = _newton(seed, length)
        if root is None:
            continue
        if not (re_range[0] - pad <= root.real <= re_range[1] + pad
                and im_range[0] - pad <= root.imag <= im_range[1] + pad):
            continue
        if abs(root.imag) < 1e-12:
            root = complex(root.real, 0.0)
        if all(abs(root - r) > MERGE_TOL for r in roots):
            roots.append(root)
    contains_zero = re_range[0] <= 0 <= re_range[1] and im_range[0] <= 0 <= im_range[1]
    if not roots and contains_zero and is_critical(length, max_index=20, tol=1e-9):
        raise SearchFailureError(
            f"no eigenvalue found in {re_range}x{im_range}i although L={length} is critical"
        )
    return SpectrumResult("determinant", length, [EigenPair(r) for r in roots])


def matrix_spectrum(op: OperatorMatrix) -> SpectrumResult:
    """All eigenpairs of ``A_h``; eigenvectors have unit discrete L2 norm."""
    if op.n > 4096:
        raise ValueError("dense eigensolve limited to n <= 4096")
    try:
        values, vectors = scipy.linalg.eig(op.toarray())
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    vectors = vectors / (math.sqrt(op.grid.h) * np.linalg.norm(vectors, axis=0))
    pairs = [EigenPair(complex(v), GridFunction(op.grid, vectors[:, k])) for k, v in enumerate(values)]
    return SpectrumResult("matrix", op.grid.length, pairs)


def kernel_profile(grid: Grid) -> GridFunction:
    """Sampled ``1 - cos x`` (not normalised)."""
    return sample(lambda x: 1.0 - np.cos(x), grid)


def nearest_to_zero(result: SpectrumResult) -> EigenPair:
    return min(result.pairs, key=lambda p: abs(p.value))


def kernel_similarity(pair: EigenPair) -> float:
    """|cosine| between an eigenvector and the sampled ``1 - cos x``."""
    v = pair.vector.values
    ref = kernel_profile(pair.vector.grid).values
    return float(abs(np.vdot(ref, v)) / (np.linalg.norm(ref) * np.linalg.norm(v)))


def spectral_gap(result: SpectrumResult, kernel_tol: float) -> float:
    """Largest real part among eigenvalues farther than ``kernel_tol`` from 0."""
    rest = [p.value.real for p in result.pairs if abs(p.value) > kernel_tol]
    return max(rest) if rest else -math.inf


def kernel_vector(grid: Grid, scheme: Scheme | str = DEFAULT_SCHEME, op: OperatorMatrix | None = None) -> GridFunction:
    """Unit-norm eigenvector of ``A_h`` whose eigenvalue is nearest zero.

    Raises :class:`NoKernelError` when that eigenvalue exceeds ``10 h`` in
    modulus, which is the expected outcome at non-critical lengths.
    """
    if op is None:
        op = assemble_operator(grid, scheme)
    values, vectors = scipy.linalg.eig(op.toarray())
    k = int(np.argmin(np.abs(values)))
    if abs(values[k]) > 10 * grid.h:
        raise NoKernelError(
            f"no null direction at L={grid.length}: nearest eigenvalue {values[k]:.6g}"
        )
    v = vectors[:, k]
    # eigenvalue is real here; rotate out the arbitrary complex phase
    v = v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))
    v = v.real
    v /= math.sqrt(grid.h) * np.linalg.norm(v)
    if np.dot(v, kernel_profile(grid).values) < 0:
        v = -v
    return GridFunction(grid, v)
