"""Acceptance criteria, one test per criterion, at the published tolerances.

Each test records a pass/fail line that is printed in the session summary.
Long runs are session fixtures so criteria sharing a run pay for it once.
Runs that need an exact discrete null vector use the central scheme; see the
README for why the default scheme only has a kernel up to O(h).
"""

import math

import numpy as np
import pytest

from kdvlab import (
    CutoffSpec,
    GridFunction,
    InitialCondition,
    Scheme,
    SimulationConfig,
    a_pde_residual,
    assemble_operator,
    characteristic_function,
    coefficient_quadrature,
    dissipativity_report,
    find_eigenvalues_determinant,
    fit_decay,
    kato_check,
    make_grid,
    matrix_spectrum,
    simulate,
)
from kdvlab.manifold import DECAY_COEFFICIENT, companion_quadratures, residual_at
from kdvlab.solver import random_smooth_field
from kdvlab.spectrum import kernel_similarity, nearest_to_zero, spectral_gap

TWO_PI = 2 * math.pi
CENTRAL = Scheme.CENTRAL_SECOND_ORDER


def _decay_config(n, delta, t_end, stride=20):
    return SimulationConfig(
        length=TWO_PI, n=n, dt=0.05, t_end=t_end, mode="nonlinear",
        initial=InitialCondition("phi_scaled", delta), scheme=CENTRAL, snapshot_stride=stride,
    )


@pytest.fixture(scope="session")
def decay_512():
    return simulate(_decay_config(512, 0.2, 1500.0))


@pytest.fixture(scope="session")
def decay_1024():
    return simulate(_decay_config(1024, 0.2, 1500.0))


@pytest.fixture(scope="session")
def decay_small():
    return simulate(_decay_config(512, 0.1, 3000.0))


@pytest.fixture(scope="session")
def matrix_2048():
    return {L: matrix_spectrum(assemble_operator(make_grid(L, 2048))) for L in (TWO_PI, math.pi)}


def test_c01_center_manifold_constant(criterion):
    q = coefficient_quadrature(make_grid(TWO_PI, 4096))
    err = abs(q + 1 / 18)
    assert criterion(1, err <= 1e-5, f"int a phi phi_x = {q:.10f}, |err| = {err:.2e} (tol 1e-5)")


def test_c02_companion_quadratures(criterion):
    small = companion_quadratures(make_grid(TWO_PI, 256))
    big = companion_quadratures(make_grid(TWO_PI, 4096))
    errs = {
        "phi^2": (abs(small["phi_sq"] - 1), 1e-10),
        "a phi": (abs(big["a_phi"]), 1e-6),
        "phi^2 phi_x": (abs(big["phi_sq_dphi"]), 1e-10),
        "a": (abs(big["a"] + 5 / 27), 1e-6),
    }
    ok = all(e <= tol for e, tol in errs.values())
    detail = ", ".join(f"{k}: {e:.1e}" for k, (e, _) in errs.items())
    assert criterion(2, ok, detail)


def test_c03_profile_identity(criterion):
    res = a_pde_residual(1000)
    assert criterion(3, res <= 1e-12, f"max residual {res:.2e} over 1000 points (tol 1e-12)")


def test_c04_kernel_at_criticality(criterion):
    mods, sims = [], []
    for n in (256, 512, 1024):
        pair = nearest_to_zero(matrix_spectrum(assemble_operator(make_grid(TWO_PI, n))))
        mods.append(abs(pair.value))
        sims.append(kernel_similarity(pair))
    ratios = [mods[0] / mods[1], mods[1] / mods[2]]
    f_crit = [abs(characteristic_function(0.0, L)) for L in (TWO_PI, 2 * TWO_PI)]
    f_off = [abs(characteristic_function(0.0, L)) for L in (math.pi, 3.0)]
    ok = (
        all(abs(r - 2) <= 0.6 for r in ratios)
        and min(sims) >= 0.999
        and max(f_crit) <= 1e-10
        and min(f_off) >= 0.1
    )
    detail = (f"|lam0| ratios {ratios[0]:.3f}, {ratios[1]:.3f}; min cos {min(sims):.6f}; "
              f"|F(0)| crit {max(f_crit):.1e}, off {min(f_off):.3f}")
    assert criterion(4, ok, detail)


def test_c05_spectral_gap(criterion):
    gaps_n = []
    ok_sign = True
    for n in (512, 1024):
        grid = make_grid(TWO_PI, n)
        result = matrix_spectrum(assemble_operator(grid))
        nearest = nearest_to_zero(result).value
        others = [lam for lam in result.eigenvalues if lam != nearest]
        ok_sign &= max(np.real(others)) < 0
        gaps_n.append(spectral_gap(result, kernel_tol=10 * grid.h))
    gaps_d = [spectral_gap(find_eigenvalues_determinant(TWO_PI, grid_density=d), kernel_tol=1e-8) for d in (8, 16)]
    off = find_eigenvalues_determinant(math.pi)
    off_ok = all(lam.real < 0 for lam in off.eigenvalues)
    gaps_pi = [spectral_gap(matrix_spectrum(assemble_operator(make_grid(math.pi, n))), kernel_tol=0.0) for n in (512, 1024)]

    def stable(pair):
        return abs(pair[1] - pair[0]) <= 0.2 * abs(pair[0])

    ok = ok_sign and off_ok and stable(gaps_n) and stable(gaps_d) and stable(gaps_pi)
    detail = (f"2pi matrix gap {gaps_n[0]:.4f} -> {gaps_n[1]:.4f}, determinant {gaps_d[0]:.4f} -> {gaps_d[1]:.4f}; "
              f"pi: {len(off.pairs)} roots with Re >= 0 in region, matrix gap {gaps_pi[0]:.4f} -> {gaps_pi[1]:.4f}")
    assert criterion(5, ok, detail)


def test_c06_discrete_contraction(criterion):
    # the contraction property belongs to the default scheme; the central
    # scheme is spectrally stable but not L2-dissipative
    worst_diss = -math.inf
    for L in (math.pi, TWO_PI, 3.0):
        for n in (64, 128, 512):
            op = assemble_operator(make_grid(L, n))
            worst_diss = max(worst_diss, dissipativity_report(op, trials=1000, seed=7))
    worst_ratio = 0.0
    for mode in ("nonlinear", "linearized"):
        for eps in (0.0, 0.05, 0.3):
            for seed in range(20):
                cfg = SimulationConfig(length=TWO_PI, n=64, dt=0.1, t_end=3.0, mode=mode,
                                       initial=InitialCondition("random", 0.5), cutoff=CutoffSpec(eps),
                                       seed=seed, snapshot_stride=1000)
                worst_ratio = max(worst_ratio, simulate(cfg).max_norm_ratio)
    ok = worst_diss <= 1e-12 and worst_ratio <= 1 + 1e-10
    detail = f"max h<Ay,y> = {worst_diss:.3e}; max step norm ratio {worst_ratio:.12f} over 120 runs"
    assert criterion(6, ok, detail)


def _steady_deviation(n):
    cfg = SimulationConfig(length=TWO_PI, n=n, dt=0.05, t_end=100.0, mode="linearized",
                           initial=InitialCondition("kernel_scaled", 1.0), scheme=CENTRAL, snapshot_stride=100)
    trace = simulate(cfg, store_fields=True)
    return np.sqrt(cfg.grid.h) * np.max(np.linalg.norm(trace.fields - trace.fields[0], axis=1))


def test_c07_steady_state(criterion):
    # the discrete null eigenvalue is O(h^4); n=1024 brings T*|lam0| below the tolerance
    dev = _steady_deviation(1024)
    coarse = _steady_deviation(512)
    detail = f"unit kernel vector, n=1024: max L2 deviation {dev:.2e} over T=100 (tol 1e-8); n=512 gives {coarse:.2e}"
    assert criterion(7, dev <= 1e-8, detail)


def test_c08_cutoff_semantics(criterion):
    steady = SimulationConfig(length=TWO_PI, n=512, dt=0.05, t_end=50.0, mode="nonlinear",
                              initial=InitialCondition("kernel_scaled", 0.2), cutoff=CutoffSpec(0.1),
                              scheme=CENTRAL, snapshot_stride=50)
    trace = simulate(steady, store_fields=True)
    dev = np.sqrt(steady.grid.h) * np.max(np.linalg.norm(trace.fields - trace.fields[0], axis=1))

    base = dict(length=TWO_PI, n=128, dt=0.05, t_end=20.0, initial=InitialCondition("sine_squared", 0.4), snapshot_stride=10)
    lin = simulate(SimulationConfig(mode="linearized", **base), store_fields=True)
    cut = simulate(SimulationConfig(mode="nonlinear", cutoff=CutoffSpec(0.1), **base), store_fields=True)
    large = lin.l2_norm >= 0.1
    diff = np.sqrt(lin.config.grid.h) * np.linalg.norm(cut.fields - lin.fields, axis=1)
    match = float(np.max(diff[large]))
    ok = dev <= 1e-8 and match <= 1e-8 and large.sum() >= 2
    detail = f"kernel run deviation {dev:.2e}; decaying run mismatch {match:.2e} over {large.sum()} snapshots"
    assert criterion(8, ok, detail)


def test_c09_kato_smoothing(criterion):
    worst = 0.0
    for L in (math.pi, TWO_PI):
        grid = make_grid(L, 256)
        for seed in range(20):
            y0 = GridFunction(grid, random_smooth_field(grid, np.random.default_rng(seed)))
            cfg = SimulationConfig(length=L, n=256, dt=0.01, t_end=1.0, mode="linearized",
                                   initial=InitialCondition("sine_squared", 1.0))
            result = kato_check(simulate(cfg, initial=y0), 1.0, slack=1.05)
            worst = max(worst, result.lhs / (1.05 * result.rhs))
    assert criterion(9, worst <= 1.0, f"worst lhs / (1.05 rhs) = {worst:.3f} over 40 runs")


def test_c10_decay_law(criterion, decay_512, decay_1024):
    fit = fit_decay(decay_512, None, (750.0, 1500.0))
    fine = fit_decay(decay_1024, None, (750.0, 1500.0))
    closer = abs(fine.c_fit - DECAY_COEFFICIENT) < abs(fit.c_fit - DECAY_COEFFICIENT)
    ok = fit.relative_error <= 0.10 and fit.closed_form_deviation <= 0.05 and closer
    detail = (f"c_fit {fit.c_fit:.6f} ({100 * fit.relative_error:.2f}%), closed-form dev "
              f"{100 * fit.closed_form_deviation:.2f}%, n=1024 c_fit {fine.c_fit:.6f}")
    assert criterion(10, ok, detail)


def test_c11_manifold_shape(criterion, decay_small, decay_512):
    """Literal criterion on the delta=0.1 run, with an on-manifold diagnostic alongside.

    p=0.1 is only reached at t=0 on this run, where the state is p*phi and the
    residual is the full p^2 |a|.  The delta=0.2 run crosses p=0.1 after it has
    been attracted to the manifold; its ratio is reported for comparison.
    """
    r_hi = residual_at(decay_small, 0.1)
    r_lo = residual_at(decay_small, 0.05)
    factor = r_hi / r_lo
    attracted = residual_at(decay_512, 0.1) / r_lo
    detail = (f"residual/p^2 at p=0.1: {r_hi:.4f}, at p=0.05: {r_lo:.5f}, factor {factor:.1f} (want [1.5, 3]); "
              f"on-manifold factor via delta=0.2 run {attracted:.2f}")
    assert criterion(11, 1.5 <= factor <= 3.0, detail)


@pytest.mark.parametrize("length", [TWO_PI, math.pi], ids=["2pi", "pi"])
def test_c12_oracle_cross_check(criterion, matrix_2048, length):
    h = length / 2049
    tol = max(5 * h, 1e-3)
    matrix = matrix_2048[length].eigenvalues
    roots = find_eigenvalues_determinant(length).eigenvalues
    worst = max((np.min(np.abs(matrix - r)) for r in roots if abs(r.imag) <= 5), default=0.0)
    label = "2pi" if length == TWO_PI else "pi"
    ok = worst <= tol
    criterion(12, ok, f"L={label}: {len(roots)} roots, worst match {worst:.2e} (tol {tol:.2e})", part=label)
    assert ok
