"""Implicit-midpoint integration of the KdV flow on a bounded interval.

One step solves

    (y+ - y) / dt = A_h m + g * Phi_eps(|m|) * N_h(m),   m = (y + y+) / 2,

where ``g`` is 1 in nonlinear mode and 0 in linearized mode.  Pairing the
step with ``m`` gives ``|y+|^2 - |y|^2 = 2 dt <A_h m, m>`` because
``<N_h(m), m> = 0`` for the skew form of ``N_h`` used here, so the
discrete L2 norm never grows, whatever the cutoff.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, StepFailureError
from .grid import Grid, GridFunction, h1_norm, inner_product, l2_norm, make_grid, sample
from .operator import BANDWIDTH, DEFAULT_SCHEME, OperatorMatrix, Scheme, assemble_operator

MODES = ("nonlinear", "linearized")
INITIAL_KINDS = ("phi_scaled", "kernel_scaled", "sine_squared", "from_file", "random")


# ---------------------------------------------------------------------------
# cutoff


def _psi(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    pos = r > 0
    out[pos] = np.exp(-1.0 / r[pos])
    return out


def _dpsi(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    pos = r > 0
    out[pos] = np.exp(-1.0 / r[pos]) / r[pos] ** 2
    return out


def bump(s):
    """Smooth step: 1 on [0, 1/2], 0 on [1, inf), nonincreasing in between."""
    s = np.asarray(s, dtype=float)
    a, b = _psi(1.0 - s), _psi(s - 0.5)
    return a / (a + b)


def bump_derivative(s):
    s = np.asarray(s, dtype=float)
    a, b = _psi(1.0 - s), _psi(s - 0.5)
    da, db = -_dpsi(1.0 - s), _dpsi(s - 0.5)
    return (da * b - a * db) / (a + b) ** 2


@dataclass(frozen=True)
class CutoffSpec:
    """Cutoff radius; ``epsilon == 0`` disables the cutoff."""

    epsilon: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.epsilon) or self.epsilon < 0:
            raise ConfigurationError(f"cutoff epsilon must be finite and >= 0, got {self.epsilon!r}")

    @property
    def enabled(self) -> bool:
        return self.epsilon > 0


def cutoff_value(x: float, epsilon: float) -> float:
    if epsilon == 0:
        return 1.0
    return float(bump(x / epsilon))


def cutoff_derivative(x: float, epsilon: float) -> float:
    if epsilon == 0:
        return 0.0
    return float(bump_derivative(x / epsilon)) / epsilon


# ---------------------------------------------------------------------------
# nonlinearity


def _central_diff(values: np.ndarray, h: float) -> np.ndarray:
    padded = np.concatenate(([0.0], values, [0.0]))
    return (padded[2:] - padded[:-2]) / (2 * h)


def _nonlinear(values: np.ndarray, h: float) -> np.ndarray:
    return -(values * _central_diff(values, h) + _central_diff(values**2, h)) / 3.0


def nonlinear_term(y: GridFunction) -> GridFunction:
    """Energy-neutral discretisation of ``-y y_x``: ``<N_h(y), y> = 0``."""
    return GridFunction(y.grid, _nonlinear(y.values, y.grid.h))


def _nonlinear_jacobian_bands(values: np.ndarray, h: float) -> np.ndarray:
    """Tridiagonal Jacobian of ``N_h`` in the (2, 2) banded layout."""
    n = values.size
    padded = np.concatenate(([0.0], values, [0.0]))
    bands = np.zeros((2 * BANDWIDTH + 1, n))
    c = 1.0 / (6.0 * h)
    bands[BANDWIDTH] = -c * (padded[2:] - padded[:-2])
    # d N_i / d y_{i+1} sits at column i+1 on the first super-diagonal
    bands[BANDWIDTH - 1, 1:] = -c * (values[:-1] + 2 * values[1:])
    bands[BANDWIDTH + 1, :-1] = c * (values[1:] + 2 * values[:-1])
    return bands


# ---------------------------------------------------------------------------
# one step


def _weighted_norm(values: np.ndarray, h: float) -> float:
    return math.sqrt(h) * float(np.linalg.norm(values))


def step_implicit_midpoint(
    y: GridFunction,
    dt: float,
    op: OperatorMatrix,
    cutoff: CutoffSpec = CutoffSpec(),
    mode: str = "nonlinear",
    newton_tol: float = 1e-12,
    newton_max_iter: int = 50,
) -> GridFunction:
    if y.grid != op.grid:
        raise ConfigurationError("field and operator live on different grids")
    values = _step(y.values, dt, op, cutoff, mode, newton_tol, newton_max_iter)
    return GridFunction(y.grid, values)


def _step(y, dt, op, cutoff, mode, tol, max_iter):
    if dt <= 0 or tol <= 0 or max_iter < 1:
        raise ConfigurationError("dt, newton_tol and newton_max_iter must be positive")
    h = op.grid.h
    nonlinear = mode == "nonlinear"
    eye = np.zeros_like(op.bands)
    eye[BANDWIDTH] = 1.0
    lin_bands = eye - 0.5 * dt * op.bands

    def residual(new):
        mid = 0.5 * (y + new)
        rhs = op.matvec(mid)
        if nonlinear:
            gate = cutoff_value(_weighted_norm(mid, h), cutoff.epsilon)
            if gate != 0.0:
                rhs = rhs + gate * _nonlinear(mid, h)
        return new - y - dt * rhs

    new = y.copy()
    res = residual(new)
    res_norm = _weighted_norm(res, h)
    for _ in range(max_iter):
        if res_norm <= tol:
            return new
        mid = 0.5 * (y + new)
        jac = lin_bands
        rank_one = None
        if nonlinear:
            norm_mid = _weighted_norm(mid, h)
            gate = cutoff_value(norm_mid, cutoff.epsilon)
            if gate != 0.0:
                jac = lin_bands - 0.5 * dt * gate * _nonlinear_jacobian_bands(mid, h)
            dgate = cutoff_derivative(norm_mid, cutoff.epsilon)
            if dgate != 0.0 and norm_mid > 0:
                # gate(|m|) N(m) contributes (dgate/|m|) N(m) (h m)^T, times dm/dnew = 1/2
                u = -0.5 * dt * dgate / norm_mid * _nonlinear(mid, h)
                rank_one = (u, h * mid)
        delta = _solve_with_rank_one(jac, -res, rank_one)
        new = new + delta
        res = residual(new)
        res_norm = _weighted_norm(res, h)
        if not np.all(np.isfinite(new)):
            break
        if res_norm <= max(tol, _roundoff_floor(y, new, dt, op)):
            return new
    if res_norm <= tol:
        return new
    raise StepFailureError(
        f"Newton did not converge in {max_iter} iterations (residual {res_norm:.3e})", residual=res_norm
    )


def _roundoff_floor(y, new, dt, op):
    """Residual size attainable in double precision for this step.

    ``A_h`` has entries of order ``h^-3``, so evaluating the residual loses
    about ``eps * dt * |A_h| |m|`` to cancellation.
    """
    mid = 0.5 * np.abs(y + new)
    scale = np.abs(y) + np.abs(new) + dt * (abs(op.sparse) @ mid)
    return 16 * np.finfo(float).eps * _weighted_norm(scale, op.grid.h)


def _solve_with_rank_one(bands, rhs, rank_one):
    """Solve ``(B + u v^T) x = rhs`` with ``B`` banded (Sherman-Morrison)."""
    if rank_one is None:
        return scipy.linalg.solve_banded((BANDWIDTH, BANDWIDTH), bands, rhs)
    u, v = rank_one
    sol = scipy.linalg.solve_banded((BANDWIDTH, BANDWIDTH), bands, np.column_stack([rhs, u]))
    x, z = sol[:, 0], sol[:, 1]
    return x - z * (v @ x) / (1.0 + v @ z)


# ---------------------------------------------------------------------------
# configuration and traces


@dataclass(frozen=True)
class InitialCondition:
    kind: str
    amplitude: float = 0.0
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ConfigurationError(f"initial.kind must be one of {INITIAL_KINDS}, got {self.kind!r}")
        if self.kind == "from_file" and not self.path:
            raise ConfigurationError("initial.kind 'from_file' requires initial.path")
        if not math.isfinite(self.amplitude):
            raise ConfigurationError("initial.amplitude must be finite")


@dataclass(frozen=True)
class SimulationConfig:
    length: float
    n: int
    dt: float
    t_end: float
    initial: InitialCondition
    mode: str = "nonlinear"
    cutoff: CutoffSpec = CutoffSpec()
    scheme: Scheme = DEFAULT_SCHEME
    snapshot_stride: int = 1
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (0 < self.dt <= 0.5):
            raise ConfigurationError(f"dt must lie in (0, 0.5], got {self.dt!r}")
        if not self.t_end >= self.dt:
            raise ConfigurationError(f"t_end must be >= dt, got {self.t_end!r}")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ConfigurationError("snapshot_stride must be an integer >= 1")
        if not self.newton_tol > 0:
            raise ConfigurationError("newton_tol must be positive")
        if int(self.newton_max_iter) != self.newton_max_iter or self.newton_max_iter < 1:
            raise ConfigurationError("newton_max_iter must be an integer >= 1")
        make_grid(self.length, self.n)

    @property
    def grid(self) -> Grid:
        return make_grid(self.length, self.n)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scheme"] = self.scheme.value
        d["cutoff_epsilon"] = d.pop("cutoff")["epsilon"]
        return d


def random_smooth_field(grid: Grid, rng: np.random.Generator, modes: int = 8) -> np.ndarray:
    """Random combination of ``sin(pi x/L) sin(k pi x/L)``.

    Every term satisfies all three boundary conditions.
    """
    s = np.pi * grid.nodes / grid.length
    coeffs = rng.standard_normal(modes) / np.arange(1, modes + 1)
    return np.sin(s) * sum(c * np.sin((k + 1) * s) for k, c in enumerate(coeffs))


def read_field_file(path, n: int) -> np.ndarray:
    try:
        values = np.loadtxt(path, dtype=float, ndmin=1).ravel()
    except OSError:
        raise
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse initial field file {path}: {exc}") from exc
    if values.size != n:
        raise ConfigurationError(f"initial field file {path} holds {values.size} values, grid has n={n}")
    return values


def initial_field(config: SimulationConfig, op: OperatorMatrix | None = None) -> GridFunction:
    from .manifold import phi_profile
    from .spectrum import kernel_vector

    grid = config.grid
    ic = config.initial
    delta = ic.amplitude
    if ic.kind == "phi_scaled":
        return delta * phi_profile(grid)
    if ic.kind == "kernel_scaled":
        return delta * kernel_vector(grid, config.scheme, op=op)
    if ic.kind == "sine_squared":
        f = sample(lambda x: np.sin(np.pi * x / grid.length) ** 2, grid)
        return (delta / l2_norm(f)) * f
    if ic.kind == "random":
        v = random_smooth_field(grid, np.random.default_rng(config.seed))
        return GridFunction(grid, delta * v / _weighted_norm(v, grid.h))
    return GridFunction(grid, read_field_file(ic.path, grid.n))


@dataclass
class SimulationTrace:
    """Sampled diagnostics of one run; ``fields`` is filled on request."""

    config: Optional[SimulationConfig]
    times: np.ndarray
    l2_norm: np.ndarray
    h1_norm: np.ndarray
    p: np.ndarray
    manifold_residual: np.ndarray
    boundary_dissipation: np.ndarray
    fields: Optional[np.ndarray] = field(default=None, repr=False)
    max_norm_ratio: float = float("nan")
    newton_iterations: int = 0

    COLUMNS = ("t", "l2_norm", "h1_norm", "p", "manifold_residual", "boundary_dissipation")

    def __len__(self):
        return len(self.times)

    def column(self, name: str) -> np.ndarray:
        return self.times if name == "t" else getattr(self, name)

    def summary(self) -> dict:
        out = {"samples": len(self), "max_norm_ratio": self.max_norm_ratio}
        if len(self):
            for name in self.COLUMNS:
                out[f"final_{name}"] = float(self.column(name)[-1])
            out["initial_l2_norm"] = float(self.l2_norm[0])
        return out


def _record(y: GridFunction, on_manifold_grid: bool):
    from .manifold import manifold_residual

    h = y.grid.h
    if on_manifold_grid:
        p, res = manifold_residual(y)
    else:
        p, res = float("nan"), float("nan")
    return (l2_norm(y), h1_norm(y), p, res, (y.values[0] / h) ** 2)


def simulate(config: SimulationConfig, store_fields: bool = False, initial: GridFunction | None = None) -> SimulationTrace:
    """March ``config.n_steps`` fixed steps, sampling every ``snapshot_stride``.

    ``initial`` overrides the configured initial condition.  The final state
    is always sampled.
    """
    from .manifold import is_two_pi

    grid = config.grid
    op = assemble_operator(grid, config.scheme)
    y = initial if initial is not None else initial_field(config, op=op)
    if y.grid != grid:
        raise ConfigurationError("initial field does not live on the configured grid")
    critical = is_two_pi(grid.length)
    rows, times, snaps = [], [], []

    def keep(k, state):
        times.append(k * config.dt)
        rows.append(_record(state, critical))
        if store_fields:
            snaps.append(state.values.copy())

    keep(0, y)
    values = y.values.copy()
    h = grid.h
    ratio = 0.0
    norm_old = _weighted_norm(values, h)
    n_steps = config.n_steps
    for k in range(1, n_steps + 1):
        try:
            values = _step(values, config.dt, op, config.cutoff, config.mode, config.newton_tol, config.newton_max_iter)
        except StepFailureError as exc:
            exc.step = k
            raise
        norm_new = _weighted_norm(values, h)
        if norm_old > 0:
            ratio = max(ratio, norm_new / norm_old)
        norm_old = norm_new
        if k % config.snapshot_stride == 0 or k == n_steps:
            keep(k, GridFunction(grid, values))
    data = np.array(rows, dtype=float).reshape(-1, 5)
    return SimulationTrace(
        config=config,
        times=np.array(times),
        l2_norm=data[:, 0],
        h1_norm=data[:, 1],
        p=data[:, 2],
        manifold_residual=data[:, 3],
        boundary_dissipation=data[:, 4],
        fields=np.array(snaps) if store_fields else None,
        max_norm_ratio=ratio if norm_old > 0 or ratio > 0 else 1.0,
    )


# ---------------------------------------------------------------------------
# smoothing estimates


@dataclass
class KatoResult:
    lhs: float
    rhs: float
    passed: bool


def kato_check(trace: SimulationTrace, horizon: float, slack: float = 1.05) -> KatoResult:
    """Compare the time-integrated H1 energy with ``(4T + L)/3 * |y0|^2``."""
    if trace.config is not None and trace.config.mode != "linearized":
        raise ConfigurationError("kato_check needs a linearized run")
    if len(trace) < 2 or trace.times[-1] < horizon - 1e-12:
        raise ConfigurationError(f"trace ends at t={trace.times[-1] if len(trace) else 0}, before T={horizon}")
    sel = trace.times <= horizon + 1e-12
    lhs = float(np.trapezoid(trace.h1_norm[sel] ** 2, trace.times[sel]))
    length = trace.config.length
    rhs = (4 * horizon + length) / 3.0 * float(trace.l2_norm[0]) ** 2
    return KatoResult(lhs, rhs, lhs <= slack * rhs)


def empirical_constants(trace: SimulationTrace) -> dict:
    """Smallest constants consistent with two qualitative a-priori bounds.

    ``h1_growth``: the C in ``|y|_{L2(0,T;H1)}^2 <= (8T+2L)/3 |y0|^2 + C T |y0|^4``.
    ``smoothing``: the C in ``|y(t)|_{H1} <= C |y0| / sqrt(t)``.
    Both are reported only, never checked.
    """
    y0 = float(trace.l2_norm[0])
    t = trace.times
    length = trace.config.length
    if y0 == 0 or len(trace) < 2:
        return {"h1_growth": 0.0, "smoothing": 0.0}
    energy = np.concatenate(([0.0], np.cumsum(0.5 * np.diff(t) * (trace.h1_norm[1:] ** 2 + trace.h1_norm[:-1] ** 2))))
    base = (8 * t + 2 * length) / 3.0 * y0**2
    pos = t > 0
    growth = np.max((energy[pos] - base[pos]) / (t[pos] * y0**4))
    smoothing = np.max(np.sqrt(t[pos]) * trace.h1_norm[pos] / y0)
    return {"h1_growth": float(max(growth, 0.0)), "smoothing": float(smoothing)}
