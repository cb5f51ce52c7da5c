"""Benchmark problem generators: exact solutions and numerical solvers.

Three problems are supported:
  - linear advection of a rectangular pulse (exact translate)
  - inviscid Burgers with Riemann shock data (exact solution and a
    first-order Godunov finite-volume solver)
  - a reduced Hodgkin-Huxley ("parsimonious") cardiac action-potential
    ODE system integrated with RK4
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    NumericError,
    StabilityError,
    UnsupportedError,
    UsageError,
)

PROBLEMS = ("advection", "burgers_exact", "burgers_godunov", "parsimonious")

ADVECTION_DOMAIN = (0.0, 1.0)
ADVECTION_T_MAX = 0.25
BURGERS_DOMAIN = (-1.0, 1.0)
BURGERS_T_MAX = 0.5
PARSIMONIOUS_T_MAX = 400.0

# Stimulus sampling ranges; onset/duration land on a 0.01 ms lattice so the
# boxcar edges align with RK4 steps at every dt used here. The delivered
# charge (amplitude x duration) is constrained to the band that produces a
# full action potential: below ~35 mV the cell never fires, above ~65 mV it
# is driven past the Na reversal where the K current is too weak to
# repolarize within the horizon.
STIM_ONSET_RANGE = (5.0, 100.0)
STIM_AMPLITUDE_RANGE = (20.0, 80.0)
STIM_CHARGE_RANGE = (40.0, 60.0)
STIM_LATTICE = 0.01


@dataclass(frozen=True)
class AdvectionIC:
    """Rectangular pulse: height h, width w, midpoint s_mid; unit speed."""

    h: float
    w: float
    s_mid: float
    c: float = 1.0

    def validate(self):
        if not (0.2 <= self.h <= 0.8):
            raise ConfigError(f"pulse height {self.h} outside [0.2, 0.8]")
        if not (0.2 <= self.w <= 0.45):
            raise ConfigError(f"pulse width {self.w} outside [0.2, 0.45]")
        if not (0.1 <= self.s_mid <= 0.2):
            raise ConfigError(f"pulse midpoint {self.s_mid} outside [0.1, 0.2]")

    def u0(self, x: np.ndarray) -> np.ndarray:
        return np.where(np.abs(x - self.s_mid) <= self.w / 2.0, self.h, 0.0)

    def fronts_at(self, t: float) -> np.ndarray:
        return np.array([self.s_mid - self.w / 2.0 + self.c * t,
                         self.s_mid + self.w / 2.0 + self.c * t])


@dataclass(frozen=True)
class RiemannIC:
    """Single-jump Burgers data: left state u_left, right state 0, jump at x_d."""

    u_left: float
    x_d: float
    u_right: float = 0.0

    def validate(self):
        if not (1.0 <= self.u_left <= 2.0):
            raise ConfigError(f"left state {self.u_left} outside [1, 2]")
        if not (-0.9 <= self.x_d <= -0.1):
            raise ConfigError(f"jump location {self.x_d} outside [-0.9, -0.1]")

    def u0(self, x: np.ndarray) -> np.ndarray:
        # half-open convention: a point exactly at the jump takes the right state
        return np.where(x < self.x_d, self.u_left, self.u_right)


@dataclass(frozen=True)
class StimulusParams:
    """Square current pulse: amplitude (uA/cm^2), onset and duration (ms)."""

    a_stim: float
    t_stim: float
    d_stim: float

    def validate(self, horizon: float = PARSIMONIOUS_T_MAX):
        if self.a_stim <= 0 or self.t_stim <= 0 or self.d_stim <= 0:
            raise ConfigError("stimulus parameters must be positive")
        if self.t_stim + self.d_stim >= horizon:
            raise ConfigError("stimulus must end before the horizon")

    def current(self, t: np.ndarray) -> np.ndarray:
        on = (t >= self.t_stim) & (t <= self.t_stim + self.d_stim)
        return np.where(on, self.a_stim, 0.0)


@dataclass(frozen=True)
class ParsimoniousConstants:
    """Reduced Hodgkin-Huxley model constants for rabbit ventricular cells."""

    c_m: float = 1.0        # uF/cm^2
    g_na: float = 11.0      # mS/cm^2
    g_k: float = 0.3        # mS/cm^2
    v_na: float = 65.0      # mV
    v_k: float = -83.0      # mV
    b: float = 0.047        # 1/mV
    e_m: float = -41.0      # mV
    k_m: float = -4.0       # mV
    e_h: float = -74.9      # mV
    k_h: float = 4.4        # mV
    tau_m: float = 0.12     # ms
    tau_h0: float = 6.8     # ms
    delta_h: float = 0.8
    v0: float = -83.0       # mV
    m0: float = 0.0
    h0: float = 0.9


@dataclass(frozen=True)
class ShockPath:
    """Straight shock trajectory x_s(t) = x_d + speed * t, valid from t_s."""

    t_s: float
    x_d: float
    speed: float

    def at(self, t) -> np.ndarray:
        return self.x_d + self.speed * np.asarray(t, dtype=float)


@dataclass
class SolutionField:
    """One sample: sensor readings of the input function plus the gridded solution.

    2D problems store values with shape (Nt, Nx); the parsimonious model is a
    single trace with shape (Nt,) and x is None.
    """

    x: np.ndarray | None
    t: np.ndarray
    values: np.ndarray
    sensors: np.ndarray
    provenance: str
    ic: object | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_uniform(self.t, "t")
        if self.x is not None:
            _check_uniform(self.x, "x")
            if self.values.shape != (len(self.t), len(self.x)):
                raise ConfigError(
                    f"values shape {self.values.shape} does not match grid "
                    f"({len(self.t)}, {len(self.x)})"
                )
        elif self.values.shape != self.t.shape:
            raise ConfigError("trace values must match the t grid")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])


def _check_uniform(g: np.ndarray, name: str):
    if g.ndim != 1 or len(g) < 2:
        raise ConfigError(f"{name} grid must be 1D with at least 2 points")
    d = np.diff(g)
    if np.any(d <= 0):
        raise ConfigError(f"{name} grid must be strictly increasing")
    if not np.allclose(d, d[0], rtol=1e-9, atol=1e-12 * abs(g[-1] - g[0] + 1)):
        raise ConfigError(f"{name} grid must be uniformly spaced")


def cell_centers(lo: float, hi: float, n: int) -> np.ndarray:
    dx = (hi - lo) / n
    return lo + (np.arange(n) + 0.5) * dx


def sensor_grid(lo: float, hi: float, m: int) -> np.ndarray:
    return np.linspace(lo, hi, m)


def advection_exact(ic: AdvectionIC, nx: int, nt: int, m: int = 100) -> SolutionField:
    """Exact translated-pulse solution on x in [0,1], t in [0, 0.25]."""
    ic.validate()
    if nx < 2 or nt < 2:
        raise ConfigError("need nx, nt >= 2")
    x = cell_centers(*ADVECTION_DOMAIN, nx)
    t = np.linspace(0.0, ADVECTION_T_MAX, nt)
    vals = np.where(np.abs(x[None, :] - ic.c * t[:, None] - ic.s_mid) <= ic.w / 2.0,
                    ic.h, 0.0)
    sensors = ic.u0(sensor_grid(*ADVECTION_DOMAIN, m))
    return SolutionField(x, t, vals, sensors, "exact", ic)


def burgers_exact(ic: RiemannIC, nx: int, nt: int, m: int = 100):
    """Exact shock solution of inviscid Burgers for u_left > u_right = 0."""
    if ic.u_left <= ic.u_right:
        raise UnsupportedError("rarefaction case (u_left <= u_right) not supported")
    if nx < 2 or nt < 2:
        raise ConfigError("need nx, nt >= 2")
    speed = 0.5 * (ic.u_left + ic.u_right)
    path = ShockPath(0.0, ic.x_d, speed)
    x = cell_centers(*BURGERS_DOMAIN, nx)
    t = np.linspace(0.0, BURGERS_T_MAX, nt)
    vals = np.where(x[None, :] < path.at(t)[:, None], ic.u_left, ic.u_right)
    sensors = ic.u0(sensor_grid(*BURGERS_DOMAIN, m))
    return SolutionField(x, t, vals, sensors, "exact", ic), path


def characteristics_shock_time(u0: np.ndarray, x: np.ndarray):
    """First shock time from characteristic crossing of sampled initial data.

    Returns (t_s, x_s0); t_s is +inf (and x_s0 nan) when u0 is non-decreasing
    so that characteristics never cross. The derivative uses central
    differences on the interior points; ties pick the smallest index.
    """
    u0 = np.asarray(u0, dtype=float)
    x = np.asarray(x, dtype=float)
    if len(u0) < 3 or len(x) != len(u0):
        raise UsageError("need at least 3 samples on a matching grid")
    dx = x[1] - x[0]
    du = (u0[2:] - u0[:-2]) / (2.0 * dx)
    k = int(np.argmin(du))
    slope = du[k]
    if slope >= 0:
        return math.inf, math.nan
    t_s = -1.0 / slope
    x_star = x[k + 1]
    return t_s, x_star + u0[k + 1] * t_s


def _godunov_flux(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # exact Riemann flux for f(u) = u^2/2
    fa = 0.5 * np.maximum(a, 0.0) ** 2
    fb = 0.5 * np.minimum(b, 0.0) ** 2
    return np.maximum(fa, fb)


def burgers_godunov(ic: RiemannIC, nx: int, nt: int = 200, cfl: float = 0.5,
                    m: int = 100) -> SolutionField:
    """First-order Godunov finite-volume solution of u_t + (u^2/2)_x = 0.

    Outflow (copy) boundaries; snapshots are taken at the nearest completed
    step before/at each requested output time.
    """
    if cfl > 1.0:
        raise StabilityError(f"cfl {cfl} exceeds the stability bound 1")
    if cfl <= 0.0:
        raise ConfigError("cfl must be positive")
    if nx < 10:
        raise ConfigError("need nx >= 10")
    lo, hi = BURGERS_DOMAIN
    dx = (hi - lo) / nx
    x = cell_centers(lo, hi, nx)
    # cell averages of the initial data (exact for piecewise-constant u0)
    left_frac = np.clip((ic.x_d - (x - 0.5 * dx)) / dx, 0.0, 1.0)
    u = ic.u_left * left_frac + ic.u_right * (1.0 - left_frac)

    umax = float(np.max(np.abs(u)))
    if umax == 0.0:
        umax = 1.0
    dt = cfl * dx / umax
    t_out = np.linspace(0.0, BURGERS_T_MAX, nt)
    steps_out = np.rint(t_out / dt).astype(int)

    vals = np.empty((nt, nx))
    out = dict(zip(*np.unique(steps_out, return_index=True)))
    snapshots = {}
    n_steps = int(steps_out.max())
    if 0 in out:
        snapshots[0] = u.copy()
    for step in range(1, n_steps + 1):
        ue = np.concatenate(([u[0]], u, [u[-1]]))
        flux = _godunov_flux(ue[:-1], ue[1:])
        u = u - (dt / dx) * (flux[1:] - flux[:-1])
        if step in out:
            snapshots[step] = u.copy()
    for j, step in enumerate(steps_out):
        vals[j] = snapshots[step]

    sensors = ic.u0(sensor_grid(lo, hi, m))
    fld = SolutionField(x, t_out, vals, sensors, "godunov", ic)
    fld.extra["dt_solver"] = dt
    return fld


# ---------------------------------------------------------------------------
# parsimonious cardiac model


def _parsimonious_rates(v, m, h, i_stim, c: ParsimoniousConstants):
    i_na = c.g_na * m ** 3 * h * (v - c.v_na)
    i_k = c.g_k * math.exp(-c.b * (v - c.v_k)) * (v - c.v_k)
    dv = -(i_na + i_k + i_stim) / c.c_m
    m_inf = 1.0 / (1.0 + math.exp((v - c.e_m) / c.k_m))
    e_h = math.exp((v - c.e_h) / c.k_h)
    h_inf = 1.0 / (1.0 + e_h)
    tau_h = 2.0 * c.tau_h0 * c.delta_h * e_h ** c.delta_h / (1.0 + e_h)
    dm = (m_inf - m) / c.tau_m
    dh = (h_inf - h) / tau_h
    return dv, dm, dh


def rk4_trajectory(state0, t_max: float, dt: float, stim: StimulusParams | None,
                   constants: ParsimoniousConstants | None = None,
                   record_state: bool = False):
    """RK4 integration of the 3-ODE cardiac model; returns (t, v) traces.

    The stimulus current is held constant within each step (evaluated at the
    step midpoint), so runs with nested step sizes see the same forcing when
    the pulse edges sit on the coarser grid. The applied current is inward
    (depolarizing): the printed amplitude enters the voltage equation with a
    negative sign.
    """
    c = constants or ParsimoniousConstants()
    n = int(round(t_max / dt))
    v, m, h = state0
    t_grid = np.arange(n + 1) * dt
    vs = np.empty(n + 1)
    vs[0] = v
    states = np.empty((n + 1, 3)) if record_state else None
    if record_state:
        states[0] = (v, m, h)
    on_lo = stim.t_stim if stim else 0.0
    on_hi = stim.t_stim + stim.d_stim if stim else 0.0
    amp = -stim.a_stim if stim else 0.0
    half = 0.5 * dt
    sixth = dt / 6.0
    for i in range(n):
        t_mid = i * dt + half
        i_stim = amp if (stim is not None and on_lo < t_mid < on_hi) else 0.0
        try:
            k1 = _parsimonious_rates(v, m, h, i_stim, c)
            k2 = _parsimonious_rates(v + half * k1[0], m + half * k1[1],
                                     h + half * k1[2], i_stim, c)
            k3 = _parsimonious_rates(v + half * k2[0], m + half * k2[1],
                                     h + half * k2[2], i_stim, c)
            k4 = _parsimonious_rates(v + dt * k3[0], m + dt * k3[1],
                                     h + dt * k3[2], i_stim, c)
        except OverflowError as exc:
            raise NumericError(f"state overflow at t = {i * dt:.4f} ms") from exc
        v += sixth * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        m += sixth * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        h += sixth * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if not (math.isfinite(v) and math.isfinite(m) and math.isfinite(h)):
            raise NumericError(f"non-finite state at t = {(i + 1) * dt:.4f} ms")
        vs[i + 1] = v
        if record_state:
            states[i + 1] = (v, m, h)
    if record_state:
        return t_grid, vs, states
    return t_grid, vs


def parsimonious_simulate(stim: StimulusParams | None, t_max: float = 400.0,
                          dt: float = 0.005, m: int = 800) -> SolutionField:
    """Membrane-potential trace v(t) for one stimulus scenario."""
    c = ParsimoniousConstants()
    if stim is not None:
        stim.validate(t_max)
    t, v = rk4_trajectory((c.v0, c.m0, c.h0), t_max, dt, stim)
    s_grid = sensor_grid(0.0, t_max, m)
    sensors = stim.current(s_grid) if stim is not None else np.zeros(m)
    return SolutionField(None, t, v, sensors, "ode_rk4", stim)


def triggers_action_potential(trace: SolutionField) -> bool:
    """Full action potential: overshoot above 0 mV and return below -70 mV."""
    return float(trace.values.max()) > 0.0 and float(trace.values[-1]) < -70.0


# ---------------------------------------------------------------------------
# dataset generation


@dataclass
class Dataset:
    problem: str
    fields: list
    splits: dict
    seed: int
    m: int
    shock_paths: list | None = None

    def subset(self, name: str) -> list:
        return [self.fields[i] for i in self.splits[name]]


def _split_indices(problem: str, n: int) -> dict:
    if problem == "advection":
        n_train = int(n * 0.9)
        return {"train": np.arange(n_train), "test": np.arange(n_train, n)}
    if problem in ("burgers_exact", "burgers_godunov"):
        n_train = int(n * 0.8)
        n_val = int(n * 0.1)
        return {
            "train": np.arange(n_train),
            "val": np.arange(n_train, n_train + n_val),
            "test": np.arange(n_train + n_val, n),
        }
    # parsimonious: 200/50/50 proportions
    n_train = int(n * 2 / 3)
    n_val = int(n * 1 / 6)
    return {
        "train": np.arange(n_train),
        "val": np.arange(n_train, n_train + n_val),
        "test": np.arange(n_train + n_val, n),
    }


def sample_stimulus(rng: np.random.Generator) -> StimulusParams:
    def lattice(lo, hi):
        k_lo = int(math.ceil(lo / STIM_LATTICE))
        k_hi = int(math.floor(hi / STIM_LATTICE))
        return int(rng.integers(k_lo, k_hi + 1)) * STIM_LATTICE

    a = float(rng.uniform(*STIM_AMPLITUDE_RANGE))
    charge = float(rng.uniform(*STIM_CHARGE_RANGE))
    return StimulusParams(
        a_stim=a,
        t_stim=float(lattice(*STIM_ONSET_RANGE)),
        d_stim=float(round(charge / a / STIM_LATTICE) * STIM_LATTICE),
    )


def _generate_one(problem: str, seed: int, nx: int, nt: int, dt: float, m: int):
    rng = np.random.default_rng(seed)
    if problem == "advection":
        # Resample until the left pulse edge starts inside the domain,
        # otherwise early time slices show only one of the two fronts.
        while True:
            ic = AdvectionIC(h=float(rng.uniform(0.2, 0.8)),
                             w=float(rng.uniform(0.2, 0.45)),
                             s_mid=float(rng.uniform(0.1, 0.2)))
            if ic.s_mid - ic.w / 2.0 >= ADVECTION_DOMAIN[0] + 0.01:
                break
        fld = advection_exact(ic, nx, nt, m)
        # pulse must stay inside the domain over the full horizon
        assert ic.s_mid + ic.w / 2.0 + ADVECTION_T_MAX < ADVECTION_DOMAIN[1]
        return fld, None
    if problem in ("burgers_exact", "burgers_godunov"):
        ic = RiemannIC(u_left=float(rng.uniform(1.0, 2.0)),
                       x_d=float(rng.uniform(-0.9, -0.1)))
        if problem == "burgers_exact":
            fld, path = burgers_exact(ic, nx, nt, m)
        else:
            fld = burgers_godunov(ic, nx, nt, m=m)
            path = ShockPath(0.0, ic.x_d, 0.5 * ic.u_left)
        return fld, path
    if problem == "parsimonious":
        while True:
            stim = sample_stimulus(rng)
            fld = parsimonious_simulate(stim, PARSIMONIOUS_T_MAX, dt, m)
            if triggers_action_potential(fld):
                return fld, None
    raise ConfigError(f"unknown problem {problem!r}")


def generate_dataset(problem: str, n_samples: int, seed: int,
                     nx: int = 500, nt: int = 200, dt: float = 0.005,
                     m: int = 100) -> Dataset:
    """Sample ICs uniformly from the per-problem ranges and solve each one.

    Deterministic under a fixed seed: each sample derives its own child seed
    from the dataset seed, and results are ordered by sample index regardless
    of how many workers generate them (CUTOP_THREADS caps parallelism).
    """
    if problem not in PROBLEMS:
        raise ConfigError(f"unknown problem {problem!r}")
    child_seeds = np.random.SeedSequence(seed).spawn(n_samples)
    n_workers = int(os.environ.get("CUTOP_THREADS", "1"))

    def make(i):
        return _generate_one(problem, child_seeds[i], nx, nt, dt, m)

    if n_workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(
                _generate_one,
                [problem] * n_samples, child_seeds,
                [nx] * n_samples, [nt] * n_samples,
                [dt] * n_samples, [m] * n_samples,
            ))
    else:
        results = [make(i) for i in range(n_samples)]

    fields = [r[0] for r in results]
    paths = [r[1] for r in results]
    return Dataset(problem, fields, _split_indices(problem, n_samples), seed, m,
                   shock_paths=paths if problem.startswith("burgers") else None)
