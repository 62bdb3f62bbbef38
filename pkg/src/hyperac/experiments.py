"""Preset experiments, the epsilon sweep and the energy-budget study."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Callable

import numpy as np

from . import diagnostics as dg
from .errors import ConfigError
from .kinetics import (
    Grid1D,
    InitialData,
    KineticState,
    Observer,
    SchemeParams,
    build_initial_state,
    check_compatibility,
    derive_params,
    min_admissible_cells,
    run,
)
from .potential import DampingSpec, PotentialSpec, compute_c0, get_potential

SQRT2 = math.sqrt(2.0)
DEFAULT_STEP_CAP = 10**6
CELLS_PER_EPSILON = 5  # dx ~ eps / 5


# --- profile library ----------------------------------------------------------------


def _tanh_layer(epsilon: float, center: float = 0.0):
    width = SQRT2 * epsilon

    def u0(x):
        return np.tanh((x - center) / width)

    return u0


def _glued_two_layer(epsilon: float, center: float = 0.0):
    width = SQRT2 * epsilon

    def u0(x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= 0.0, np.tanh((x + 2.0) / width), -np.tanh((x - 2.0) / width))

    return u0


PROFILES: dict[str, Callable[[float, float], Callable]] = {
    "cosine_small": lambda eps, c: (lambda x: np.cos(0.5 * np.pi * x) / 10.0),
    "zero": lambda eps, c: (lambda x: np.zeros_like(x, dtype=float)),
    "one": lambda eps, c: (lambda x: np.ones_like(x, dtype=float)),
    "tanh_layer": _tanh_layer,
    "glued_two_layer": _glued_two_layer,
}

VELOCITIES: dict[str, Callable] = {
    "zero": lambda x: np.zeros_like(x, dtype=float),
    "cosine": lambda x: np.cos(0.5 * np.pi * x),
    "minus_x": lambda x: -np.asarray(x, dtype=float),
}


def make_initial_data(profile: str, velocity: str, epsilon: float, center: float = 0.0) -> InitialData:
    try:
        u0 = PROFILES[profile](epsilon, center)
    except KeyError:
        raise ConfigError(f"unknown profile {profile!r}; known: {sorted(PROFILES)}") from None
    try:
        u1 = VELOCITIES[velocity]
    except KeyError:
        raise ConfigError(f"unknown velocity {velocity!r}; known: {sorted(VELOCITIES)}") from None
    return InitialData(u0, u1, f"u0={profile}, u1={velocity}")


def step_profile_for(profile: str, center: float = 0.0) -> dg.StepProfile | None:
    """The +-1 step function a layered profile approximates, if it has one."""
    if profile == "tanh_layer":
        return dg.StepProfile((center,), -1)
    if profile == "glued_two_layer":
        return dg.StepProfile((-2.0, 2.0), -1)
    return None


# --- configuration ------------------------------------------------------------------------


def default_cells(epsilon: float, tau: float, length: float) -> int:
    """Cells giving ``dx ~ eps/5``, never coarser than the admissibility bound."""
    n = int(math.ceil(CELLS_PER_EPSILON * length / epsilon - 1e-9))
    return max(n, min_admissible_cells(epsilon, tau, length), 2)


def default_snapshot_times(horizon: float) -> list[float]:
    ladder = [0.0] + [10.0**k for k in range(0, 7) if 10.0**k < horizon] + [horizon]
    return sorted(set(ladder))


@dataclass(frozen=True)
class ExperimentConfig:
    epsilon: float
    tau: float
    profile: str
    velocity: str
    horizon: float
    domain: tuple[float, float] = (-4.0, 4.0)
    cells: int | None = None
    center: float = 0.0
    snapshot_times: tuple[float, ...] | None = None
    K: tuple[float, float] = dg.DEFAULT_K
    delta1: float = 0.2
    hysteresis: float = dg.DEFAULT_HYSTERESIS
    k_exponent: float = 1.0
    m: float = 1.0
    potential: str = "quartic"
    seedless: bool = True

    def __post_init__(self):
        try:
            object.__setattr__(self, "epsilon", float(self.epsilon))
            object.__setattr__(self, "tau", float(self.tau))
            object.__setattr__(self, "horizon", float(self.horizon))
            object.__setattr__(self, "domain", tuple(float(v) for v in self.domain))
            object.__setattr__(self, "K", tuple(float(v) for v in self.K))
            if self.snapshot_times is not None:
                object.__setattr__(self, "snapshot_times", tuple(sorted(float(v) for v in self.snapshot_times)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config value: {exc}") from None
        if not (self.epsilon > 0 and self.tau > 0):
            raise ConfigError("epsilon and tau must be positive")
        if self.horizon < 0:
            raise ConfigError("horizon must be nonnegative")
        if len(self.domain) != 2 or not self.domain[0] < self.domain[1]:
            raise ConfigError(f"bad domain {self.domain}")
        if len(self.K) != 2 or not -1 < self.K[0] <= self.K[1] < 1:
            raise ConfigError(f"K must satisfy -1 < lo <= hi < 1, got {self.K}")
        if not 0 < self.hysteresis < 1:
            raise ConfigError("hysteresis must lie in (0, 1)")
        if self.snapshot_times and (self.snapshot_times[0] < 0 or self.snapshot_times[-1] > self.horizon):
            raise ConfigError("snapshot_times must lie within [0, horizon]")
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}")
        if self.velocity not in VELOCITIES:
            raise ConfigError(f"unknown velocity {self.velocity!r}")
        if self.cells is not None:
            if int(self.cells) != self.cells or self.cells < 2:
                raise ConfigError(f"cells must be an integer >= 2, got {self.cells}")
            object.__setattr__(self, "cells", int(self.cells))
            need = min_admissible_cells(self.epsilon, self.tau, self.length)
            if self.cells < need:
                raise ConfigError(
                    f"cells={self.cells} violates dx <= 2*sqrt(tau)*eps; use at least {need} cells"
                )

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]

    @property
    def resolved_cells(self) -> int:
        return self.cells if self.cells is not None else default_cells(self.epsilon, self.tau, self.length)

    @property
    def resolved_snapshots(self) -> list[float]:
        if self.snapshot_times is not None:
            return list(self.snapshot_times)
        return default_snapshot_times(self.horizon)

    def grid(self) -> Grid1D:
        return Grid1D(self.domain[0], self.domain[1], self.resolved_cells)

    def pot(self) -> PotentialSpec:
        try:
            return get_potential(self.potential)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None

    def initial_data(self) -> InitialData:
        return make_initial_data(self.profile, self.velocity, self.epsilon, self.center)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["domain"] = list(self.domain)
        d["K"] = list(self.K)
        d["cells"] = self.resolved_cells
        d["snapshot_times"] = self.resolved_snapshots
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"epsilon", "tau", "profile", "velocity", "horizon"} - set(data)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        return cls(**data)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        if not changes:
            return self
        # a new epsilon/tau invalidates an explicit cell count chosen for the old one
        if ("epsilon" in changes or "tau" in changes) and "cells" not in changes:
            changes["cells"] = None
        if "horizon" in changes and "snapshot_times" not in changes and self.snapshot_times is not None:
            changes["snapshot_times"] = tuple(t for t in self.snapshot_times if t <= changes["horizon"])
        return replace(self, **changes)


EXAMPLES: dict[int, ExperimentConfig] = {
    1: ExperimentConfig(epsilon=0.01, tau=0.8, profile="cosine_small", velocity="zero", horizon=1000.0),
    2: ExperimentConfig(epsilon=0.1, tau=0.8, profile="zero", velocity="cosine", horizon=1000.0),
    3: ExperimentConfig(epsilon=0.2, tau=0.6, profile="tanh_layer", velocity="minus_x", horizon=1000.0),
    4: ExperimentConfig(epsilon=0.01, tau=0.9, profile="glued_two_layer", velocity="minus_x", horizon=1000.0),
}


def example_config(n: int, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    if n not in EXAMPLES:
        raise ConfigError(f"example must be one of {sorted(EXAMPLES)}, got {n}")
    return EXAMPLES[n].with_overrides(**(overrides or {}))


# --- running -------------------------------------------------------------------------------


@dataclass
class DiagnosticsRow:
    t: float
    energy: dg.EnergyReport
    n_transitions: int
    interfaces: list[tuple[float, float]]


@dataclass
class RunReport:
    config: ExperimentConfig
    params: SchemeParams
    compat_residual: float
    initial_energy: dg.EnergyReport
    rows: list[DiagnosticsRow]
    snapshots: list[KineticState]
    dissipated: float
    final_state: KineticState

    @property
    def final_transitions(self) -> int:
        return self.rows[-1].n_transitions

    def transitions_at(self, t: float) -> int:
        """Transition count of the first snapshot at or after ``t``."""
        for row in self.rows:
            if row.t >= t - 1e-9:
                return row.n_transitions
        raise ValueError(f"no snapshot at or after t={t}")

    def summary(self) -> dict[str, Any]:
        return {
            "config": self.config.to_dict(),
            "params": asdict(self.params),
            "compat_residual": self.compat_residual,
            "initial_energy": asdict(self.initial_energy),
            "dissipated": self.dissipated,
            "final_transitions": self.final_transitions,
            "rows": [
                {
                    "t": r.t,
                    "energy": asdict(r.energy),
                    "n_transitions": r.n_transitions,
                    "interfaces": [list(iv) for iv in r.interfaces],
                }
                for r in self.rows
            ],
        }


def prepare(config: ExperimentConfig) -> tuple[Grid1D, SchemeParams, PotentialSpec, KineticState, float]:
    grid = config.grid()
    params = derive_params(config.epsilon, config.tau, grid)
    pot = config.pot()
    data = config.initial_data()
    residual = check_compatibility(data, grid, pot)
    state = build_initial_state(data, grid, params, pot)
    return grid, params, pot, state, residual


def run_experiment(config: ExperimentConfig) -> RunReport:
    """Run ``config`` to its horizon, sampling diagnostics at the snapshot times."""
    grid, params, pot, state, residual = prepare(config)
    damping = DampingSpec.relaxation(config.tau, pot)
    K_lo, K_hi = config.K
    rows: list[DiagnosticsRow] = []
    snapshots: list[KineticState] = []

    def sample(s: KineticState) -> None:
        u = s.u
        rows.append(
            DiagnosticsRow(
                s.t,
                dg.energy(s, params, pot),
                dg.transition_count(u, grid, config.hysteresis),
                dg.interface_set(u, grid, K_lo, K_hi).intervals,
            )
        )
        snapshots.append(s)

    meter = dg.DissipationMeter(params, pot, damping)
    final = run(
        state,
        params,
        pot,
        config.horizon,
        [Observer(sample, config.resolved_snapshots), Observer(meter)],
    )
    return RunReport(
        config, params, residual, dg.energy(state, params, pot), rows, snapshots, meter.expended, final
    )


def run_example(n: int, overrides: dict[str, Any] | None = None) -> RunReport:
    """Run one of the four preset examples, optionally overriding config fields."""
    return run_experiment(example_config(n, overrides))


# --- epsilon sweep -----------------------------------------------------------------------------


@dataclass
class SweepRow:
    epsilon: float
    cells: int
    horizon: float
    steps: int
    capped: bool
    l1_initial: float
    sup_l1: float
    exit_time: float


def _sweep_row(base: ExperimentConfig, epsilon: float, k: float, m: float, step_cap: int) -> SweepRow:
    length = base.length
    cells = default_cells(epsilon, base.tau, length)
    cfg = replace(base, epsilon=epsilon, cells=cells, horizon=0.0, snapshot_times=None)
    profile = step_profile_for(cfg.profile, cfg.center)
    if profile is None:
        raise ConfigError(f"profile {cfg.profile!r} has no step-function limit to measure against")
    grid, params, pot, state, _ = prepare(cfg)
    target = m * epsilon ** (-k) if m > 0 else 0.0
    cap_horizon = step_cap * params.dt
    capped = target > cap_horizon
    horizon = min(target, cap_horizon)

    times: list[float] = []
    l1: list[float] = []
    profiles: list[np.ndarray] = []

    def sample(s: KineticState) -> None:
        u = s.u
        times.append(s.t)
        l1.append(dg.l1_distance_to_profile(u, grid, profile))
        profiles.append(u)

    run(state, params, pot, horizon, [Observer(sample)])
    K_lo, K_hi = base.K
    t_exit = dg.exit_time_from_profiles(times, profiles, grid, K_lo, K_hi, base.delta1)
    return SweepRow(epsilon, cells, horizon, len(times) - 1, capped, l1[0], max(l1), t_exit)


def _sweep_row_star(args):
    return _sweep_row(*args)


def sweep_metastability(
    base: ExperimentConfig,
    epsilons,
    k: float = 1.0,
    m: float = 1.0,
    step_cap: int = DEFAULT_STEP_CAP,
    workers: int | None = None,
) -> list[SweepRow]:
    """Run ``base`` for each epsilon to ``min(m eps^-k, cap)`` and measure persistence.

    Rows are sorted by epsilon, largest first. ``workers=1`` runs in-process.
    """
    eps_sorted = sorted({float(e) for e in epsilons}, reverse=True)
    if not eps_sorted:
        raise ConfigError("no epsilons given")
    if m < 0 or k < 0:
        raise ConfigError("k and m must be nonnegative")
    jobs = [(base, e, k, m, step_cap) for e in eps_sorted]
    if workers == 1 or len(jobs) == 1:
        return [_sweep_row(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers or len(jobs)) as pool:
        return list(pool.map(_sweep_row_star, jobs))


# --- energy budget ---------------------------------------------------------------------------


@dataclass
class BudgetReport:
    times: list[float]
    energies: list[float]
    expenditure: list[float]
    initial_energy: float
    n_initial: int
    c0: float
    budget: float  # E(0) - N c0
    sigma: float
    residual: float = field(default=0.0)


def energy_budget_report(config: ExperimentConfig) -> BudgetReport:
    """Cumulative dissipation against the energy available above ``N c0``."""
    grid, params, pot, state, _ = prepare(config)
    damping = DampingSpec.relaxation(config.tau, pot)
    meter = dg.DissipationMeter(params, pot, damping)
    energies: list[float] = []

    def sample(s: KineticState) -> None:
        meter(s)
        energies.append(dg.energy(s, params, pot).total_scaled)

    run(state, params, pot, config.horizon, [Observer(sample)])
    c0 = compute_c0(pot)
    n0 = dg.transition_count(state.u, grid, config.hysteresis)
    e0 = energies[0]
    residual = abs(meter.expended - (e0 - energies[-1]))
    return BudgetReport(
        meter.times, energies, meter.history, e0, n0, c0, e0 - n0 * c0, damping.sigma, residual
    )


# --- energy identity -----------------------------------------------------------------------


@dataclass
class IdentityCheck:
    cells: int
    horizon: float
    residual: float
    max_rise: float  # largest increase of E between consecutive steps
    energies: list[float]


def energy_identity_check(config: ExperimentConfig, horizon: float | None = None) -> IdentityCheck:
    """Record every step of ``config`` and measure the energy-identity defect."""
    if horizon is not None:
        config = config.with_overrides(horizon=horizon)
    grid, params, pot, state, _ = prepare(config)
    damping = DampingSpec.relaxation(config.tau, pot)
    traj = dg.Trajectory()
    run(state, params, pot, config.horizon, [Observer(traj)])
    energies = [dg.energy(s, params, pot).total_scaled for s in traj.states]
    rise = max((b - a for a, b in zip(energies, energies[1:])), default=0.0)
    residual = dg.dissipation_residual(traj, params, pot, damping)
    return IdentityCheck(grid.cells, traj.states[-1].t, residual, max(rise, 0.0), energies)
