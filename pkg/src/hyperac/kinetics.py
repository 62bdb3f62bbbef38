"""Goldstein-Kac kinetic discretization of the hyperbolic Allen-Cahn equation.

Two particle densities ``alpha`` (moving right) and ``beta`` (moving left)
live on a cell-centered grid. With ``dt = dx / gamma`` each density moves
exactly one cell per step, reverses with probability ``q = lambda * dt``,
and receives half of the reaction source ``dt * f(u)`` from the upwind cell.
Walls reflect particles, so ``alpha(a) = beta(a)`` and ``beta(b) = alpha(b)``.

The sum ``u = alpha + beta`` approximates the solution of

    tau u_tt + (1 - tau f'(u)) u_t = eps^2 u_xx + f(u),  u_x = 0 at the walls,

with ``lambda = 1 / (2 tau)`` and ``gamma = eps / sqrt(tau)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import AdmissibilityError, BlowUpError, ConfigError
from .potential import PotentialSpec

_TIME_TOL = 1e-9


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell-centered grid on ``[a, b]`` with ``cells`` cells."""

    a: float
    b: float
    cells: int

    def __post_init__(self):
        if not self.a < self.b:
            raise ConfigError(f"grid needs a < b, got [{self.a}, {self.b}]")
        if int(self.cells) != self.cells or self.cells < 2:
            raise ConfigError(f"grid needs at least 2 cells, got {self.cells}")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.cells

    @property
    def nodes(self) -> np.ndarray:
        return self.a + (np.arange(self.cells) + 0.5) * self.dx

    def integrate(self, values) -> float:
        """Integral over ``[a, b]`` of cell-sampled values.

        This is the composite trapezoid rule on the nodes, closed at the
        walls by extending the boundary samples over the half cells (the
        Neumann extension). It reduces to ``dx * sum(values)``.
        """
        return float(self.dx * np.sum(values))

    def cumulative(self, values) -> np.ndarray:
        """Integral from ``a`` to each node ``x_j`` (same rule as ``integrate``)."""
        values = np.asarray(values, dtype=float)
        return self.dx * (np.cumsum(values) - 0.5 * values)


@dataclass(frozen=True)
class SchemeParams:
    epsilon: float
    tau: float
    lam: float  # reversal rate
    gamma: float  # particle speed
    dx: float
    dt: float
    p: float
    q: float

    @classmethod
    def pure_transport(cls, grid: Grid1D, gamma: float = 1.0) -> "SchemeParams":
        """Test-only mode with no reversals (``lambda = 0``, ``p = 1``)."""
        return cls(math.inf, math.inf, 0.0, gamma, grid.dx, grid.dx / gamma, 1.0, 0.0)


def min_admissible_cells(epsilon: float, tau: float, length: float) -> int:
    """Smallest cell count with ``dx <= 2 sqrt(tau) eps``."""
    return int(math.ceil(length / (2.0 * math.sqrt(tau) * epsilon) - 1e-12))


def derive_params(epsilon: float, tau: float, grid: Grid1D) -> SchemeParams:
    """Kinetic parameters matching ``(eps, tau)`` on ``grid``.

    Raises ``AdmissibilityError`` when ``q = lambda dt`` would exceed 1.
    """
    if not (epsilon > 0 and tau > 0):
        raise ConfigError(f"epsilon and tau must be positive, got {epsilon}, {tau}")
    lam = 1.0 / (2.0 * tau)
    gamma = epsilon / math.sqrt(tau)
    dx = grid.dx
    dt = dx / gamma
    q = lam * dt
    if q > 1.0 + 1e-12:
        bound = 2.0 * math.sqrt(tau) * epsilon
        need = min_admissible_cells(epsilon, tau, grid.length)
        raise AdmissibilityError(
            f"dx={dx:g} exceeds 2*sqrt(tau)*eps={bound:g}; use at least {need} cells",
            min_cells=need,
        )
    q = min(q, 1.0)
    return SchemeParams(epsilon, tau, lam, gamma, dx, dt, 1.0 - q, q)


@dataclass(frozen=True)
class KineticState:
    alpha: np.ndarray
    beta: np.ndarray
    t: float
    grid: Grid1D = field(repr=False)

    def __post_init__(self):
        for name in ("alpha", "beta"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (self.grid.cells,):
                raise ValueError(f"{name} has shape {arr.shape}, grid has {self.grid.cells} cells")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.t < 0:
            raise ValueError("t must be nonnegative")

    @property
    def u(self) -> np.ndarray:
        return self.alpha + self.beta

    @property
    def v(self) -> np.ndarray:
        return self.alpha - self.beta


@dataclass(frozen=True)
class InitialData:
    u0: Callable[[np.ndarray], np.ndarray]
    u1: Callable[[np.ndarray], np.ndarray]
    description: str = ""

    def sample(self, grid: Grid1D) -> tuple[np.ndarray, np.ndarray]:
        x = grid.nodes
        u0 = np.broadcast_to(np.asarray(self.u0(x), dtype=float), x.shape).copy()
        u1 = np.broadcast_to(np.asarray(self.u1(x), dtype=float), x.shape).copy()
        return u0, u1


def check_compatibility(data: InitialData, grid: Grid1D, pot: PotentialSpec) -> float:
    """Residual ``int_a^b [f(u0) - u1]``; zero for data respecting the walls."""
    u0, u1 = data.sample(grid)
    return grid.integrate(pot.f(u0) - u1)


def build_initial_state(
    data: InitialData,
    grid: Grid1D,
    params: SchemeParams,
    pot: PotentialSpec,
    compat_tol: float | None = 1e-6,
) -> KineticState:
    """Split ``(u0, u1)`` into kinetic densities.

    ``alpha - beta = (1/gamma) int_a^x [f(u0) - u1]``. Data failing the
    compatibility condition are accepted with a ``RuntimeWarning``.
    """
    u0, u1 = data.sample(grid)
    g = pot.f(u0) - u1
    if compat_tol is not None:
        residual = grid.integrate(g)
        if abs(residual) > compat_tol:
            warnings.warn(
                f"initial data violate the compatibility condition (residual {residual:.3g})",
                RuntimeWarning,
                stacklevel=2,
            )
    flux = grid.cumulative(g) / params.gamma
    alpha = 0.5 * (u0 + flux)
    beta = 0.5 * (u0 - flux)
    return KineticState(alpha, beta, 0.0, grid)


def step(state: KineticState, params: SchemeParams, pot: PotentialSpec) -> KineticState:
    """Advance one time step ``dt``; reflecting walls at both ends."""
    a, b = state.alpha, state.beta
    p, q = params.p, params.q
    # overflow surfaces as BlowUpError below rather than as numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        src = 0.5 * params.dt * pot.f(a + b)
        a_new = np.empty_like(a)
        b_new = np.empty_like(b)
        a_new[1:] = p * a[:-1] + q * b[:-1] + src[:-1]
        b_new[:-1] = p * b[1:] + q * a[1:] + src[1:]
        # inflow at each wall is the reflected outgoing density of the same cell
        a_new[0] = p * b[0] + q * a[0] + src[0]
        b_new[-1] = p * a[-1] + q * b[-1] + src[-1]

    t_new = state.t + params.dt
    bad = ~(np.isfinite(a_new) & np.isfinite(b_new))
    if bad.any():
        raise BlowUpError(int(np.argmax(bad)), t_new)
    return KineticState(a_new, b_new, t_new, state.grid)


def reconstruct(
    state: KineticState, params: SchemeParams, pot: PotentialSpec
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(u, v, u_t)`` with ``u_t = f(u) - gamma v_x``."""
    u = state.u
    v = state.v
    v_x = np.gradient(v, params.dx)
    u_t = pot.f(u) - params.gamma * v_x
    return u, v, u_t


@dataclass
class Observer:
    """Callback fired on the states reached at or after each requested time.

    ``times=None`` fires on every state, the initial one included.
    """

    callback: Callable[[KineticState], None]
    times: Sequence[float] | None = None

    def __post_init__(self):
        self._pending = None if self.times is None else sorted(float(t) for t in self.times)

    def _due(self, t: float, dt: float) -> bool:
        if self._pending is None:
            return True
        fired = False
        while self._pending and t >= self._pending[0] - _TIME_TOL * max(dt, 1.0):
            self._pending.pop(0)
            fired = True
        return fired


def steps_to(t0: float, horizon: float, dt: float) -> int:
    """Number of steps needed to reach ``horizon`` from ``t0``."""
    return max(0, int(math.ceil((horizon - t0) / dt - _TIME_TOL)))


def run(
    state: KineticState,
    params: SchemeParams,
    pot: PotentialSpec,
    horizon: float,
    observers: Iterable[Observer | Callable[[KineticState], None]] = (),
) -> KineticState:
    """Step until ``t >= horizon`` and return the final state.

    Plain callables are treated as every-step observers.
    """
    if horizon < state.t - _TIME_TOL:
        raise ValueError(f"horizon {horizon} precedes the current time {state.t}")
    obs = [o if isinstance(o, Observer) else Observer(o) for o in observers]
    t0 = state.t
    n = steps_to(t0, horizon, params.dt)

    def notify(s: KineticState) -> None:
        for o in obs:
            if o._due(s.t, params.dt):
                o.callback(s)

    notify(state)
    for k in range(1, n + 1):
        state = step(state, params, pot)
        # recompute from the step index so t does not drift by accumulation
        state = KineticState(state.alpha, state.beta, t0 + k * params.dt, state.grid)
        notify(state)
    return state
