"""Energies, interfaces and the metastability measurements built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CertificateError, ConfigError
from .kinetics import Grid1D, KineticState, SchemeParams, reconstruct
from .potential import DampingSpec, PotentialSpec, compute_c0

DEFAULT_K = (-0.7, 0.7)
DEFAULT_HYSTERESIS = 0.5


@dataclass(frozen=True)
class EnergyReport:
    t: float
    kinetic: float
    gradient: float
    potential: float
    total_scaled: float
    total_unscaled: float


def energy_density_parts(u, u_t, dx: float, epsilon: float, tau: float, pot: PotentialSpec):
    u_x = np.gradient(u, dx)
    kin = tau / (2.0 * epsilon) * u_t * u_t
    grad = 0.5 * epsilon * u_x * u_x
    pot_ = pot.F(u) / epsilon
    return kin, grad, pot_


def energy_from_samples(
    u, u_t, grid: Grid1D, epsilon: float, tau: float, pot: PotentialSpec, t: float = 0.0
) -> EnergyReport:
    kin, grad, pot_ = energy_density_parts(u, u_t, grid.dx, epsilon, tau, pot)
    k = grid.integrate(kin)
    g = grid.integrate(grad)
    p = grid.integrate(pot_)
    total = k + g + p
    return EnergyReport(t, k, g, p, total, epsilon * total)


def energy(state: KineticState, params: SchemeParams, pot: PotentialSpec) -> EnergyReport:
    """Scaled energy ``E_eps`` of a kinetic state, with ``u_t`` from the flux relation."""
    u, _, u_t = reconstruct(state, params, pot)
    return energy_from_samples(u, u_t, state.grid, params.epsilon, params.tau, pot, state.t)


def time_difference_u_t(before: KineticState, after: KineticState) -> np.ndarray:
    """Cross-check for ``u_t``: forward difference of ``u`` between two states."""
    return (after.u - before.u) / (after.t - before.t)


@dataclass
class Trajectory:
    """States recorded along a run, in time order."""

    states: list[KineticState] = field(default_factory=list)

    def record(self, state: KineticState) -> None:
        self.states.append(state)

    __call__ = record

    @property
    def times(self) -> list[float]:
        return [s.t for s in self.states]


def dissipation_rate(
    state: KineticState, params: SchemeParams, pot: PotentialSpec, damping: DampingSpec
) -> float:
    """``eps^-1 int g(u) u_t^2`` at one time level."""
    u, _, u_t = reconstruct(state, params, pot)
    return state.grid.integrate(damping.g(u) * u_t * u_t) / params.epsilon


@dataclass
class DissipationMeter:
    """Streaming observer accumulating ``sum_n dt * rate(t_n)`` over steps.

    Each step contributes the rate at the state it starts from, matching the
    explicit update. Call on every state of a run.
    """

    params: SchemeParams
    pot: PotentialSpec
    damping: DampingSpec
    expended: float = 0.0
    times: list[float] = field(default_factory=list)
    history: list[float] = field(default_factory=list)
    _last: tuple[float, float] | None = field(default=None, repr=False)

    def __call__(self, state: KineticState) -> None:
        if self._last is not None:
            t_prev, rate_prev = self._last
            self.expended += (state.t - t_prev) * rate_prev
        self._last = (state.t, dissipation_rate(state, self.params, self.pot, self.damping))
        self.times.append(state.t)
        self.history.append(self.expended)


def dissipated(
    trajectory: Trajectory | Sequence[KineticState],
    params: SchemeParams,
    pot: PotentialSpec,
    damping: DampingSpec,
) -> float:
    states = trajectory.states if isinstance(trajectory, Trajectory) else list(trajectory)
    total = 0.0
    for s0, s1 in zip(states[:-1], states[1:]):
        total += (s1.t - s0.t) * dissipation_rate(s0, params, pot, damping)
    return total


def dissipation_residual(
    trajectory: Trajectory | Sequence[KineticState],
    params: SchemeParams,
    pot: PotentialSpec,
    damping: DampingSpec,
) -> float:
    """Discrete defect of the energy identity along a run recorded at every step.

    ``|sum_n dt eps^-1 int g(u) u_t^2 - (E(0) - E(T))|``.
    """
    states = trajectory.states if isinstance(trajectory, Trajectory) else list(trajectory)
    if len(states) < 2:
        return 0.0
    spent = dissipated(states, params, pot, damping)
    drop = energy(states[0], params, pot).total_scaled - energy(states[-1], params, pot).total_scaled
    return abs(spent - drop)


# --- interfaces -----------------------------------------------------------------


@dataclass(frozen=True)
class InterfaceReport:
    K_lo: float
    K_hi: float
    intervals: list[tuple[float, float]]
    count: int
    layer_points: list[tuple[float, float]]


def _segment_preimage(x0, x1, u0, u1, lo, hi):
    """Sub-interval of [x0, x1] where the linear interpolant lies in [lo, hi]."""
    if u0 == u1:
        return (x0, x1) if lo <= u0 <= hi else None
    # parameter s in [0, 1] where u = u0 + s (u1 - u0)
    s_lo = (lo - u0) / (u1 - u0)
    s_hi = (hi - u0) / (u1 - u0)
    s_a, s_b = min(s_lo, s_hi), max(s_lo, s_hi)
    s_a, s_b = max(s_a, 0.0), min(s_b, 1.0)
    if s_a > s_b:
        return None
    dx = x1 - x0
    xa = x1 if s_a == 1.0 else x0 + s_a * dx
    xb = x1 if s_b == 1.0 else x0 + s_b * dx
    return (xa, xb)


def interface_set(u, grid: Grid1D, K_lo: float = DEFAULT_K[0], K_hi: float = DEFAULT_K[1]) -> InterfaceReport:
    """Preimage of ``[K_lo, K_hi]`` under the piecewise-linear interpolant of ``u``."""
    if not (-1.0 < K_lo <= K_hi < 1.0):
        raise ValueError(f"K=[{K_lo}, {K_hi}] must be a closed interval inside (-1, 1)")
    u = np.asarray(u, dtype=float)
    x = grid.nodes
    n = len(u)
    # segments whose value range meets K
    seg_lo = np.minimum(u[:-1], u[1:])
    seg_hi = np.maximum(u[:-1], u[1:])
    touches = (seg_hi >= K_lo) & (seg_lo <= K_hi)
    intervals: list[list[float]] = []
    for j in np.flatnonzero(touches):
        piece = _segment_preimage(x[j], x[j + 1], u[j], u[j + 1], K_lo, K_hi)
        if piece is None:
            continue
        if intervals and piece[0] <= intervals[-1][1]:
            intervals[-1][1] = max(intervals[-1][1], piece[1])
        else:
            intervals.append([piece[0], piece[1]])

    count = 0
    layer_points = []
    for lo, hi in intervals:
        # last node strictly before and first node strictly after the interval
        left = np.searchsorted(x, lo, side="left") - 1
        right = np.searchsorted(x, hi, side="right")
        if left < 0 or right >= n:
            continue
        below_l, above_l = u[left] < K_lo, u[left] > K_hi
        below_r, above_r = u[right] < K_lo, u[right] > K_hi
        if (below_l and above_r) or (above_l and below_r):
            count += 1
            layer_points.append((float(x[left]), float(x[right])))
    return InterfaceReport(
        float(K_lo), float(K_hi), [(float(a), float(b)) for a, b in intervals], count, layer_points
    )


def _as_intervals(A) -> list[tuple[float, float]]:
    out = []
    for item in A:
        if isinstance(item, (tuple, list)) and len(item) == 2:
            lo, hi = float(item[0]), float(item[1])
        else:
            lo = hi = float(item)
        if lo > hi:
            lo, hi = hi, lo
        out.append((lo, hi))
    out.sort()
    merged: list[list[float]] = []
    for lo, hi in out:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(a, b) for a, b in merged]


def _point_to_set(x: float, B: list[tuple[float, float]]) -> float:
    return min(0.0 if lo <= x <= hi else min(abs(x - lo), abs(x - hi)) for lo, hi in B)


def _directed(A: list[tuple[float, float]], B: list[tuple[float, float]]) -> float:
    # d(., B) is piecewise linear; on each interval of A its maximum sits at an
    # endpoint or at the midpoint of a gap of B falling inside that interval
    gaps = [(B[i][1], B[i + 1][0]) for i in range(len(B) - 1)]
    best = 0.0
    for lo, hi in A:
        cands = [lo, hi]
        for g0, g1 in gaps:
            mid = 0.5 * (g0 + g1)
            if lo <= mid <= hi:
                cands.append(mid)
        best = max(best, max(_point_to_set(c, B) for c in cands))
    return best


def hausdorff(A: Iterable, B: Iterable) -> float:
    """Exact Hausdorff distance between finite unions of points and closed intervals.

    Items are numbers (points) or ``(lo, hi)`` pairs. Returns ``inf`` if
    either set is empty.
    """
    A_ = _as_intervals(A)
    B_ = _as_intervals(B)
    if not A_ or not B_:
        return math.inf
    return max(_directed(A_, B_), _directed(B_, A_))


def transition_count(u, grid: Grid1D | None = None, hysteresis: float = DEFAULT_HYSTERESIS) -> int:
    """Number of alternations between ``u <= -h`` and ``u >= h``, scanning left to right."""
    if not 0 < hysteresis < 1:
        raise ValueError("hysteresis must lie in (0, 1)")
    u = np.asarray(u, dtype=float)
    side = np.zeros(u.shape, dtype=np.int8)
    side[u <= -hysteresis] = -1
    side[u >= hysteresis] = 1
    sides = side[side != 0]
    if sides.size < 2:
        return 0
    return int(np.count_nonzero(sides[1:] != sides[:-1]))


# --- step profiles and the lower-bound certificate --------------------------------


@dataclass(frozen=True)
class StepProfile:
    """Piecewise constant ``+-1`` function with jumps at ``jumps``."""

    jumps: tuple[float, ...]
    start_sign: int = -1

    def __post_init__(self):
        jumps = tuple(float(j) for j in self.jumps)
        if any(b <= a for a, b in zip(jumps, jumps[1:])):
            raise ValueError("jumps must be strictly increasing")
        if self.start_sign not in (-1, 1):
            raise ValueError("start_sign must be -1 or +1")
        object.__setattr__(self, "jumps", jumps)

    @property
    def N(self) -> int:
        return len(self.jumps)

    def check_interior(self, grid: Grid1D) -> None:
        if any(not grid.a < j < grid.b for j in self.jumps):
            raise ValueError("jumps must lie inside (a, b)")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        crossed = np.searchsorted(np.asarray(self.jumps), x, side="right")
        return self.start_sign * np.where(crossed % 2 == 0, 1.0, -1.0)

    def side_signs(self, i: int) -> tuple[int, int]:
        """Signs of the profile just left and right of jump ``i``."""
        left = self.start_sign * (-1) ** i
        return left, -left


def l1_distance_to_profile(u, grid: Grid1D, profile: StepProfile) -> float:
    """``||u - v||_{L^1}`` with ``v`` taken at the cell centers."""
    return grid.integrate(np.abs(np.asarray(u, dtype=float) - profile(grid.nodes)))


@dataclass(frozen=True)
class LayerCertificate:
    x_points: list[float]
    y_points: list[float]
    F_x: list[float]
    F_y: list[float]
    layer_energies: list[float]
    c0: float
    margin: float  # sum(layer_energies) - N c0


def _trapezoid_segment(values, x, i: int, j: int) -> float:
    if j <= i:
        return 0.0
    return float(np.trapezoid(values[i : j + 1], x[i : j + 1]))


def layer_certificate(
    u,
    grid: Grid1D,
    pot: PotentialSpec,
    profile: StepProfile,
    epsilon: float,
    l: int = 1,
    delta: float = 0.1,
    c0: float | None = None,
) -> LayerCertificate:
    """Bracket each jump by near-well sample points and measure the layer energies.

    For jump ``g`` the point ``x`` minimizes ``F(u)`` over samples in
    ``(g - 2 delta, g)`` having the profile's sign there, and ``y`` does the
    same over ``(g, g + 2 delta)``; ties resolve away from the jump. Each
    layer energy is the trapezoid integral of ``eps/2 u_x^2 + F(u)/eps``
    over ``[x, y]``.
    """
    if l < 1 or delta <= 0:
        raise ValueError("need l >= 1 and delta > 0")
    profile.check_interior(grid)
    edges = [grid.a, *profile.jumps, grid.b]
    reach = 2 * l * delta
    for left, right in zip(edges[:-1], edges[1:]):
        # neighbourhoods of consecutive jumps (and of the walls) must not meet
        pad_l = reach if left != grid.a else 0.0
        pad_r = reach if right != grid.b else 0.0
        if not left + pad_l < right - pad_r:
            raise ValueError(f"delta={delta} too large: 2*l*delta neighbourhoods overlap in [{left}, {right}]")

    u = np.asarray(u, dtype=float)
    x = grid.nodes
    u_x = np.gradient(u, grid.dx)
    Fu = np.asarray(pot.F(u), dtype=float)
    density = 0.5 * epsilon * u_x * u_x + Fu / epsilon
    if c0 is None:
        c0 = compute_c0(pot)

    xs, ys, Fx, Fy, energies = [], [], [], [], []
    for i, g in enumerate(profile.jumps):
        s_left, s_right = profile.side_signs(i)
        win_l = np.flatnonzero((x > g - 2 * delta) & (x < g) & (np.sign(u) == s_left))
        win_r = np.flatnonzero((x > g) & (x < g + 2 * delta) & (np.sign(u) == s_right))
        if win_l.size == 0 or win_r.size == 0:
            raise CertificateError(f"no sample with the expected sign next to the jump at {g}", jump=g)
        # ties go to the sample farthest from the jump so [x, y] brackets the whole layer
        i_x = int(win_l[np.argmin(Fu[win_l])])
        i_y = int(win_r[::-1][np.argmin(Fu[win_r][::-1])])
        xs.append(float(x[i_x]))
        ys.append(float(x[i_y]))
        Fx.append(float(Fu[i_x]))
        Fy.append(float(Fu[i_y]))
        energies.append(_trapezoid_segment(density, x, i_x, i_y))
    margin = float(sum(energies) - profile.N * c0)
    return LayerCertificate(xs, ys, Fx, Fy, energies, float(c0), margin)


# --- exit time ------------------------------------------------------------------------


def exit_time(
    trajectory: Trajectory | Sequence[KineticState],
    grid: Grid1D,
    K_lo: float = DEFAULT_K[0],
    K_hi: float = DEFAULT_K[1],
    delta1: float = 0.2,
) -> float:
    """First recorded time at which the interface has drifted more than ``delta1``.

    The reference interface is that of the first recorded state. Returns
    ``inf`` when the drift never exceeds ``delta1`` over the recorded run.
    """
    states = trajectory.states if isinstance(trajectory, Trajectory) else list(trajectory)
    if not states:
        raise ConfigError("empty trajectory")
    return exit_time_from_profiles(
        [s.t for s in states], [s.u for s in states], grid, K_lo, K_hi, delta1
    )


def exit_time_from_profiles(times, profiles, grid: Grid1D, K_lo, K_hi, delta1) -> float:
    ref = interface_set(profiles[0], grid, K_lo, K_hi).intervals
    if not ref:
        raise ConfigError("the initial interface is empty; exit time is undefined")
    for t, u in zip(times, profiles):
        if hausdorff(interface_set(u, grid, K_lo, K_hi).intervals, ref) > delta1:
            return float(t)
    return math.inf
