"""Double-well potentials, damping functions and the layer-energy constants.

A potential is supplied as the triple ``(F, f, fprime)`` with ``f = -F'``.
Wells are fixed at -1 and +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from .errors import InvalidPotentialError

ScalarFn = Callable[[np.ndarray], np.ndarray]

WELLS = (-1.0, 1.0)
DEFAULT_PANELS = 2048
_WELL_TOL = 1e-12
_CURVATURE_MIN = 1e-8


@dataclass(frozen=True)
class PotentialSpec:
    """A bistable potential ``F`` with reaction term ``f = -F'`` and ``f'``.

    Construction checks that both wells are zeros of ``F`` and ``f``, that
    they are nondegenerate minima, and that ``F`` is positive in between.
    Pass ``check=False`` to build degenerate stubs for testing.
    """

    name: str
    F: ScalarFn
    f: ScalarFn
    fprime: ScalarFn
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.check:
            _validate(self)

    @property
    def wells(self) -> tuple[float, float]:
        return WELLS


def _validate(pot: PotentialSpec) -> None:
    wells = np.array(WELLS)
    F_w = np.asarray(pot.F(wells), dtype=float)
    f_w = np.asarray(pot.f(wells), dtype=float)
    if np.any(np.abs(F_w) > _WELL_TOL):
        raise InvalidPotentialError(f"{pot.name}: F(+-1) = {F_w.tolist()}, expected 0")
    if np.any(np.abs(f_w) > _WELL_TOL):
        raise InvalidPotentialError(f"{pot.name}: f(+-1) = {f_w.tolist()}, expected 0")
    # F'' = -f' at the wells; differences of f must agree with fprime
    h = 1e-5
    for w in WELLS:
        curvature = -float(pot.fprime(np.array(w)))
        probed = -(float(pot.f(np.array(w + h))) - float(pot.f(np.array(w - h)))) / (2 * h)
        if not (curvature > _CURVATURE_MIN and probed > _CURVATURE_MIN):
            raise InvalidPotentialError(f"{pot.name}: F''({w:+g}) = {curvature:g} is not positive")
        if abs(curvature - probed) > 1e-4 * max(1.0, abs(curvature)):
            raise InvalidPotentialError(f"{pot.name}: fprime inconsistent with f at {w:+g}")
    s = np.linspace(-1.0, 1.0, 2001)[1:-1]
    if np.any(np.asarray(pot.F(s)) <= 0):
        raise InvalidPotentialError(f"{pot.name}: F must be positive on (-1, 1)")


def _quartic_F(u):
    w = u * u - 1.0
    return 0.25 * w * w


def _quartic_f(u):
    return u - u * u * u


def _quartic_fprime(u):
    return 1.0 - 3.0 * u * u


QUARTIC = PotentialSpec("quartic", _quartic_F, _quartic_f, _quartic_fprime)

_REGISTRY: dict[str, PotentialSpec] = {"quartic": QUARTIC}


def register_potential(pot: PotentialSpec) -> None:
    """Make ``pot`` selectable by name in experiment configs."""
    _REGISTRY[pot.name] = pot


def get_potential(name: str) -> PotentialSpec:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown potential {name!r}; known: {sorted(_REGISTRY)}") from None


def _simpson(fn: ScalarFn, lo: float, hi: float, panels: int) -> float:
    if panels % 2:
        panels += 1
    s = np.linspace(lo, hi, panels + 1)
    return float(simpson(fn(s), x=s))


def compute_c0(pot: PotentialSpec, quadrature_points: int = DEFAULT_PANELS) -> float:
    """Minimal energy of one transition, ``sqrt(2) * int_{-1}^{1} sqrt(F)``.

    Composite Simpson over ``quadrature_points`` panels (rounded up to even).
    """
    if quadrature_points < 2:
        raise ValueError("quadrature_points must be >= 2")

    def integrand(s):
        F = np.asarray(pot.F(s), dtype=float) * np.ones_like(s)
        if np.any(F < 0):
            raise InvalidPotentialError(f"{pot.name}: F negative at a quadrature node")
        return np.sqrt(2.0 * F)

    return _simpson(integrand, -1.0, 1.0, quadrature_points)


def psi(pot: PotentialSpec, u: float, panels: int = DEFAULT_PANELS) -> float:
    """Antiderivative ``Psi(u) = int_0^u sqrt(2 F(s)) ds``; nondecreasing in u."""
    u = float(u)
    if not math.isfinite(u):
        raise ValueError("u must be finite")
    if u == 0.0:
        return 0.0

    def integrand(s):
        F = np.asarray(pot.F(s), dtype=float) * np.ones_like(s)
        if np.any(F < 0):
            raise InvalidPotentialError(f"{pot.name}: F negative at a quadrature node")
        return np.sqrt(2.0 * F)

    # keep the node density of compute_c0 so Psi(1) - Psi(-1) reproduces c0
    n = max(2, int(math.ceil(panels * abs(u) / 2.0)))
    return _simpson(integrand, 0.0, u, n)


@dataclass(frozen=True)
class DampingSpec:
    """Damping coefficient ``g(u)`` with certified lower bound ``sigma``.

    ``variant`` is ``"constant"`` or ``"relaxation"``; ``value`` holds the
    constant or the relaxation time ``tau`` respectively.
    """

    g: ScalarFn
    sigma: float
    variant: str
    value: float

    @classmethod
    def constant(cls, value: float) -> "DampingSpec":
        if not value > 0:
            raise InvalidPotentialError("constant damping must be positive")
        return cls(lambda u, _c=float(value): _c * np.ones_like(u), float(value), "constant", float(value))

    @classmethod
    def relaxation(cls, tau: float, pot: PotentialSpec = QUARTIC) -> "DampingSpec":
        """``g(u) = 1 - tau f'(u)``, the damping produced by the kinetic scheme."""
        fp = pot.fprime

        def g(u):
            return 1.0 - tau * fp(u)

        if pot.name == "quartic":
            # 1 - tau(1 - 3u^2) >= 1 - tau
            sigma = 1.0 - tau
        else:
            sigma = float(np.min(g(np.linspace(-3.0, 3.0, 6001))))
        if not sigma > 0:
            raise InvalidPotentialError(
                f"relaxation damping with tau={tau} is not bounded below by a positive constant"
            )
        spec = cls(g, sigma, "relaxation", float(tau))
        spec._check_bound()
        return spec

    def _check_bound(self) -> None:
        s = np.linspace(-3.0, 3.0, 6001)
        if np.any(self.g(s) < self.sigma - 1e-12):
            raise InvalidPotentialError("g falls below its stated lower bound sigma")
