"""Self-check suite behind ``hyperac verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import diagnostics as dg
from .experiments import EXAMPLES, ExperimentConfig, energy_identity_check, example_config, prepare
from .kinetics import Grid1D, KineticState, derive_params, run
from .potential import QUARTIC, PotentialSpec, compute_c0


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool


def check_c0() -> Check:
    c0 = compute_c0(QUARTIC)
    err = abs(c0 - 2 * math.sqrt(2) / 3)
    return Check("c0_quartic", c0, 1e-8, err <= 1e-8)


def check_energy_identity() -> list[Check]:
    base = example_config(3)
    coarse = energy_identity_check(base.with_overrides(cells=base.resolved_cells), horizon=10.0)
    fine = energy_identity_check(base.with_overrides(cells=2 * base.resolved_cells), horizon=10.0)
    ratio = coarse.residual / fine.residual if fine.residual > 0 else math.inf
    return [
        Check("energy_identity_residual_coarse", coarse.residual, math.inf, math.isfinite(coarse.residual)),
        Check("energy_identity_refinement_ratio", ratio, 1.5, ratio >= 1.5),
        Check("energy_monotone_coarse", coarse.max_rise, 10 * coarse.residual, coarse.max_rise <= 10 * coarse.residual),
        Check("energy_monotone_fine", fine.max_rise, 10 * fine.residual, fine.max_rise <= 10 * fine.residual),
    ]


def check_layer_certificates(epsilons=(0.1, 0.05, 0.02)) -> list[Check]:
    out = []
    c0 = compute_c0(QUARTIC)
    for eps in epsilons:
        cfg = ExperimentConfig(eps, 0.8, "tanh_layer", "zero", 0.0)
        grid = cfg.grid()
        u = cfg.initial_data().u0(grid.nodes)
        cert = dg.layer_certificate(u, grid, QUARTIC, dg.StepProfile((0.0,), -1), eps, 1, 0.5, c0=c0)
        out.append(Check(f"layer_margin_eps={eps:g}", cert.margin, -5 * eps, cert.margin >= -5 * eps))
    return out


def check_compatibility_residuals() -> list[Check]:
    out = []
    for n in sorted(EXAMPLES):
        *_, residual = prepare(example_config(n, {"horizon": 0.0}))
        out.append(Check(f"compat_residual_example_{n}", residual, 1e-8, abs(residual) <= 1e-8))
    return out


def check_conservation(steps: int = 10_000) -> Check:
    flat = PotentialSpec("flat", lambda u: 0 * u, lambda u: 0 * u, lambda u: 0 * u, check=False)
    grid = Grid1D(-4.0, 4.0, 64)
    rng = np.random.default_rng(0)
    state = KineticState(rng.random(64), rng.random(64), 0.0, grid)
    params = derive_params(0.1, 0.8, grid)
    total0 = float(np.sum(state.u))
    final = run(state, params, flat, (steps - 0.5) * params.dt)
    drift = abs(float(np.sum(final.u)) - total0)
    return Check("mass_drift_per_1e4_steps", drift, 1e-12, drift <= 1e-12)


def run_all() -> list[Check]:
    checks = [check_c0()]
    checks += check_energy_identity()
    checks += check_layer_certificates()
    checks += check_compatibility_residuals()
    checks.append(check_conservation())
    return checks
