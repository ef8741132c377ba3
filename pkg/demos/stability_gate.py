"""The semi-implicit scheme's stability condition tau <= 1/(V_max + A_max).

For the standard 1D potentials the bound is tau_max = 0.5.  The run() driver
refuses a violating time step unless explicitly overridden; the von Neumann
amplification factor of the implicit scheme has unit modulus for every mode,
so that scheme needs no gate at all.

    python3 demos/stability_gate.py
"""
import numpy as np

from dirac4cfd import (
    SCHEME_IMPLICIT,
    SCHEME_SEMI_IMPLICIT,
    SchemeConfig,
    StabilityError,
    amplification_factor,
    build_grid,
    check_stability,
    run,
    sample_field,
)
from dirac4cfd.potentials import standard_1d_initial, standard_1d_potentials

grid = build_grid(0.0, 2.0 * np.pi, 64)
phi0 = sample_field(standard_1d_initial, grid)
pots = standard_1d_potentials()

report = check_stability(SchemeConfig(1.0, 0.45, 1.8), pots, grid)
print(f"sampled maxima: V_max={report.v_max:.4f}, A_max={report.a_max[0]:.4f}")
print(f"semi-implicit stability bound: tau_max={report.tau_max:.4f}")

print("\ntau=0.45 (inside the bound): ", end="")
run(SchemeConfig(1.0, 0.45, 1.8, SCHEME_SEMI_IMPLICIT), grid, phi0, pots)
print("run completes")

print("tau=0.60 (outside the bound): ", end="")
try:
    run(SchemeConfig(1.0, 0.60, 1.8, SCHEME_SEMI_IMPLICIT), grid, phi0, pots)
except StabilityError as exc:
    print(f"refused — {exc}")

print("tau=0.60, implicit scheme:     ", end="")
run(SchemeConfig(1.0, 0.60, 1.8, SCHEME_IMPLICIT), grid, phi0, pots)
print("run completes (unconditionally stable)")

rng = np.random.default_rng(0)
worst = max(
    abs(abs(amplification_factor(
        int(rng.integers(-32, 32)), 64,
        h=float(rng.uniform(0.01, 1.0)), eps=float(rng.uniform(0.01, 1.0)),
        tau=float(rng.uniform(1e-4, 0.5)), v0=float(rng.uniform(-2, 2)),
        a10=float(rng.uniform(-2, 2)))) - 1.0)
    for _ in range(1000))
print(f"\nimplicit amplification factor: max | |eta| - 1 | = {worst:.2e} over 1000 draws")
