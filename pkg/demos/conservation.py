"""Discrete mass and energy conservation of the implicit compact scheme.

The implicit scheme conserves the discrete l2 mass and, for time-independent
potentials, the discrete energy — to solver tolerance, for every epsilon.
This script runs it at two epsilon values and prints the relative drifts.

    python3 demos/conservation.py
"""

from dirac4cfd import experiments as ex

spec = ex.ExperimentSpec(
    epsilons=[1.0, 2.0 ** -4],
    tau=0.01,
    n=128,
    t_final=2.0,
    linear_solver_tol=1e-12,
)

result = ex.conserve(spec)

print(f"{'eps':>8} {'mass(0)':>14} {'energy(0)':>14} {'mass drift':>12} {'energy drift':>13}")
for eps in result.epsilons:
    print(f"{eps:8.4f} {result.mass[eps][0]:14.8f} {result.energy[eps][0]:14.6f} "
          f"{result.mass_drift[eps]:12.2e} {result.energy_drift[eps]:13.2e}")

print("\nnote: the energy magnitude grows as eps shrinks (the 1/eps terms dominate),")
print("but both invariants stay flat to ~1e-10 over the whole run.")
assert all(d <= 1e-10 for d in result.mass_drift.values())
assert all(d <= 1e-8 for d in result.energy_drift.values())
