"""Run configuration for the time steppers."""
from __future__ import annotations

from dataclasses import dataclass, field

SCHEME_IMPLICIT = "implicit-4cfd"
SCHEME_SEMI_IMPLICIT = "semi-implicit-4cfd"
SCHEME_TSSP = "tssp-reference"
SCHEMES = (SCHEME_IMPLICIT, SCHEME_SEMI_IMPLICIT, SCHEME_TSSP)

# T_0/tau must hit an integer step count this precisely, else the run is rejected.
STEP_COUNT_RTOL = 1e-9


@dataclass
class SchemeConfig:
    epsilon: float
    tau: float
    t_final: float
    scheme: str = SCHEME_SEMI_IMPLICIT
    linear_solver_tol: float = 1e-12
    snapshot_times: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in (0, 1], got {self.epsilon}")
        if self.tau <= 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.t_final < self.tau:
            raise ValueError(f"t_final must be >= tau, got {self.t_final} < {self.tau}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        n = round(self.t_final / self.tau)
        if n < 1 or abs(n * self.tau - self.t_final) > STEP_COUNT_RTOL * self.t_final:
            raise ValueError(
                f"t_final/tau = {self.t_final / self.tau} is not an integer step count"
            )

    @property
    def n_steps(self) -> int:
        return round(self.t_final / self.tau)
