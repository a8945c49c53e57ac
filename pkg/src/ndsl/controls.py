"""Numerical tolerances shared by the spectral routines."""
from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Controls:
    tol_lambda: float = 1e-10
    tol_f: float = 1e-12
    tol_fprime: float = 1e-9
    tol_ghost: float = 1e-7
    rk_tol: float = 1e-10
    eps_axis: float = 1e-6
    winding_budget: int = 100_000
    min_nodes: int = 512
    validation_width: int = 4

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value!r}")

    def describe(self) -> str:
        return " ".join(f"{k}={v!r}" for k, v in asdict(self).items())


DEFAULT = Controls()
