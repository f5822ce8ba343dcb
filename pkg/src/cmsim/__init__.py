"""Simulator and verification suite for memoryless composite quantum
collision models: exact discrete collision dynamics, induced GKSL
master equations, exactly solvable reference models, and numerical
certificates of their equivalence with structured-reservoir
(Lorentzian, multi-Lorentzian, telegraph-noise, pure-dephasing)
microscopic descriptions."""

from .engine import AncillaSpec, CompositeModel, collide, evolve, step_unitary
from .lindblad import (
    JumpOperatorSet,
    Liouvillian,
    integrate_me,
    jump_operators,
    liouvillian,
    validate_state,
)
from .lossy_cavity import LossyCavityParams
from .dephasing import DephasingParams
from .multi_lorentzian import TriParams
from .spectral import (
    DephasingSeries,
    LorentzianSum,
    eval_sd,
    map_lorentzian_to_cm,
    memory_kernel,
    solve_volterra,
)

__all__ = [
    "AncillaSpec",
    "CompositeModel",
    "collide",
    "evolve",
    "step_unitary",
    "JumpOperatorSet",
    "Liouvillian",
    "integrate_me",
    "jump_operators",
    "liouvillian",
    "validate_state",
    "LossyCavityParams",
    "DephasingParams",
    "TriParams",
    "DephasingSeries",
    "LorentzianSum",
    "eval_sd",
    "map_lorentzian_to_cm",
    "memory_kernel",
    "solve_volterra",
]
