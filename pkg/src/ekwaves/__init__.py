"""Traveling waves, stability and multi-soliton tools for the 1-D capillary
Euler system."""

__version__ = "0.1.0"

from .errors import (BlowupError, ConfigError, DivergenceError, DomainError,
                     EKError, NoKinkFoundError, NoSolitonError, NumericalError,
                     PreconditionError, ProfileError, ResolutionError,
                     SaddleViolationError, StateError, WindowError)
from .kernels import BACKEND as KERNEL_BACKEND
from .models import FluidModel, builtin_model, constant_K, cubic_vdw, \
    gross_pitaevskii, sound_speed_sq
from .profiles import (ConditionReport, EndState, TravelingWaveSpec,
                       WaveProfile, first_integrals, kink_conditions,
                       kink_manifold_rank, kink_profile, saddle_check,
                       solve_kink_endstates, soliton_min_density,
                       soliton_profile, transonic_family)

__all__ = [name for name in dir() if not name.startswith("_")]
