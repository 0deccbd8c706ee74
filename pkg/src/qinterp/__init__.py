"""
Quantum interpolation for super-resolved quantum sensing.

Dynamical-decoupling sequences resolve frequencies only on the grid set by
the pulse-timing hardware. Interpolation mixes two grid-compatible blocks
``U0`` (spacing ``tau_k``) and ``U1`` (spacing ``tau_k + delta_tau``) in a
carefully ordered word so the product approximates the block at an off-grid
spacing ``tau_k + (p/q) delta_tau``.

Modules
-------
su2
    SU(2) rotations, composition and fidelities.
spin
    Electron-nuclear spin model, exact and first-order signals.
planner
    Optimal interpolation words, trapezium error, brute-force certification.
filters
    Time and frequency filters, noise overlap, Q metrics.
cli
    ``qinterp`` command-line tool.
"""
from .errors import (EnumerationRefusedError, IntegrationError, InvalidFractionError,
                     LinewidthUndefinedError, ModelError, SingularModelError, UndefinedQError)
from .su2 import Rotation, compose, compose3, overlap_signal, power, trace_fidelity
from .spin import (FAMILIES, Nitrogen14Model, SequenceSpec, SpinCoupling, block_propagators,
                   lineshape_first_order, linewidth, signal_at_angle, signal_at_deviation)
from .planner import (HardwareGrid, InterpolationPlan, brute_force_best_plan, naive_plan,
                      optimal_plan, plan_fidelity, supersampled_sweep, trapezium_error)
from .filters import (NoiseSpectrum, TimeFilter, coherence_decay, filter_from_plan,
                      frequency_response, q_metrics, sampling_limits)

__version__ = "0.1.0"
