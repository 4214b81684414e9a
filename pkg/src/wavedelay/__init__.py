"""Delayed boundary-feedback stabilization of a vibrating string.

Exact d'Alembert simulation of the string with piecewise-constant feedback
delay, spectral analysis of the delayed recursion, switched-matrix decay
certificates and an independent finite-difference oracle.
"""
from wavedelay.characteristics import (
    CharacteristicsRun,
    TraceDensity,
    decay_fit,
    energy,
    energy_window,
    evaluate_state,
    extend_trace,
    init_trace,
    simulate,
)
from wavedelay.companion import (
    DelayKind,
    build_delay_matrix,
    eigen_basis,
    modal_decompose,
    propagate_switched,
    switched_system,
)
from wavedelay.kernels import BACKEND
from wavedelay.model import DelaySchedule, InitialState, StringConfig, preset_state
from wavedelay.spectral import (
    build_char_poly,
    explicit_quintic,
    f0,
    find_roots,
    localization_report,
    stability_margin,
    stability_report,
)

__version__ = "0.1.0"
