"""Simulation and analysis toolkit for ancilla-assisted DC magnetometry."""

__version__ = "0.1.0"

from .spin_core import (AncillaKind, EffectiveModel, FieldConfig,
                        SpinSystemParams, derive_effective, drift_robustness,
                        field_for_delta, harmonics, total_transverse)
from .sequences import (InterpolationPlan, PulseSequence, build_cpmg,
                        build_xy8, interpolated_sequence, interpolation_error)
from .oracle import (InitialState, apply_pulse, build_hamiltonian, evolve,
                     find_resonance, run_fringe, run_sequence)
from .signal_model import FringeSeries, analytic_signal, fringe_vs_field, overlap_signal
from .filters import (FilterCurve, NoiseTone, filter_curve, filter_cutoff,
                      filter_response, ramsey_filter, tone_angles)
from .metrology import (CsrConfig, DecayModel, DynamicRangeReport, ReadoutModel,
                        compensated_preparation, csr_gain, dynamic_range,
                        min_field, optimal_time, ramsey_sensitivity, sensitivity)
from .modes import (MaytagConfig, SpinLockConfig, maytag_response,
                    spinlock_match, spinlock_signal, spinlock_signal_oracle,
                    vector_reconstruct)
from .analysis import FitResult, chi2_fit, fringe_extract, monte_carlo_uncertainty
from .config import ExperimentConfig, default_config, load_config
from .tables import ResultTable
from .runners import run_experiment

__all__ = [name for name in dir() if not name.startswith("_")]
