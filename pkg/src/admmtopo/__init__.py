"""Spectral analysis and optimal tuning of over-relaxed ADMM for graph consensus."""

from .analysis import (SpeedupCertificate, cheeger_check, cycle_family_sweep,
                       laplacian_bound_check, speedup_certificate)
from .graph import (Graph, TopologyClass, build_graph, classify, conductance, from_spec, generate,
                    has_even_cycle)
from .iterate import (AdmmState, TrajectoryStats, admm_matrix_step, admm_message_step,
                      consensus_value, gd_step, mean_fixed_point, measure_rate, random_init,
                      random_u0)
from .operators import FactorGraph, FactorOperators, apply_ta, build_factor_graph, build_operators
from .spectral import (SpectralReport, TaSpectrum, predict_ta_spectrum, reachable_rate,
                       second_largest_ta, symmetric_eigs, verify_eigenvalue, walk_spectrum)
from .tuning import (GdTuning, Regime, TuningResult, tune, tune_admm_even_cycle,
                     tune_admm_high_conductance_even_cycle, tune_admm_no_even_cycle, tune_gd)

__all__ = [
    "AdmmState", "FactorGraph", "FactorOperators", "GdTuning", "Graph", "Regime",
    "SpectralReport", "SpeedupCertificate", "TaSpectrum", "TopologyClass", "TrajectoryStats",
    "TuningResult", "admm_matrix_step", "admm_message_step", "apply_ta", "build_factor_graph",
    "build_graph", "build_operators", "cheeger_check", "classify", "conductance",
    "consensus_value", "cycle_family_sweep", "from_spec", "gd_step", "generate", "has_even_cycle",
    "laplacian_bound_check", "mean_fixed_point", "measure_rate", "predict_ta_spectrum",
    "random_init", "random_u0", "reachable_rate", "second_largest_ta", "speedup_certificate",
    "symmetric_eigs", "tune", "tune_admm_even_cycle", "tune_admm_high_conductance_even_cycle",
    "tune_admm_no_even_cycle", "tune_gd", "verify_eigenvalue", "walk_spectrum",
]
