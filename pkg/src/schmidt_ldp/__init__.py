"""Large-deviation constrained Schmidt spectra at desk scale.

Closed-form equilibrium densities, rate functions and conditional entropies
for random bipartite pure states whose rescaled Schmidt spectrum is pushed
against a hard floor or ceiling; Metropolis and exact samplers of the
fixed-trace eigenvalue law; and the partial-transpose / log-negativity
pipeline for the induced entanglement transition in a tripartite split.
"""

from .params import (BarrierSpec, Bipartition, EnsembleParams, Regime,
                     WallSide, regime_of)
from .analytics import (DensityCurve, avg_entropy, avg_purity_unconstrained,
                        constrained_density, density_curve, density_support,
                        lagrange_multipliers, matching_zeta, model_log_negativity,
                        model_radius, mp_density, mp_support, page_entropy,
                        rate_function, rescaled_purity, saddle_energy,
                        semicircle_cdf, semicircle_curve, semicircle_density,
                        tail_log_probability, transition_points)
from .sampler import (ChainConfig, ChainDiagnostics, Spectrum, TailEstimate,
                      autocorrelation_time, collect_spectra,
                      direct_pure_state_spectrum, direct_spectra,
                      estimate_tail_probability, log_weight, mcmc_sample,
                      propose_pair_transfer, tail_probability_curve)
from .quantum import (NegativityStats, assemble_density, average_negativity,
                      gue_model_sample, haar_unitary, hermitian_spectrum,
                      load_matrix_dump, log_negativity, partial_transpose,
                      save_matrix_dump)
from .empirics import (CurveDistance, Histogram, bump_perturbed,
                       compare_density, energy_functional, histogram,
                       pv_saddle_residual)

__version__ = "0.1.0"
