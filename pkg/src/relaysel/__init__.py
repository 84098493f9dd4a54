"""Bidirectional amplify-and-forward relay selection under outdated CSI.

A simulation and analysis toolkit for two sources exchanging symbols through
N half-duplex relays, where the max-min relay choice is made on stale channel
estimates.  Three mutually-checking engines:

* :mod:`relaysel.model` - SNR formulas, bounds and selection rules.
* :mod:`relaysel.montecarlo` - correlated channel sampling and SER estimation
  (compiled kernel with a NumPy fallback, see :mod:`relaysel.backend`).
* :mod:`relaysel.analytic` - closed-form SNR distribution, average SER,
  high-SNR asymptotics and diversity tools.

The ``relaysel`` command drives parameter sweeps and figure presets.
"""

__version__ = "0.1.0"

from .model import (
    BPSK,
    ChannelRealization,
    Modulation,
    NetworkConfig,
    SelectionResult,
    SnrPolicy,
    combined_snr,
    jakes_correlation,
    max_fd_td,
    min_snr_bound,
    select_multiple,
    select_single,
    snr_exact,
    snr_upper,
)
from .analytic import (
    ConvergenceError,
    asymptotic_ser,
    average_ser,
    bessel_k1,
    cdf_e2e_snr,
    gauss_2f1,
    gaussian_q,
    mgf_multi_rs,
    pdf_selected_gain,
    subset_sum_residuals,
    symmetric_simplify,
)
from .montecarlo import (
    DiversityProfile,
    RngStream,
    SerEstimate,
    empirical_cdf,
    empirical_mgf,
    estimate_diversity,
    sample_realization,
    sample_selected_snr,
    simulate_ser,
)
from .config import LoadedConfig, NetworkTemplate, SweepSpec, load_config, save_config
from .sweep import SerCurve, emit_csv, run_sweep
from .figures import reproduce_figure

__all__ = [
    "__version__",
    "BPSK", "ChannelRealization", "Modulation", "NetworkConfig",
    "SelectionResult", "SnrPolicy", "combined_snr", "jakes_correlation",
    "max_fd_td", "min_snr_bound", "select_multiple", "select_single",
    "snr_exact", "snr_upper",
    "ConvergenceError", "asymptotic_ser", "average_ser", "bessel_k1",
    "cdf_e2e_snr", "gauss_2f1", "gaussian_q", "mgf_multi_rs",
    "pdf_selected_gain", "subset_sum_residuals", "symmetric_simplify",
    "DiversityProfile", "RngStream", "SerEstimate", "empirical_cdf",
    "empirical_mgf", "estimate_diversity", "sample_realization",
    "sample_selected_snr", "simulate_ser",
    "LoadedConfig", "NetworkTemplate", "SweepSpec", "load_config", "save_config",
    "SerCurve", "emit_csv", "run_sweep", "reproduce_figure",
]
