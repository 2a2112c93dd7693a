"""Characterization-based exponentiality tests for right-censored data."""

from .asymptotics import (
    CovEstimate,
    covariance_estimate,
    gauss_laguerre_grid,
    j_asymptotic_test,
    limiting_eigenvalues,
    omega_hat,
    sigma2_j,
    zeta_hat,
)
from .bootstrap import (
    BootstrapConfig,
    BootstrapDegeneracyError,
    bootstrap_critical_values,
    bootstrap_test,
)
from .distributions import (
    DistSpec,
    KGCensoring,
    censoring_beta_for_rate,
    generate_censored_sample,
)
from .power_study import (
    CellResult,
    PowerTable,
    StudyConfig,
    emit_table,
    parse_table_csv,
    run_power_study,
)
from .statistics import (
    StatisticSpec,
    TestOutcome,
    akritas_chi2,
    cvm_koziol,
    delta_statistic,
    evaluate,
    j_statistic,
    m_statistic,
    qn_statistic,
)
from .survival import (
    CensoredSample,
    DegenerateWeightError,
    StepFn,
    censored_exp_mle,
    ipcw_weights,
    kaplan_meier,
    km_mean,
    nelson_aalen,
    sample_from_stepfn,
)

__all__ = [
    "CensoredSample",
    "DegenerateWeightError",
    "StepFn",
    "censored_exp_mle",
    "ipcw_weights",
    "kaplan_meier",
    "km_mean",
    "nelson_aalen",
    "sample_from_stepfn",
    "DistSpec",
    "KGCensoring",
    "censoring_beta_for_rate",
    "generate_censored_sample",
    "StatisticSpec",
    "TestOutcome",
    "akritas_chi2",
    "cvm_koziol",
    "delta_statistic",
    "evaluate",
    "j_statistic",
    "m_statistic",
    "qn_statistic",
    "BootstrapConfig",
    "BootstrapDegeneracyError",
    "bootstrap_critical_values",
    "bootstrap_test",
    "CovEstimate",
    "covariance_estimate",
    "gauss_laguerre_grid",
    "j_asymptotic_test",
    "limiting_eigenvalues",
    "omega_hat",
    "sigma2_j",
    "zeta_hat",
    "CellResult",
    "PowerTable",
    "StudyConfig",
    "emit_table",
    "parse_table_csv",
    "run_power_study",
]
