"""Numerical pseudodifferential operators, maximal functions, and variable
Lebesgue norms, with an experiment harness for operator-norm estimates."""

from ._core import (
    CertificateReport,
    Error,
    ExperimentConfig,
    ExperimentResult,
    ExponentFunction,
    GridFunction,
    GridSpec,
    Symbol,
    apply_op,
    catalog_symbol,
    certify,
    conjugate_exponent,
    constant_norm,
    coordinate_symbol,
    distribution_measure,
    exponent_catalog,
    forward_transform,
    generate_family,
    grid_function,
    hardy_littlewood,
    inverse_transform,
    load_psbf,
    make_grid,
    miyachi_norm,
    modular,
    pairing_integral,
    parse_config,
    preset_config,
    q_maximal,
    run_experiment,
    save_psbf,
    scale_symbol,
    sharp_maximal,
    vlp_norm,
    write_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "CertificateReport",
    "Error",
    "ExperimentConfig",
    "ExperimentResult",
    "ExponentFunction",
    "GridFunction",
    "GridSpec",
    "Symbol",
    "apply_op",
    "catalog_symbol",
    "certify",
    "conjugate_exponent",
    "constant_norm",
    "coordinate_symbol",
    "distribution_measure",
    "exponent_catalog",
    "forward_transform",
    "generate_family",
    "grid_function",
    "hardy_littlewood",
    "inverse_transform",
    "load_psbf",
    "make_grid",
    "miyachi_norm",
    "modular",
    "pairing_integral",
    "parse_config",
    "preset_config",
    "q_maximal",
    "run_experiment",
    "save_psbf",
    "scale_symbol",
    "sharp_maximal",
    "vlp_norm",
    "write_experiment",
]
