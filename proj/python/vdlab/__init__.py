"""Python bindings for the vdlab numerical core."""

from ._core import (
    ConfigError,
    Error,
    Grid,
    InvalidArgument,
    NumericalError,
    SingularDomain,
    __version__,
    config_echo,
    config_schema,
    dispersion,
    experiments,
    gamma_matrices,
    manufactured_fields,
    manufactured_shift_residual,
    run,
    run_experiment,
    shift_residual,
    solve_lambda_static,
)

__all__ = [
    "ConfigError",
    "Error",
    "Grid",
    "InvalidArgument",
    "NumericalError",
    "SingularDomain",
    "__version__",
    "config_echo",
    "config_schema",
    "dispersion",
    "experiments",
    "gamma_matrices",
    "manufactured_fields",
    "manufactured_shift_residual",
    "run",
    "run_experiment",
    "shift_residual",
    "solve_lambda_static",
]
