"""Pseudo-spectral Navier-Stokes on the 3-torus with Littlewood-Paley diagnostics."""
__version__ = "0.1.0"

from .spectral import (  # noqa: E402
    FieldError,
    Grid,
    PhysicalField,
    SpectralField,
    dealias,
    energy,
    enstrophy,
    gradient,
    leray_project,
    make_grid,
    nonlinear_advection,
    norm_hs,
    norm_lp,
    to_physical,
    to_spectral,
)
from .lpbank import (  # noqa: E402
    DyadicFilterBank,
    ShellSpectrum,
    band_project,
    bernstein_ratio,
    besov_norm,
    dyadic_symbol,
    shell_project,
    shell_statistics,
    tilde_project,
)
from .solver import NumericalError, SolverState, Stepper, cfl_dt, energy_balance_residual, step  # noqa: E402
from .flux import (  # noqa: E402
    FluxSample,
    cet_remainder,
    flux_bound_ratio,
    flux_high,
    flux_identity_residual,
    flux_low,
    shell_balance_residual,
)
from .ledger import CriterionReport, WindowLedger  # noqa: E402
from .scenarios import ic_random_spectrum, ic_taylor_green  # noqa: E402
from .io import read_snapshot, write_snapshot  # noqa: E402
from .config import RunConfig, load_config  # noqa: E402
from .driver import run  # noqa: E402
from .report import write_report  # noqa: E402
