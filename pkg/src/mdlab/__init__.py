"""mdlab — a numerical laboratory for stationary Maxwell-Dirac systems.

The package works in 2-spinor variables throughout: the Dirac field is the
pair (U_A, V-bar^Adot), the electromagnetic potential is a real 4-vector
A^alpha, and every field equation of the stationary system is exposed as a
residual evaluator so that any candidate configuration — solver output or
synthetic — can be checked against the full 3D system.

Layout:

- :mod:`mdlab.spinor`       2-spinor algebra, dyads, van der Waerden symbols,
                            null tetrads.
- :mod:`mdlab.fields`       gridded field containers and the residual
                            evaluators (Dirac in both assemblies, reality
                            conditions, Maxwell/Lorenz, second-order form,
                            potential reconstruction, current).
- :mod:`mdlab.radial`       log-grid radial reduction: two-amplitude ODE
                            system, two-sided shooting, radial Poisson solve,
                            and the 3D embedding certificate.
- :mod:`mdlab.scf`          self-consistent density/potential/eigenvalue
                            fixed-point iteration and parameter sweeps.
- :mod:`mdlab.asymptotics`  tail diagnostics: decay-envelope fits, limit
                            formula, comparison bound, staticity, phase
                            expansion, charge/dipole extraction.
- :mod:`mdlab.config`       run configuration parsing (INI-style, strict).
- :mod:`mdlab.serialize`    deterministic artifacts: canonical JSON, annotated
                            CSV, run manifest and its fingerprint.
- :mod:`mdlab.cli`          the ``mdlab`` command line front end.

Units: hbar = c = 1; the Maxwell source keeps its explicit 4*pi.
"""

from mdlab.spinor import (
    Dyad,
    NullTetrad,
    Spinor2,
    dyad_normalize,
    raise_index,
    lower_index,
    tetrad_from_dyad,
    decompose_vector,
)
from mdlab.fields import (
    SpinorFields,
    PotentialField,
    UniformGrid,
    dirac_residual,
    maxwell_residual,
    reality_residual,
    current,
)
from mdlab.radial import (
    RadialProblem,
    RadialSolution,
    ShootResult,
    shoot_eigenvalue,
    poisson_radial,
    embed_check,
)
from mdlab.scf import (
    ScfConfig,
    ScfResult,
    scf_solve,
    sweep,
    tune_charge_to_energy,
)
from mdlab.asymptotics import (
    charge_and_dipole,
    charge_tail_scale,
    comparison_bound_check,
    fit_decay,
    limit_formula_check,
    phase_expansion_fit,
    staticity_check,
)
from mdlab.config import ConfigError, RunConfig, parse_config
from mdlab.serialize import read_csv, read_json, write_csv, write_json

__all__ = [
    "Dyad",
    "NullTetrad",
    "Spinor2",
    "dyad_normalize",
    "raise_index",
    "lower_index",
    "tetrad_from_dyad",
    "decompose_vector",
    "SpinorFields",
    "PotentialField",
    "UniformGrid",
    "dirac_residual",
    "maxwell_residual",
    "reality_residual",
    "current",
    "RadialProblem",
    "RadialSolution",
    "ShootResult",
    "shoot_eigenvalue",
    "poisson_radial",
    "embed_check",
    "ScfConfig",
    "ScfResult",
    "scf_solve",
    "sweep",
    "tune_charge_to_energy",
    "charge_and_dipole",
    "charge_tail_scale",
    "comparison_bound_check",
    "fit_decay",
    "limit_formula_check",
    "phase_expansion_fit",
    "staticity_check",
    "ConfigError",
    "RunConfig",
    "parse_config",
    "read_csv",
    "read_json",
    "write_csv",
    "write_json",
]

__version__ = "0.1.0"
