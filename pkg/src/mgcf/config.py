"""Configuration constants for the mgcf package."""

from typing import Dict, Tuple

# Structure certifier (symmetric curvature functions)
SAMPLE_RANGE: Tuple[float, float] = (1e-2, 1e2)
DEFAULT_SAMPLES: int = 10_000
DEFAULT_PAIRS: int = 1_000
DEFAULT_SEED: int = 0
HOMOGENEITY_SCALES: Tuple[float, ...] = (0.5, 2.0, 10.0)
R_BIG: float = 1e6
DELTA_0: float = 0.1
EPSILON_0: float = 0.05
BOUNDARY_PROBE: float = 1e-8
BOUNDARY_TOL: float = 1e-3
# Deterministic points checked before the random samples; the first one is
# where H_1 visibly breaks Sum f_i > Sum lambda_i^2 f_i.
ANCHOR_POINTS: Tuple[Tuple[float, float], ...] = ((0.1, 1.8), (0.5, 0.5), (0.2, 3.0))
# Extra sampler draws allowed when filling the 0 < f < 1 sample set
SUBLEVEL_MAX_ROUNDS: int = 100

# Curvature function families (CLI / scenario spelling -> canonical name)
FAMILY_ALIASES: Dict[str, str] = {
    "mean": "mean",
    "h1": "mean",
    "meanh1": "mean",
    "gauss": "gauss",
    "gaussroot": "gauss",
    "quotient": "quotient",
    "hessianquotient": "quotient",
}

# Geometry / stepping
MIN_NODES: int = 16
MAX_HALVINGS: int = 10

# Monitor tolerances
TOL_RATIO: float = 0.05
TOL_ORDER: float = 1e-10
TOL: float = 1e-8
TOL_LIMIT: float = 1e-3
MONOTONE_TOL: float = 1e-12
CON2_REL_TOL: float = 2e-2
INT18_SLACK: float = 0.5
UD2U_BOUND: float = 10.0

# Evolution identities and continuation
IDENTITY_BASE_DT: float = 1e-2
IDENTITY_FLOOR_FACTOR: float = 1e-4
IDENTITY_MIN_ORDER: float = 0.9
CAUCHY_RATIO_SPREAD: float = 10.0

# Scenario defaults
DEFAULT_SCENARIO: Dict[str, Dict[str, object]] = {
    "domain": {"kind": "ball", "n": 2, "extent": 1.0, "nodes": 400},
    "curvature": {"family": "gauss", "l": 0},
    "flow": {
        "sigma": None,
        "sigma_init": None,
        "epsilon": None,
        "cfl_safety": 0.2,
        "t_max": 200.0,
        "steady_tol": 1e-8,
        "diag_stride": 200,
    },
    "continuation": {"levels": 3},
    "output": {"directory": ".", "prefix": "run"},
}

# Output schema
DIAG_COLUMNS: Tuple[str, ...] = (
    "t",
    "min_conv_eig",
    "min_F_minus_sigma",
    "max_F_minus_sigma",
    "max_w_interior",
    "w_at_boundary_adjacent",
    "w_at_boundary",
    "min_nu_interior",
    "max_kappa",
    "max_ratio_interior",
    "boundary_ratio",
    "a_used",
    "max_uD2u_boundary",
    "boundary_psi",
    "max_reaction",
    "monotone_ok",
    "c2g13_ok",
    "gre0_ok",
    "gre1_ok",
    "dissipation_partial",
)
FINAL_U_COLUMNS: Tuple[str, ...] = ("node", "r_or_x", "u", "w", "nu", "kappa_max", "kappa_min", "F")
VERDICT_TAGS: Tuple[str, ...] = ("Int14", "Int18", "Gre0", "Gre1", "Gre11", "C2b22", "c2g13", "Con2", "Unf2")
FLOAT_FORMAT: str = "%.17g"

# Package metadata
PACKAGE_NAME: str = "mgcf"
VERSION: str = "0.0.1"
DESCRIPTION: str = "Modified general curvature flow of convex graphs in hyperbolic space"

__all__ = [
    "SAMPLE_RANGE",
    "DEFAULT_SAMPLES",
    "DEFAULT_PAIRS",
    "DEFAULT_SEED",
    "HOMOGENEITY_SCALES",
    "R_BIG",
    "DELTA_0",
    "EPSILON_0",
    "BOUNDARY_PROBE",
    "BOUNDARY_TOL",
    "ANCHOR_POINTS",
    "SUBLEVEL_MAX_ROUNDS",
    "FAMILY_ALIASES",
    "MIN_NODES",
    "MAX_HALVINGS",
    "TOL_RATIO",
    "TOL_ORDER",
    "TOL",
    "TOL_LIMIT",
    "MONOTONE_TOL",
    "CON2_REL_TOL",
    "INT18_SLACK",
    "UD2U_BOUND",
    "IDENTITY_BASE_DT",
    "IDENTITY_FLOOR_FACTOR",
    "IDENTITY_MIN_ORDER",
    "CAUCHY_RATIO_SPREAD",
    "DEFAULT_SCENARIO",
    "DIAG_COLUMNS",
    "FINAL_U_COLUMNS",
    "VERDICT_TAGS",
    "FLOAT_FORMAT",
    "PACKAGE_NAME",
    "VERSION",
    "DESCRIPTION",
]
