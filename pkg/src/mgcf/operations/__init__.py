"""Internal operations for mgcf.

This module contains internal operation functions used by the public API.
These are not part of the public API - users should use module-level functions instead.
"""

from .flow import run_flow, run_stationary, solve_stationary, step_explicit, flow_rhs  # Internal use only
from .monitors import estimate_monitors, verdict_table  # Internal use only
from .compare import comparison_check  # Internal use only
from .continuation import epsilon_continuation  # Internal use only
from .identities import evolution_identity_residuals, identity_order_study  # Internal use only
from .check_f import check_structure  # Internal use only
from .scenario import load_scenario, parse_scenario, dump_scenario  # Internal use only
from .outputs import write_outputs  # Internal use only

# No public exports - all functions are internal
__all__ = []
