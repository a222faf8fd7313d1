"""Numerical tolerances shared by every module.

All thresholds live here so that a run can be audited (and, if needed,
tightened) from one place.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    jacobi: float = 1e-12
    killing_match: float = 1e-10
    reexpansion: float = 1e-9
    flow_agreement: float = 1e-8
    log_roundtrip: float = 1e-9
    two_step: float = 1e-10
    bch_check: float = 1e-9
    dependence: float = 1e-9
    zspan_residual: float = 1e-7
    covolume_rel: float = 1e-9
    root_endpoint: float = 1e-12
    goodness_slack: float = 1e-9
    constancy: float = 1e-10
    bound_slack: float = 1e-9
    unimodular_float: float = 1e-10
    # radii below this are replaced by it when computing bad sets; the result
    # is then a superset of the true bad set, so upper-bound checks stay sound
    radius_floor: float = 1e-150


TOL = Tolerances()

# enumeration budgets
MAX_BOX_CANDIDATES = 10**8
MAX_ENUMERATION = 10**6
MAX_WORD_RADIUS = 20
MAX_BALL_SIZE = 10**6
