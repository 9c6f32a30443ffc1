"""Numerical tolerances and their environment overrides.

The values here are read-only defaults. Library functions take explicit
tolerance arguments; only the command line resolves overrides from the
environment (``QDB_TOL_RANK``, ``QDB_TOL_SDP``, ``QDB_TOL_CONSISTENCY``).
"""

import os
from dataclasses import dataclass, fields, replace

from .errors import SchemaError

# relative eigenvalue cutoff: an eigenvalue counts as zero below dim * RANK_FACTOR * lambda_max
RANK_FACTOR = 1e-12
SDP_TOL = 1e-8
CONSISTENCY_TOL = 1e-7
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-9

ENV_PREFIX = "QDB_TOL_"


@dataclass(frozen=True)
class Tolerances:
    rank: float = RANK_FACTOR
    sdp: float = SDP_TOL
    consistency: float = CONSISTENCY_TOL

    def validate(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, float) and v > 0 and v < 1):
                raise SchemaError(f"tolerance '{f.name}' must lie in (0, 1), got {v!r}")
        return self


def _parse(name, raw):
    try:
        return float(raw)
    except ValueError:
        raise SchemaError(f"{ENV_PREFIX}{name.upper()} is not a number: {raw!r}") from None


def resolve_tolerances(env=None, **flags):
    """Defaults, then environment, then explicit flags (flags win).

    Args:
        env: mapping to read overrides from, ``os.environ`` when None.
        **flags: ``rank``, ``sdp`` or ``consistency``; None entries are ignored.
    """
    env = os.environ if env is None else env
    tol = Tolerances()
    for f in fields(Tolerances):
        key = ENV_PREFIX + f.name.upper()
        if key in env:
            tol = replace(tol, **{f.name: _parse(f.name, env[key])})
    for name, value in flags.items():
        if value is not None:
            tol = replace(tol, **{name: float(value)})
    return tol.validate()
