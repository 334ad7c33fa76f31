"""Central numerical tolerance settings.

Every module pulls its default tolerances from a single :class:`Tolerances`
record so that they can be adjusted in one place.  Environment variables of
the form ``GWIRE_<FIELD>`` (upper-cased field name) override the defaults,
e.g. ``GWIRE_EIG_ORTHO=1e-9``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields


@dataclass(frozen=True)
class Tolerances:
    eig_ortho: float = 1e-10          # max-norm departure of P'P from I
    eig_reconstruct: float = 1e-8     # max-norm reconstruction error of P diag(g) P'
    min_eigenvalue: float = 1e-12     # positive-definiteness floor
    symmetry: float = 1e-10           # allowed asymmetry before symmetrization
    zero_detect: float = 1e-8         # |omega_ij| above this counts as an edge
    unit_norm: float = 1e-8           # sphere / pmf normalization slack
    kkt_scale: float = 1e-3           # kkt residual allowed, relative to lambda


def tolerances_from_env(base: Tolerances | None = None) -> Tolerances:
    """Return tolerances with any ``GWIRE_*`` environment overrides applied."""
    base = base or Tolerances()
    overrides = {}
    for f in fields(Tolerances):
        raw = os.environ.get("GWIRE_" + f.name.upper())
        if raw is not None:
            overrides[f.name] = float(raw)
    if not overrides:
        return base
    values = {f.name: getattr(base, f.name) for f in fields(Tolerances)}
    values.update(overrides)
    return Tolerances(**values)


DEFAULT_TOL = tolerances_from_env()
