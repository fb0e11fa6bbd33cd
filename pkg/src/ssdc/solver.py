"""Semi-discretisation: assembles J dQ/dt from the inviscid and viscous parts."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .fluxes import FluxScheme
from .gas import AdmissibilityError, GasModel, primitives
from .inviscid import boundary_states, inviscid_sat, volume_term
from .mesh import Grid
from .viscous import ViscousConfig, viscous_rhs


@dataclass(eq=False)
class SemiDiscretization:
    grid: Grid
    gas: GasModel
    scheme: FluxScheme
    viscous: ViscousConfig = field(default_factory=lambda: ViscousConfig(enabled=False))
    boundary: Optional[Callable] = None    # (x_face, t) -> conserved state
    source: Optional[Callable] = None      # (x, t) -> (5, ...) source density
    steady_source: bool = True

    def __post_init__(self):
        if not all(self.grid.periodic) and self.boundary is None:
            raise ValueError("non-periodic grid needs a boundary-state callable")
        self._source_cache = None
        self.n_rhs = 0

    def jrhs(self, q, t=0.0):
        """J dQ/dt, the assembled residual used by the entropy diagnostics."""
        self.n_rhs += 1
        g = self.grid
        try:
            prims = primitives(q, self.gas)
        except AdmissibilityError as err:
            err.time = t
            raise
        q_bc = boundary_states(g, self.boundary, t) if self.boundary is not None else None
        r = -volume_term(g, self.gas, self.scheme, q, time=t, prims=prims)
        r += inviscid_sat(g, self.gas, self.scheme, q, q_bc)
        if self.viscous.enabled and self.gas.mu > 0:
            r += viscous_rhs(g, self.gas, q, self.viscous, q_bc, prims)
        if self.source is not None:
            r += g.J * self._source(t)
        return r

    def _source(self, t):
        if self.steady_source:
            if self._source_cache is None:
                self._source_cache = self.source(self.grid.x, t)
            return self._source_cache
        return self.source(self.grid.x, t)

    def rhs(self, q, t=0.0):
        """dQ/dt."""
        return self.jrhs(q, t) / self.grid.J

    __call__ = rhs
