"""Error norms of a discrete solution against a projected exact solution.

All norms act on the difference e = P(u) - u_h between the projection of
the exact solution into the discrete space and the computed solution:

* ``l2_e0``: L2 norm of the interior component over the domain,
* ``tbar``: the discrete energy norm (square root of the assembled
  quadratic form),
* ``eb_edge`` / ``eg_edge``: edge-length-weighted L2 norms of the trace
  and flux-trace components, (sum_T h_T ||.||_dT^2)^(1/2), counted once
  per element-edge incidence.

Boundary blocks of e are set to zero before any norm is taken: boundary
data enters the scheme through the same projections, so e lies in the
zero-trace subspace by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import assembly, poly, weakops
from .assembly import CoefficientField, ProblemSpec
from .mesh import Mesh
from .weakops import DofMap, WeakFunction

__all__ = ["ErrorReport", "error_report", "convergence_orders", "orders_from_values"]

NORM_FIELDS = ("l2_e0", "tbar", "eb_edge", "eg_edge")


@dataclass(frozen=True)
class ErrorReport:
    n: int
    h: float
    l2_e0: float
    tbar: float
    eb_edge: float
    eg_edge: float

    def __post_init__(self):
        for name in NORM_FIELDS:
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be finite and nonnegative, got {value}")


def error_report(mesh: Mesh, spec: ProblemSpec, u_h: WeakFunction) -> ErrorReport:
    if not spec.has_exact:
        raise ValueError("error_report requires an exact solution on the problem spec")
    dofmap = DofMap.for_mesh(mesh)
    projected = weakops.project_Qh(mesh, spec.exact_u, spec.exact_grad, spec.coeff.kappa)
    e = projected.coeffs - u_h.coeffs
    e[dofmap.boundary_mask(mesh)] = 0.0

    l2_sq = 0.0
    eb_sq = 0.0
    eg_sq = 0.0
    for i, elem in enumerate(mesh.elements):
        tri = poly.make_triangle(mesh.vertices[list(elem.vertices)])
        d0 = e[dofmap.element_block(i)]
        mass0 = poly.element_mass_matrix(tri, weakops.INTERIOR_DEGREE)
        l2_sq += float(d0 @ mass0 @ d0)
        h_t = poly.mesh_size(tri)
        for eid in elem.edges:
            edge = mesh.edges[eid]
            emass = poly.edge_mass_matrix(edge, weakops.EDGE_DEGREE)
            db = e[dofmap.edge_vb(eid)]
            dg = e[dofmap.edge_vg(eid)]
            eb_sq += h_t * float(db @ emass @ db)
            eg_sq += h_t * float(dg @ emass @ dg)

    return ErrorReport(
        n=mesh.n,
        h=1.0 / mesh.n,
        l2_e0=math.sqrt(max(l2_sq, 0.0)),
        tbar=assembly.triple_bar_norm(mesh, spec.coeff, e),
        eb_edge=math.sqrt(max(eb_sq, 0.0)),
        eg_edge=math.sqrt(max(eg_sq, 0.0)),
    )


def orders_from_values(values: Sequence[float]) -> list[float]:
    """log2 ratios of successive errors over halving mesh sizes.

    A zero denominator (the finer error underflows to exactly zero) is
    reported as ``math.inf``, printed downstream as "exact".
    """
    orders = []
    for coarse, fine in zip(values, values[1:]):
        if fine == 0.0:
            orders.append(math.inf)
        elif coarse == 0.0:
            orders.append(-math.inf)
        else:
            orders.append(math.log2(coarse / fine))
    return orders


def convergence_orders(reports: Sequence[ErrorReport]) -> dict[str, list[float]]:
    """Per-norm convergence orders between consecutive reports.

    Reports must be sorted by decreasing h with successive ratio 2.
    """
    for a, b in zip(reports, reports[1:]):
        if b.n != 2 * a.n:
            raise ValueError(f"levels must double: got n={a.n} followed by n={b.n}")
    return {
        name: orders_from_values([getattr(r, name) for r in reports]) for name in NORM_FIELDS
    }
