"""Discrete weak operators and local L2 projections.

A discrete unknown on one element is a triple {v0, vb, vg}: an interior
polynomial v0 in P2(T), an edge trace vb in P1(e) per edge, and an edge
conormal-flux trace vg in P1(e) per edge.  vg coefficients are stored
with respect to the edge's *global* normal; the element-outward trace on
edge e is sigma_T(e) * vg, which makes the flux unknown single-valued
per edge while the two adjacent elements see opposite signs.

Two element-local operators act on these triples:

* the weak second-order elliptic operator, a constant per element
  defined by duality against P0(T); after integration by parts only the
  boundary integral of the outward flux trace survives:
      (Ew v) * |T| = sum_e sigma_T(e) * int_e vg ds
* the weak gradient, a vector polynomial in [P1(T)]^2 defined by
      (grad_w v, psi)_T = (grad v0, psi)_T - <v0 - vb, psi . n>_dT
  for every psi in [P1(T)]^2, with n the element-outward unit normal.

Both are linear in the 18 local coefficients and are exposed both as
operator matrices (for assembly) and as direct evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import poly
from .mesh import Mesh
from .poly import EdgeBasis, ElementBasis, Triangle

__all__ = [
    "INTERIOR_DEGREE",
    "EDGE_DEGREE",
    "N_LOCAL",
    "EdgeView",
    "ElementGeometry",
    "DofMap",
    "LocalWeakFunction",
    "WeakFunction",
    "element_geometry",
    "standalone_element",
    "weak_laplacian_matrix",
    "weak_gradient_matrix",
    "weak_laplacian_kappa",
    "weak_gradient",
    "project_Q0",
    "project_Qb",
    "project_Qg",
    "project_calQh",
    "project_calQ1",
    "project_Qh",
]

INTERIOR_DEGREE = 2  # v0 in P2(T) -> 6 coefficients
EDGE_DEGREE = 1  # vb, vg in P1(e) -> 2 coefficients each
GRADIENT_DEGREE = 1  # grad_w lands in [P1(T)]^2
N_INTERIOR = 6
N_PER_EDGE = 2 * (EDGE_DEGREE + 1)
N_LOCAL = N_INTERIOR + 3 * N_PER_EDGE  # 18

_EDGE_BASIS = EdgeBasis(EDGE_DEGREE)


def _vb_slice(k: int) -> slice:
    return slice(N_INTERIOR + 4 * k, N_INTERIOR + 4 * k + 2)


def _vg_slice(k: int) -> slice:
    return slice(N_INTERIOR + 4 * k + 2, N_INTERIOR + 4 * k + 4)


@dataclass(frozen=True)
class EdgeView:
    """One edge as seen from an element.

    ``p1 -> p2`` is the edge's global parameterization (shared by both
    sides), ``normal`` the element-outward unit normal and ``sigma`` the
    sign relating the stored vg coefficients to the outward trace.
    """

    p1: np.ndarray
    p2: np.ndarray
    length: float
    midpoint: np.ndarray
    normal: np.ndarray
    sigma: int

    def quad_points(self, rule: poly.QuadratureRule):
        """Physical points, weights and arc-length parameters on this edge."""
        t = rule.points
        pts = self.midpoint + t[:, None] * (self.p2 - self.p1)
        return pts, rule.weights * self.length, t


@dataclass(frozen=True)
class ElementGeometry:
    tri: Triangle
    edges: tuple[EdgeView, EdgeView, EdgeView]


def element_geometry(mesh: Mesh, index: int) -> ElementGeometry:
    elem = mesh.elements[index]
    tri = poly.make_triangle(mesh.vertices[list(elem.vertices)])
    views = []
    for k in range(3):
        edge = mesh.edges[elem.edges[k]]
        views.append(
            EdgeView(
                p1=edge.p1,
                p2=edge.p2,
                length=edge.length,
                midpoint=edge.midpoint,
                normal=elem.normals[k],
                sigma=elem.signs[k],
            )
        )
    return ElementGeometry(tri=tri, edges=tuple(views))


def standalone_element(vertices: np.ndarray) -> ElementGeometry:
    """Geometry for a single free-standing triangle (tests, local studies).

    Edges are parameterized in local counterclockwise order and all sigma
    signs are +1, i.e. global normals coincide with outward normals.
    """
    tri = poly.make_triangle(vertices)
    views = []
    for k in range(3):
        p1, p2 = tri.vertices[k], tri.vertices[(k + 1) % 3]
        d = p2 - p1
        length = float(np.linalg.norm(d))
        views.append(
            EdgeView(
                p1=p1,
                p2=p2,
                length=length,
                midpoint=0.5 * (p1 + p2),
                normal=np.array([d[1], -d[0]]) / length,
                sigma=1,
            )
        )
    return ElementGeometry(tri=tri, edges=tuple(views))


@dataclass
class LocalWeakFunction:
    """Coefficients of one element-local triple {v0, vb, vg}.

    vg rows are stored in the global-normal convention of each edge.
    """

    c0: np.ndarray  # (6,)
    cb: np.ndarray  # (3, 2)
    cg: np.ndarray  # (3, 2)

    @classmethod
    def zeros(cls) -> "LocalWeakFunction":
        return cls(np.zeros(N_INTERIOR), np.zeros((3, 2)), np.zeros((3, 2)))

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "LocalWeakFunction":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (N_LOCAL,):
            raise ValueError(f"expected length-{N_LOCAL} vector, got {vec.shape}")
        cb = np.stack([vec[_vb_slice(k)] for k in range(3)])
        cg = np.stack([vec[_vg_slice(k)] for k in range(3)])
        return cls(c0=vec[:N_INTERIOR].copy(), cb=cb, cg=cg)

    def to_vector(self) -> np.ndarray:
        vec = np.empty(N_LOCAL)
        vec[:N_INTERIOR] = self.c0
        for k in range(3):
            vec[_vb_slice(k)] = self.cb[k]
            vec[_vg_slice(k)] = self.cg[k]
        return vec


@dataclass(frozen=True)
class DofMap:
    """Global layout: per-element blocks of 6, then per-edge blocks of 4.

    Edge block e holds [vb_0, vb_1, vg_0, vg_1] at offset 6*E + 4*e.
    """

    n_elements: int
    n_edges: int

    @classmethod
    def for_mesh(cls, mesh: Mesh) -> "DofMap":
        return cls(n_elements=mesh.n_elements, n_edges=mesh.n_edges)

    @property
    def size(self) -> int:
        return N_INTERIOR * self.n_elements + 4 * self.n_edges

    def element_block(self, i: int) -> np.ndarray:
        return np.arange(N_INTERIOR * i, N_INTERIOR * (i + 1))

    def edge_vb(self, e: int) -> np.ndarray:
        base = N_INTERIOR * self.n_elements + 4 * e
        return np.arange(base, base + 2)

    def edge_vg(self, e: int) -> np.ndarray:
        base = N_INTERIOR * self.n_elements + 4 * e
        return np.arange(base + 2, base + 4)

    def local_dofs_for_index(self, mesh: Mesh, index: int) -> np.ndarray:
        """Global indices of the 18 local dofs, in LocalWeakFunction order."""
        elem = mesh.elements[index]
        idx = np.empty(N_LOCAL, dtype=np.int64)
        idx[:N_INTERIOR] = self.element_block(index)
        for k in range(3):
            idx[_vb_slice(k)] = self.edge_vb(elem.edges[k])
            idx[_vg_slice(k)] = self.edge_vg(elem.edges[k])
        return idx

    def boundary_mask(self, mesh: Mesh) -> np.ndarray:
        """True for every vb/vg dof living on a boundary edge."""
        mask = np.zeros(self.size, dtype=bool)
        for e, edge in enumerate(mesh.edges):
            if edge.boundary:
                mask[self.edge_vb(e)] = True
                mask[self.edge_vg(e)] = True
        return mask


@dataclass
class WeakFunction:
    """Global coefficient vector over a DofMap."""

    coeffs: np.ndarray
    dofmap: DofMap

    @classmethod
    def zeros(cls, dofmap: DofMap) -> "WeakFunction":
        return cls(coeffs=np.zeros(dofmap.size), dofmap=dofmap)

    def local(self, mesh: Mesh, index: int) -> LocalWeakFunction:
        idx = self.dofmap.local_dofs_for_index(mesh, index)
        return LocalWeakFunction.from_vector(self.coeffs[idx])

    def scatter_local(self, mesh: Mesh, index: int, local: LocalWeakFunction) -> None:
        idx = self.dofmap.local_dofs_for_index(mesh, index)
        self.coeffs[idx] = local.to_vector()


# ---------------------------------------------------------------------------
# weak operators
# ---------------------------------------------------------------------------


def weak_laplacian_matrix(geom: ElementGeometry) -> np.ndarray:
    """Row vector r (length 18) with Ew v = r @ coeffs, Ew v in P0(T).

    Only the flux traces enter: testing against constants kills both the
    interior term and the vb term, leaving the boundary integral of the
    outward flux trace divided by |T|.
    """
    rule = poly.gauss_segment_quadrature(poly.DEFAULT_SEGMENT_POINTS)
    row = np.zeros(N_LOCAL)
    for k, view in enumerate(geom.edges):
        _, w, t = view.quad_points(rule)
        row[_vg_slice(k)] = view.sigma * (w @ _EDGE_BASIS.eval(t))
    return row / geom.tri.area


def weak_gradient_matrix(geom: ElementGeometry) -> np.ndarray:
    """Matrix G (6 x 18) with grad_w v = G @ coeffs in [P1(T)]^2.

    Coefficient ordering: x-component coefficients (3) then y-component
    coefficients (3), both in the scaled P1 monomial basis.
    """
    tri = geom.tri
    basis0 = ElementBasis.for_triangle(tri, INTERIOR_DEGREE)
    basis1 = ElementBasis.for_triangle(tri, GRADIENT_DEGREE)
    mass_vec = poly.element_mass_matrix(tri, GRADIENT_DEGREE, weight=np.eye(2))

    rhs = np.zeros((2 * basis1.dim, N_LOCAL))
    tri_rule = poly.triangle_quadrature(poly.DEFAULT_TRIANGLE_DEGREE)
    pts, w = poly.map_to_triangle(tri_rule, tri)
    grads0 = basis0.grad(pts)  # (m, 6, 2)
    vals1 = basis1.eval(pts)  # (m, 3)
    # (grad v0, psi)_T
    rhs[: basis1.dim, :N_INTERIOR] = np.einsum("q,qa,qi->ai", w, vals1, grads0[:, :, 0])
    rhs[basis1.dim :, :N_INTERIOR] = np.einsum("q,qa,qi->ai", w, vals1, grads0[:, :, 1])

    edge_rule = poly.gauss_segment_quadrature(poly.DEFAULT_SEGMENT_POINTS)
    for k, view in enumerate(geom.edges):
        pts_e, w_e, t = view.quad_points(edge_rule)
        trace0 = basis0.eval(pts_e)  # (m, 6)
        trace1 = basis1.eval(pts_e)  # (m, 3)
        trace_b = _EDGE_BASIS.eval(t)  # (m, 2)
        for comp in range(2):
            nc = view.normal[comp]
            block = slice(comp * basis1.dim, (comp + 1) * basis1.dim)
            # -<v0 - vb, psi . n>_dT
            rhs[block, :N_INTERIOR] -= nc * np.einsum("q,qa,qi->ai", w_e, trace1, trace0)
            rhs[block, _vb_slice(k)] += nc * np.einsum("q,qa,qj->aj", w_e, trace1, trace_b)
    return np.linalg.solve(mass_vec, rhs)


def weak_laplacian_kappa(geom: ElementGeometry, local: LocalWeakFunction) -> float:
    """Weak second-order elliptic operator of one local triple (a constant)."""
    return float(weak_laplacian_matrix(geom) @ local.to_vector())


def weak_gradient(geom: ElementGeometry, local: LocalWeakFunction) -> np.ndarray:
    """Weak gradient coefficients (6,) of one local triple."""
    return weak_gradient_matrix(geom) @ local.to_vector()


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------


def project_Q0(geom_or_tri, u, degree: int = INTERIOR_DEGREE) -> np.ndarray:
    """L2 projection of ``u`` onto P_degree(T); returns basis coefficients."""
    tri = geom_or_tri.tri if isinstance(geom_or_tri, ElementGeometry) else geom_or_tri
    basis = ElementBasis.for_triangle(tri, degree)
    rule = poly.triangle_quadrature(poly.DEFAULT_TRIANGLE_DEGREE)
    pts, w = poly.map_to_triangle(rule, tri)
    vals = basis.eval(pts)
    rhs = vals.T @ (w * u(pts[:, 0], pts[:, 1]))
    return np.linalg.solve(poly.element_mass_matrix(tri, degree), rhs)


def _project_edge(edge, u) -> np.ndarray:
    midpoint = getattr(edge, "midpoint")
    p1, p2, length = edge.p1, edge.p2, edge.length
    rule = poly.gauss_segment_quadrature(poly.DEFAULT_SEGMENT_POINTS)
    t = rule.points
    pts = midpoint + t[:, None] * (p2 - p1)
    w = rule.weights * length
    vals = _EDGE_BASIS.eval(t)
    rhs = vals.T @ (w * u(pts[:, 0], pts[:, 1]))
    return np.linalg.solve(poly.edge_mass_matrix(length, EDGE_DEGREE), rhs)


def project_Qb(edge, u) -> np.ndarray:
    """L2 projection of a trace function onto P1(e)."""
    return _project_edge(edge, u)


def project_Qg(edge, g) -> np.ndarray:
    """L2 projection of a conormal-flux function onto P1(e).

    ``g`` is the scalar flux along the edge's own (global) normal.
    """
    return _project_edge(edge, g)


def project_calQh(geom_or_tri, u) -> float:
    """L2 projection onto P0(T): the mean value of ``u`` over the element."""
    tri = geom_or_tri.tri if isinstance(geom_or_tri, ElementGeometry) else geom_or_tri
    rule = poly.triangle_quadrature(poly.DEFAULT_TRIANGLE_DEGREE)
    pts, w = poly.map_to_triangle(rule, tri)
    return float(w @ u(pts[:, 0], pts[:, 1])) / tri.area


def project_calQ1(geom_or_tri, field) -> np.ndarray:
    """Componentwise L2 projection of a vector field onto [P1(T)]^2.

    ``field(x, y)`` must return a pair (fx, fy) of arrays.  Coefficients
    come back in the weak-gradient ordering (x block then y block).
    """
    tri = geom_or_tri.tri if isinstance(geom_or_tri, ElementGeometry) else geom_or_tri
    basis = ElementBasis.for_triangle(tri, GRADIENT_DEGREE)
    rule = poly.triangle_quadrature(poly.DEFAULT_TRIANGLE_DEGREE)
    pts, w = poly.map_to_triangle(rule, tri)
    vals = basis.eval(pts)
    fx, fy = field(pts[:, 0], pts[:, 1])
    mass = poly.element_mass_matrix(tri, GRADIENT_DEGREE)
    cx = np.linalg.solve(mass, vals.T @ (w * fx))
    cy = np.linalg.solve(mass, vals.T @ (w * fy))
    return np.concatenate([cx, cy])


def project_Qh(mesh: Mesh, u, grad_u, kappa) -> WeakFunction:
    """Project a smooth function into the weak finite element space.

    Per element the interior block is the P2 projection of ``u``; per edge
    the vb block projects the trace of ``u`` and the vg block projects the
    conormal flux kappa grad(u) . n_e along the edge's global normal.

    ``kappa`` is either a single 2x2 matrix or an array (n_elements, 2, 2);
    on interior edges where kappa jumps, the flux uses the coefficient of
    the lower-indexed adjacent element (the side the global normal points
    from).  ``grad_u(x, y)`` returns a pair of arrays.
    """
    kappa = np.asarray(kappa, dtype=float)
    per_element = kappa.ndim == 3

    dofmap = DofMap.for_mesh(mesh)
    out = WeakFunction.zeros(dofmap)
    for i in range(mesh.n_elements):
        tri = poly.make_triangle(mesh.vertices[list(mesh.elements[i].vertices)])
        out.coeffs[dofmap.element_block(i)] = project_Q0(tri, u)
    for e, edge in enumerate(mesh.edges):
        k_e = kappa[edge.elements[0]] if per_element else kappa
        normal = edge.normal

        def flux(x, y):
            gx, gy = grad_u(x, y)
            return normal[0] * (k_e[0, 0] * gx + k_e[0, 1] * gy) + normal[1] * (
                k_e[1, 0] * gx + k_e[1, 1] * gy
            )

        out.coeffs[dofmap.edge_vb(e)] = project_Qb(edge, u)
        out.coeffs[dofmap.edge_vg(e)] = project_Qg(edge, flux)
    return out
