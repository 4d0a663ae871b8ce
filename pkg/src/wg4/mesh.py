"""Structured triangular partitions of axis-aligned rectangles.

Each of the n x n sub-squares is split into two triangles by its
negative-slope diagonal (top-left corner to bottom-right corner).
Vertex, element and edge indexing is row-major and deterministic so
that everything assembled on top of a mesh is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Edge",
    "Element",
    "Mesh",
    "build_structured_mesh",
    "classify_boundary",
    "mesh_to_csv",
]

Rectangle = tuple[float, float, float, float]


@dataclass(frozen=True)
class Edge:
    """Single mesh edge with a fixed global orientation.

    ``p1 -> p2`` fixes the arc-length parameterization that both adjacent
    elements share.  The stored unit normal points outward for boundary
    edges; for interior edges it points from the lower-indexed adjacent
    element into the higher-indexed one, so the two adjacent elements see
    the conormal-trace unknowns with opposite signs.
    """

    vertices: tuple[int, int]
    p1: np.ndarray
    p2: np.ndarray
    midpoint: np.ndarray
    normal: np.ndarray
    length: float
    boundary: bool
    elements: tuple[int, ...]


@dataclass(frozen=True)
class Element:
    """Triangle with counterclockwise vertices.

    ``edges[k]`` joins local vertices ``k`` and ``(k + 1) % 3``.
    ``signs[k]`` is +1 when the element-outward normal on that edge equals
    the edge's stored global normal, -1 when it is the reverse.
    """

    vertices: tuple[int, int, int]
    edges: tuple[int, int, int]
    signs: tuple[int, int, int]
    area: float
    diameter: float
    centroid: np.ndarray
    normals: np.ndarray  # (3, 2) outward unit normals, one row per local edge


@dataclass(frozen=True)
class Mesh:
    domain: Rectangle
    n: int
    vertices: np.ndarray
    elements: tuple[Element, ...]
    edges: tuple[Edge, ...]

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def build_structured_mesh(domain: Rectangle, n: int) -> Mesh:
    """Triangulate ``domain`` into 2*n^2 triangles.

    The rectangle is divided into n x n congruent sub-squares and every
    sub-square is cut along the diagonal of negative slope, giving a
    lower-left and an upper-right triangle.
    """
    x0, y0, x1, y1 = (float(v) for v in domain)
    if n < 1:
        raise ValueError(f"subdivision count must be >= 1, got {n}")
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate rectangle {domain!r}")

    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    vertices = np.empty(((n + 1) * (n + 1), 2))
    for j in range(n + 1):
        for i in range(n + 1):
            vertices[j * (n + 1) + i] = (xs[i], ys[j])

    def vid(i: int, j: int) -> int:
        return j * (n + 1) + i

    # Element connectivity, counterclockwise.  The negative-slope diagonal
    # joins the top-left and bottom-right corners of each sub-square.
    conn: list[tuple[int, int, int]] = []
    for j in range(n):
        for i in range(n):
            bl, br = vid(i, j), vid(i + 1, j)
            tl, tr = vid(i, j + 1), vid(i + 1, j + 1)
            conn.append((bl, br, tl))  # lower-left triangle
            conn.append((br, tr, tl))  # upper-right triangle

    # Edge table keyed on the sorted vertex pair; adjacency recorded in
    # element order so interior edges know their lower-indexed side.
    edge_ids: dict[tuple[int, int], int] = {}
    edge_elements: list[list[int]] = []
    elem_edges: list[tuple[int, int, int]] = []
    for ei, verts in enumerate(conn):
        ids = []
        for k in range(3):
            key = tuple(sorted((verts[k], verts[(k + 1) % 3])))
            if key not in edge_ids:
                edge_ids[key] = len(edge_ids)
                edge_elements.append([])
            eid = edge_ids[key]
            edge_elements[eid].append(ei)
            ids.append(eid)
        elem_edges.append(tuple(ids))

    def outward_normals(verts: tuple[int, int, int]) -> np.ndarray:
        pts = vertices[list(verts)]
        normals = np.empty((3, 2))
        for k in range(3):
            d = pts[(k + 1) % 3] - pts[k]
            normals[k] = (d[1], -d[0])
        return normals / np.linalg.norm(normals, axis=1, keepdims=True)

    # Global edge normals: outward for boundary edges, otherwise the
    # outward normal of the lower-indexed adjacent element.
    normals_by_elem = [outward_normals(v) for v in conn]
    edges: list[Edge] = []
    for key, eid in edge_ids.items():
        adj = tuple(sorted(edge_elements[eid]))
        owner = adj[0]
        local = elem_edges[owner].index(eid)
        p1, p2 = vertices[key[0]], vertices[key[1]]
        edges.append(
            Edge(
                vertices=key,
                p1=p1,
                p2=p2,
                midpoint=0.5 * (p1 + p2),
                normal=normals_by_elem[owner][local],
                length=float(np.linalg.norm(p2 - p1)),
                boundary=len(adj) == 1,
                elements=adj,
            )
        )

    elements: list[Element] = []
    for ei, verts in enumerate(conn):
        pts = vertices[list(verts)]
        d01, d02 = pts[1] - pts[0], pts[2] - pts[0]
        area = 0.5 * float(d01[0] * d02[1] - d01[1] * d02[0])
        if area <= 0.0:
            raise ValueError(f"element {ei} has non-positive area {area}")
        sides = [np.linalg.norm(pts[(k + 1) % 3] - pts[k]) for k in range(3)]
        signs = tuple(
            1 if float(normals_by_elem[ei][k] @ edges[elem_edges[ei][k]].normal) > 0.0 else -1
            for k in range(3)
        )
        elements.append(
            Element(
                vertices=verts,
                edges=elem_edges[ei],
                signs=signs,
                area=area,
                diameter=float(max(sides)),
                centroid=pts.mean(axis=0),
                normals=normals_by_elem[ei],
            )
        )

    mesh = Mesh(
        domain=(x0, y0, x1, y1),
        n=n,
        vertices=vertices,
        elements=tuple(elements),
        edges=tuple(edges),
    )
    _validate(mesh)
    return mesh


def _validate(mesh: Mesh) -> None:
    n = mesh.n
    assert mesh.n_elements == 2 * n * n
    assert mesh.n_edges == 3 * n * n + 2 * n
    assert len(mesh.vertices) == (n + 1) * (n + 1)
    for elem in mesh.elements:
        for k in range(3):
            edge = mesh.edges[elem.edges[k]]
            # The outward normal must be exactly +-1 times the stored one.
            if not np.allclose(elem.normals[k], elem.signs[k] * edge.normal, atol=1e-14):
                raise AssertionError("edge orientation sign is inconsistent")
    for edge in mesh.edges:
        assert len(edge.elements) in (1, 2)
        assert edge.boundary == (len(edge.elements) == 1)


def classify_boundary(mesh: Mesh) -> np.ndarray:
    """Boolean flag per edge; True when the edge lies on the domain boundary.

    Also cross-checks the adjacency-derived flags against the rectangle
    geometry (every boundary edge must sit on one of the four sides).
    """
    x0, y0, x1, y1 = mesh.domain
    flags = np.array([e.boundary for e in mesh.edges], dtype=bool)
    for edge, flag in zip(mesh.edges, flags):
        if not flag:
            continue
        on_side = any(
            abs(edge.p1[axis] - bound) <= 1e-12 and abs(edge.p2[axis] - bound) <= 1e-12
            for axis, bound in ((0, x0), (0, x1), (1, y0), (1, y1))
        )
        if not on_side:
            raise AssertionError(f"edge {edge.vertices} flagged boundary but off the rectangle")
    return flags


def mesh_to_csv(mesh: Mesh) -> str:
    """Plain-text dump with ``# vertices``, ``# elements``, ``# edges`` sections."""

    def fmt(x: float) -> str:
        return f"{x:.5e}"

    lines = ["# vertices"]
    for i, (x, y) in enumerate(mesh.vertices):
        lines.append(f"{i},{fmt(x)},{fmt(y)}")
    lines.append("# elements")
    for i, el in enumerate(mesh.elements):
        lines.append(
            ",".join(
                [str(i)]
                + [str(v) for v in el.vertices]
                + [str(e) for e in el.edges]
                + [str(s) for s in el.signs]
                + [fmt(el.area), fmt(el.diameter)]
            )
        )
    lines.append("# edges")
    for i, ed in enumerate(mesh.edges):
        adj = list(ed.elements) + [-1] * (2 - len(ed.elements))
        lines.append(
            ",".join(
                [str(i), str(ed.vertices[0]), str(ed.vertices[1])]
                + [fmt(ed.normal[0]), fmt(ed.normal[1]), fmt(ed.length)]
                + [str(int(ed.boundary))]
                + [str(a) for a in adj]
            )
        )
    return "\n".join(lines) + "\n"
