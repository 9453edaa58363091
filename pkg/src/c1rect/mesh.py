"""Uniform n-by-n square meshes of the unit square and global DOF numbering.

Global numbering: vertex DOFs first (vertices ordered lexicographically by
(y, x)), then horizontal-edge DOFs, then vertical-edge DOFs (each edge group
lexicographic by (y, x) of the edge origin), then element-interior DOFs.
Shared entities use the same slot order from both adjacent elements because
edge DOFs are enumerated by increasing global coordinate, so the map is
orientation-free on axis-aligned meshes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .elements import ElementBasis
from .poly2d import DofKind, FloatArray

KIND_ORDER = (DofKind.VALUE, DofKind.DX, DofKind.DY, DofKind.DXY)

# entity codes for DofMap.entity_kind
VERTEX, H_EDGE, V_EDGE, INTERIOR = 0, 1, 2, 3


@dataclass(frozen=True)
class RectMesh:
    """Uniform n x n mesh of [0,1]^2 with implicit structured topology."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one subdivision per side")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def n_elements(self) -> int:
        return self.n * self.n

    @property
    def n_vertices(self) -> int:
        return (self.n + 1) ** 2

    @property
    def n_h_edges(self) -> int:
        return self.n * (self.n + 1)

    @property
    def n_v_edges(self) -> int:
        return self.n * (self.n + 1)

    @property
    def n_edges(self) -> int:
        return self.n_h_edges + self.n_v_edges

    # -- entity indexing (lexicographic by (y, x)) ----------------------

    def vertex_id(self, i: int, j: int) -> int:
        return j * (self.n + 1) + i

    def vertex_coords(self, v: int) -> tuple[float, float]:
        j, i = divmod(v, self.n + 1)
        return i * self.h, j * self.h

    def h_edge_id(self, i: int, j: int) -> int:
        """Horizontal edge from vertex (i, j) to (i+1, j); i < n, j <= n."""
        return j * self.n + i

    def v_edge_id(self, i: int, j: int) -> int:
        """Vertical edge from vertex (i, j) to (i, j+1); i <= n, j < n."""
        return j * (self.n + 1) + i

    def element_id(self, i: int, j: int) -> int:
        return j * self.n + i

    def element_index(self, e: int) -> tuple[int, int]:
        j, i = divmod(e, self.n)
        return i, j

    def element_corner(self, e: int) -> tuple[float, float]:
        i, j = self.element_index(e)
        return i * self.h, j * self.h

    def element_vertices(self, e: int) -> tuple[int, int, int, int]:
        """Vertex ids in local corner order (0,0), (1,0), (1,1), (0,1)."""
        i, j = self.element_index(e)
        return (self.vertex_id(i, j), self.vertex_id(i + 1, j),
                self.vertex_id(i + 1, j + 1), self.vertex_id(i, j + 1))

    def element_edges(self, e: int) -> tuple[tuple[int, int], ...]:
        """(kind, id) for the bottom, right, top, left edges."""
        i, j = self.element_index(e)
        return ((H_EDGE, self.h_edge_id(i, j)),
                (V_EDGE, self.v_edge_id(i + 1, j)),
                (H_EDGE, self.h_edge_id(i, j + 1)),
                (V_EDGE, self.v_edge_id(i, j)))

    # -- boundary classification ----------------------------------------

    def is_boundary_vertex(self, v: int) -> bool:
        j, i = divmod(v, self.n + 1)
        return i in (0, self.n) or j in (0, self.n)

    def is_boundary_h_edge(self, idx: int) -> bool:
        j = idx // self.n
        return j in (0, self.n)

    def is_boundary_v_edge(self, idx: int) -> bool:
        i = idx % (self.n + 1)
        return i in (0, self.n)

    def interior_h_edges(self) -> Iterator[tuple[int, int, int]]:
        """(edge id, element below, element above) for each interior h-edge."""
        for j in range(1, self.n):
            for i in range(self.n):
                yield (self.h_edge_id(i, j), self.element_id(i, j - 1),
                       self.element_id(i, j))

    def interior_v_edges(self) -> Iterator[tuple[int, int, int]]:
        """(edge id, element left, element right) for each interior v-edge."""
        for j in range(self.n):
            for i in range(1, self.n):
                yield (self.v_edge_id(i, j), self.element_id(i - 1, j),
                       self.element_id(i, j))

    def locate(self, x: float, y: float) -> int:
        """Element containing (x, y); boundary points break ties right/top."""
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise ValueError(f"point ({x}, {y}) outside the unit square")
        i = min(int(x * self.n), self.n - 1)
        j = min(int(y * self.n), self.n - 1)
        return self.element_id(i, j)


def build_mesh(level: int) -> RectMesh:
    """Mesh of refinement level >= 1: n = 2^(level-1) subdivisions per side."""
    if level < 1:
        raise ValueError("refinement level starts at 1")
    return RectMesh(n=2 ** (level - 1))


@dataclass(eq=False)
class DofMap:
    """Global DOF numbering for one (mesh, element) pair.

    points/kind_code record each global DOF's physical functional so nodal
    interpolation never needs to revisit elements; deriv_order carries the
    h-scaling exponent (0 value, 1 first derivative, 2 mixed).
    """

    total: int
    local_to_global: np.ndarray
    is_boundary: np.ndarray
    entity_kind: np.ndarray
    entity_id: np.ndarray
    kind_code: np.ndarray
    points: FloatArray
    deriv_order: np.ndarray

    @property
    def n_free(self) -> int:
        return int(self.total - np.count_nonzero(self.is_boundary))


def build_dof_map(mesh: RectMesh, basis: ElementBasis) -> DofMap:
    """Number DOFs globally with vertex/edge sharing; no boundary flags yet."""
    ne = basis.edge_dof_count
    ni = basis.interior_dof_count
    n_vert_dofs = 4 * mesh.n_vertices
    h_base = n_vert_dofs
    v_base = h_base + ne * mesh.n_h_edges
    i_base = v_base + ne * mesh.n_v_edges
    total = i_base + ni * mesh.n_elements

    for v in range(4):
        if len(basis.vertex_dofs(v)) != 4:
            raise ValueError("element must carry exactly 4 DOFs per vertex")

    l2g = np.empty((mesh.n_elements, basis.dim), dtype=np.int64)
    entity_kind = np.empty(total, dtype=np.int8)
    entity_id = np.empty(total, dtype=np.int64)
    kind_code = np.empty(total, dtype=np.int8)
    points = np.empty((total, 2))
    deriv_order = np.empty(total, dtype=np.int8)
    seen = np.zeros(total, dtype=bool)

    edge_bases = {H_EDGE: h_base, V_EDGE: v_base}
    edge_entity = {H_EDGE: H_EDGE, V_EDGE: V_EDGE}

    for e in range(mesh.n_elements):
        x0, y0 = mesh.element_corner(e)
        verts = mesh.element_vertices(e)
        edges = mesh.element_edges(e)
        for n, (dof, role) in enumerate(zip(basis.dofs, basis.roles)):
            if role.entity == "vertex":
                g = 4 * verts[role.index] + role.slot
                ek, eid = VERTEX, verts[role.index]
            elif role.entity == "edge":
                kind, idx = edges[role.index]
                g = edge_bases[kind] + ne * idx + role.slot
                ek, eid = edge_entity[kind], idx
            else:
                g = i_base + ni * e + role.slot
                ek, eid = INTERIOR, e
            l2g[e, n] = g
            if not seen[g]:
                seen[g] = True
                entity_kind[g] = ek
                entity_id[g] = eid
                kind_code[g] = KIND_ORDER.index(dof.kind)
                points[g] = (x0 + mesh.h * dof.point[0], y0 + mesh.h * dof.point[1])
                deriv_order[g] = dof.kind.total_order

    assert seen.all(), "every global DOF must be touched by some element"
    return DofMap(
        total=total,
        local_to_global=l2g,
        is_boundary=np.zeros(total, dtype=bool),
        entity_kind=entity_kind,
        entity_id=entity_id,
        kind_code=kind_code,
        points=points,
        deriv_order=deriv_order,
    )


def clamped_flags(mesh: RectMesh, dof_map: DofMap) -> DofMap:
    """Flag every DOF owned by a boundary vertex or boundary edge.

    u = du/dn = 0 along the boundary forces all four vertex DOFs there
    (the mixed derivative is the tangential derivative of the normal one)
    and all values and normal derivatives on boundary edges.
    """
    flags = np.zeros(dof_map.total, dtype=bool)
    for g in range(dof_map.total):
        ek, eid = dof_map.entity_kind[g], int(dof_map.entity_id[g])
        if ek == VERTEX:
            flags[g] = mesh.is_boundary_vertex(eid)
        elif ek == H_EDGE:
            flags[g] = mesh.is_boundary_h_edge(eid)
        elif ek == V_EDGE:
            flags[g] = mesh.is_boundary_v_edge(eid)
    return replace(dof_map, is_boundary=flags)
