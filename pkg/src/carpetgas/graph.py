"""Level-n approximation graphs of a carpet and their Laplacians.

Vertices are the level-n cells (lexicographic address order); edges join
cells sharing a (d-1)-face.  Diagonal contact is excluded by default but the
alternative neighborhood is available behind ``adjacency="vertex"``.

Laplacians are unnormalized (D - A).  The Dirichlet variant deletes the
rows/columns of cells touching the outer boundary of the unit cube; the
overall spectral scale is removed downstream by lambda_1 normalization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DomainError
from .geometry import CarpetSpec, refine

_ADJACENCY = ("face", "vertex")


@dataclass
class ApproxGraph:
    spec: CarpetSpec
    level: int
    coords: np.ndarray  # (n_vertices, d) integer grid coordinates in {0..l^n-1}
    edges: np.ndarray  # (n_edges, 2) vertex indices, i < j, lexicographic
    boundary: np.ndarray  # sorted indices of cells touching the outer boundary
    adjacency: str = "face"

    @property
    def n_vertices(self) -> int:
        return self.coords.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        np.add.at(deg, self.edges[:, 0], 1)
        np.add.at(deg, self.edges[:, 1], 1)
        return deg


def build_graph(spec: CarpetSpec, level: int, adjacency: str = "face") -> ApproxGraph:
    """Build the level-n cell graph; vertex order matches refine(spec, level)."""
    if adjacency not in _ADJACENCY:
        raise DomainError(f"adjacency must be one of {_ADJACENCY}, got {adjacency!r}")
    if level < 1:
        raise DomainError(f"graph needs level >= 1, got {level}")
    addresses = refine(spec, level)
    d, l = spec.d, spec.l
    n = len(addresses)

    coords = np.empty((n, d), dtype=np.int64)
    scale = np.array([l ** (level - 1 - k) for k in range(level)], dtype=np.int64)
    for v, addr in enumerate(addresses):
        digits = np.asarray(addr, dtype=np.int64)  # (level, d)
        coords[v] = scale @ digits

    index = {tuple(row): v for v, row in enumerate(coords.tolist())}
    if adjacency == "face":
        offsets = [
            tuple(int(i == ax) for i in range(d)) for ax in range(d)
        ]  # +e_ax only; each edge found once
    else:
        offsets = [
            offs
            for offs in np.ndindex(*(3,) * d)
            if any(o != 1 for o in offs)
        ]
        offsets = [tuple(o - 1 for o in offs) for offs in offsets]
        offsets = [o for o in offsets if o > tuple(0 for _ in range(d))]

    edges = []
    for v, row in enumerate(coords.tolist()):
        for off in offsets:
            nb = index.get(tuple(c + o for c, o in zip(row, off)))
            if nb is not None:
                edges.append((v, nb) if v < nb else (nb, v))
    edges_arr = (
        np.unique(np.asarray(sorted(set(edges)), dtype=np.int64), axis=0)
        if edges
        else np.empty((0, 2), dtype=np.int64)
    )

    top = l**level - 1
    on_boundary = np.any((coords == 0) | (coords == top), axis=1)
    boundary = np.flatnonzero(on_boundary)
    return ApproxGraph(spec, level, coords, edges_arr, boundary, adjacency)


def laplacian(graph: ApproxGraph, bc: str = "neumann") -> sp.csr_matrix:
    """Combinatorial Laplacian; 'dirichlet' deletes outer-boundary vertices.

    Raises DomainError when the Dirichlet deletion empties the matrix (all
    cells touch the boundary, e.g. SC(3,1) at level 1).
    """
    n = graph.n_vertices
    rows = np.concatenate([graph.edges[:, 0], graph.edges[:, 1]])
    cols = np.concatenate([graph.edges[:, 1], graph.edges[:, 0]])
    data = np.full(rows.shape[0], -1.0)
    adj = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    lap = sp.diags(graph.degrees().astype(float)) + adj
    if bc == "neumann":
        return lap.tocsr()
    if bc == "dirichlet":
        keep = np.setdiff1d(np.arange(n), graph.boundary)
        if keep.size == 0:
            raise DomainError(
                "Dirichlet deletion removed every vertex; spectrum is empty "
                f"(level {graph.level} too coarse)"
            )
        return lap[keep][:, keep].tocsr()
    raise DomainError(f"bc must be 'neumann' or 'dirichlet', got {bc!r}")


def interior_vertices(graph: ApproxGraph) -> np.ndarray:
    return np.setdiff1d(np.arange(graph.n_vertices), graph.boundary)


def degree_stats(graph: ApproxGraph) -> dict:
    deg = graph.degrees()
    counts = {int(v): int(c) for v, c in zip(*np.unique(deg, return_counts=True))}
    return {
        "min": int(deg.min()),
        "max": int(deg.max()),
        "mean": float(deg.mean()),
        "histogram": counts,
    }


def export_graph(graph: ApproxGraph, edges_path, meta_path, bc: str | None = None) -> None:
    """Edge list (one 'i j' per line) plus a JSON metadata header."""
    with open(edges_path, "w", encoding="utf-8") as fh:
        for i, j in graph.edges.tolist():
            fh.write(f"{i} {j}\n")
    meta = {
        "spec_hash": graph.spec.spec_hash(),
        "level": graph.level,
        "bc": bc,
        "adjacency": graph.adjacency,
        "n_vertices": graph.n_vertices,
        "n_edges": graph.n_edges,
        "n_boundary": int(graph.boundary.size),
        "degrees": degree_stats(graph),
    }
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
