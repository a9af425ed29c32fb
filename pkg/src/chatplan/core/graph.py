"""Undirected room graph with degree and shortest-path-distance matrices."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .types import RoomsDocument, ValidationError


@dataclass(frozen=True)
class RoomGraph:
    """Adjacency, degree and all-pairs hop counts over a rooms document.

    ``spd[i, j]`` is the unweighted shortest-path length in hops;
    unreachable pairs carry the sentinel value ``n`` (the room count),
    which keeps the matrix bounded for bucketed bias lookups.
    """

    n: int
    adjacency: np.ndarray  # (n, n) int8, symmetric, zero diagonal
    degree: np.ndarray  # (n,) int64
    spd: np.ndarray  # (n, n) int64

    def __post_init__(self) -> None:
        adjacency = np.asarray(self.adjacency)
        if adjacency.shape != (self.n, self.n):
            raise ValidationError("adjacency must be n x n")
        if not np.array_equal(adjacency, adjacency.T):
            raise ValidationError("adjacency must be symmetric")
        if np.any(np.diag(adjacency) != 0):
            raise ValidationError("adjacency diagonal must be zero")


def build_room_graph(doc: RoomsDocument) -> RoomGraph:
    """Adjacency from (symmetrized) links, SPD by BFS from every node."""
    names = doc.names
    n = len(names)
    index = {name: i for i, name in enumerate(names)}
    adjacency = np.zeros((n, n), dtype=np.int8)
    for i, room in enumerate(doc.rooms):
        for target in room.link:
            j = index.get(target)
            if j is None:
                raise ValidationError(
                    f"room {room.name!r} links to unknown room {target!r}"
                )
            adjacency[i, j] = 1
            adjacency[j, i] = 1
    degree = adjacency.sum(axis=1).astype(np.int64)
    spd = np.full((n, n), n, dtype=np.int64)
    for start in range(n):
        spd[start, start] = 0
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in np.flatnonzero(adjacency[u]):
                if spd[start, v] == n and v != start:
                    spd[start, v] = spd[start, u] + 1
                    queue.append(int(v))
    return RoomGraph(n=n, adjacency=adjacency, degree=degree, spd=spd)
