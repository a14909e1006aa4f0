"""Planar multigraphs with an explicit rotation system.

A graph is stored as a combinatorial map: every undirected edge e owns two
half-edges 2*e (tail -> head) and 2*e + 1 (head -> tail), and every vertex
carries the counterclockwise cyclic order of its outgoing half-edges.  Faces
are orbits of h -> rot_next[twin(h)], so the face attached to a half-edge is
the face on its LEFT when walking from tail to head.  The embedding must be
spherical: construction fails unless V - E + F == 2 on a connected graph.

The module also provides the standard constructions used throughout the
package (cycles, paths, parallel bundles, chain graphs, box lattices, the
triangulated box), the two edge refinements (series subdivision and parallel
refinement), JSON round-tripping, and cut paths in the dual used by the
winding diagnostics.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterator, Mapping, Sequence

__all__ = [
    "PlanarGraphError",
    "PlanarGraph",
    "build_graph",
    "cycle_graph",
    "path_graph",
    "parallel_edges",
    "chain_graph",
    "complete_four",
    "box_lattice",
    "triangulated_box",
    "subdivide_edges",
    "parallel_refine",
    "CutPath",
    "box_cut",
    "face_of_cell",
    "simple_cycles",
    "validate_cut",
    "check_graph",
]


class PlanarGraphError(ValueError):
    """Raised when input data does not describe a valid spherical embedding."""


# ============================================================
# Core structure
# ============================================================


class PlanarGraph:
    """Connected planar multigraph with rotation system and traced faces.

    Attributes:
        labels: tuple of vertex labels; vertex ids are positions in it.
        nv, ne, nf: vertex / edge / face counts.
        edge_tail, edge_head: per-edge endpoint vertex ids (the canonical
            orientation of edge e is half-edge 2*e).
        coupling: per-edge positive coupling constants.
        origin: per-half-edge tail vertex id.
        rot_next: per-half-edge successor in the CCW rotation at its origin.
        rotation: per-vertex list of outgoing half-edges in CCW order.
        face_of: per-half-edge id of the face on its left.
        faces: per-face tuple of half-edges walked with the face on the left.
        outer_face: id of the distinguished unbounded face.
    """

    def __init__(
        self,
        labels: Sequence[Hashable],
        rotation_labels: Mapping[Hashable, Sequence[Hashable]],
        couplings: Mapping[tuple[Hashable, Hashable], float] | float,
        outer_face: Sequence[Hashable] | int | None = None,
    ):
        self.labels = tuple(labels)
        if len(set(self.labels)) != len(self.labels):
            raise PlanarGraphError("duplicate vertex labels")
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        self.nv = len(self.labels)
        if self.nv == 0:
            raise PlanarGraphError("empty graph")

        self._build_half_edges(rotation_labels)
        self._assign_couplings(couplings)
        self._trace_faces()
        self._check_connected()
        if self.nv - self.ne + self.nf != 2:
            raise PlanarGraphError(
                "rotation system is not spherical: V-E+F = "
                f"{self.nv - self.ne + self.nf} (expected 2)"
            )
        self.outer_face = self._resolve_outer_face(outer_face)

    # ---- construction internals ----

    def _build_half_edges(self, rotation_labels) -> None:
        missing = set(self.labels) - set(rotation_labels)
        if missing:
            raise PlanarGraphError(f"rotation missing for vertices {sorted(map(str, missing))}")
        extra = set(rotation_labels) - set(self.labels)
        if extra:
            raise PlanarGraphError(f"rotation lists unknown vertices {sorted(map(str, extra))}")

        occ: dict[tuple[int, int], list[int]] = {}
        slots: list[tuple[int, int]] = []
        slot_of: list[list[int]] = [[] for _ in range(self.nv)]
        for v, lab in enumerate(self.labels):
            for w_lab in rotation_labels[lab]:
                if w_lab not in self.index:
                    raise PlanarGraphError(f"unknown neighbour {w_lab!r} around {lab!r}")
                w = self.index[w_lab]
                if w == v:
                    raise PlanarGraphError(f"self-loop at {lab!r} is not supported")
                slot = len(slots)
                slots.append((v, w))
                slot_of[v].append(slot)
                occ.setdefault((v, w), []).append(slot)

        for (v, w), v_slots in occ.items():
            w_slots = occ.get((w, v))
            if w_slots is None or len(w_slots) != len(v_slots):
                raise PlanarGraphError(
                    f"asymmetric adjacency between {self.labels[v]!r} and {self.labels[w]!r}"
                )

        # Occurrence pairing: the k-th occurrence of w around v joins the
        # (count - k + 1)-th occurrence of v around w.  For a bundle of
        # parallel copies listed consecutively this is the planar (nested)
        # pairing; the Euler check below rejects anything non-spherical.
        self.edge_tail: list[int] = []
        self.edge_head: list[int] = []
        half_of_slot = [-1] * len(slots)
        for (v, w), v_slots in occ.items():
            if v >= w:
                continue
            w_slots = occ[(w, v)]
            for k, sv in enumerate(v_slots):
                sw = w_slots[len(w_slots) - 1 - k]
                e = len(self.edge_tail)
                self.edge_tail.append(v)
                self.edge_head.append(w)
                half_of_slot[sv] = 2 * e
                half_of_slot[sw] = 2 * e + 1
        if any(h < 0 for h in half_of_slot):
            raise PlanarGraphError("internal pairing failure")

        self.ne = len(self.edge_tail)
        self.n_half = 2 * self.ne
        self.origin = [0] * self.n_half
        self.rot_next = [0] * self.n_half
        self.rot_prev = [0] * self.n_half
        self.rotation: list[list[int]] = []
        for v in range(self.nv):
            ring = [half_of_slot[s] for s in slot_of[v]]
            self.rotation.append(ring)
            for i, h in enumerate(ring):
                self.origin[h] = v
                self.rot_next[h] = ring[(i + 1) % len(ring)]
                self.rot_prev[h] = ring[(i - 1) % len(ring)]
        if self.nv > 1 and any(len(r) == 0 for r in self.rotation):
            raise PlanarGraphError("isolated vertex in a multi-vertex graph")

    def _assign_couplings(self, couplings) -> None:
        if isinstance(couplings, (int, float)):
            self.coupling = [float(couplings)] * self.ne
        else:
            norm: dict[tuple[Hashable, Hashable], float] = {}
            for (a, b), val in couplings.items():
                norm[(a, b)] = float(val)
                norm[(b, a)] = float(val)
            self.coupling = []
            for e in range(self.ne):
                key = (self.labels[self.edge_tail[e]], self.labels[self.edge_head[e]])
                if key not in norm:
                    raise PlanarGraphError(f"no coupling given for edge {key!r}")
                self.coupling.append(norm[key])
        if any(j <= 0 for j in self.coupling):
            raise PlanarGraphError("couplings must be positive")

    def _trace_faces(self) -> None:
        # Arriving at v along h, the face on the left of h continues along
        # the half-edge immediately CLOCKWISE from the reversal of h, which
        # in a CCW rotation system is rot_prev[twin(h)].
        face_of = [-1] * self.n_half
        faces: list[tuple[int, ...]] = []
        for h0 in range(self.n_half):
            if face_of[h0] >= 0:
                continue
            walk = []
            h = h0
            while face_of[h] < 0:
                face_of[h] = len(faces)
                walk.append(h)
                h = self.rot_prev[h ^ 1]
            if h != h0:
                raise PlanarGraphError("face tracing failed to close")
            faces.append(tuple(walk))
        self.face_of = face_of
        self.faces = tuple(faces)
        self.nf = len(faces)

    def _check_connected(self) -> None:
        seen = [False] * self.nv
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            v = stack.pop()
            for h in self.rotation[v]:
                w = self.origin[h ^ 1]
                if not seen[w]:
                    seen[w] = True
                    count += 1
                    stack.append(w)
        if count != self.nv:
            raise PlanarGraphError("graph is not connected")

    def _resolve_outer_face(self, hint) -> int:
        if hint is None:
            # Deterministic default: longest boundary walk, ties broken by
            # the sorted label sequence of the walk, then by face id.
            def sort_key(f: int):
                walk = self.faces[f]
                names = sorted(str(self.labels[self.origin[h]]) for h in walk)
                return (-len(walk), names, f)

            return min(range(self.nf), key=sort_key)
        if isinstance(hint, int):
            if not 0 <= hint < self.nf:
                raise PlanarGraphError(f"outer face id {hint} out of range")
            return hint
        want = sorted(str(x) for x in hint)
        matches = [
            f
            for f in range(self.nf)
            if len(self.faces[f]) == len(want)
            and sorted(str(self.labels[self.origin[h]]) for h in self.faces[f]) == want
        ]
        if len(matches) != 1:
            raise PlanarGraphError(
                f"outer face hint {hint!r} matches {len(matches)} faces (need exactly 1)"
            )
        return matches[0]

    # ---- elementary queries ----

    @staticmethod
    def twin(h: int) -> int:
        """Opposite half-edge of the same undirected edge."""
        return h ^ 1

    def head(self, h: int) -> int:
        """Vertex id a half-edge points to."""
        return self.origin[h ^ 1]

    def edge_of(self, h: int) -> int:
        """Undirected edge id carrying a half-edge."""
        return h >> 1

    def degree(self, v: int) -> int:
        return len(self.rotation[v])

    def vertex_id(self, label: Hashable) -> int:
        try:
            return self.index[label]
        except KeyError:
            raise PlanarGraphError(f"unknown vertex label {label!r}") from None

    def edges(self) -> Iterator[tuple[int, Hashable, Hashable, float]]:
        """Yields (edge id, tail label, head label, coupling)."""
        for e in range(self.ne):
            yield e, self.labels[self.edge_tail[e]], self.labels[self.edge_head[e]], self.coupling[e]

    def edge_between(self, a: Hashable, b: Hashable) -> int:
        """Id of the first edge joining two labelled vertices."""
        found = self.edges_between(a, b)
        if not found:
            raise PlanarGraphError(f"no edge between {a!r} and {b!r}")
        return found[0]

    def edges_between(self, a: Hashable, b: Hashable) -> list[int]:
        va, vb = self.vertex_id(a), self.vertex_id(b)
        return [
            e
            for e in range(self.ne)
            if {self.edge_tail[e], self.edge_head[e]} == {va, vb}
        ]

    def half_edge_from_to(self, v: int, w: int) -> int:
        """The first half-edge from vertex id v to vertex id w."""
        for h in self.rotation[v]:
            if self.head(h) == w:
                return h
        raise PlanarGraphError(f"no edge from {self.labels[v]!r} to {self.labels[w]!r}")

    def face_vertices(self, f: int) -> list[Hashable]:
        """Labels along the boundary walk of a face (with repeats if any)."""
        return [self.labels[self.origin[h]] for h in self.faces[f]]

    def left_face(self, h: int) -> int:
        return self.face_of[h]

    def right_face(self, h: int) -> int:
        return self.face_of[h ^ 1]

    def inner_faces(self) -> list[int]:
        return [f for f in range(self.nf) if f != self.outer_face]

    # ---- dual structure ----

    def dual_tree(self) -> list[tuple[int, int]]:
        """Spanning tree of the dual rooted at the outer face.

        Returns a list of (face, entering half-edge) in BFS discovery order,
        excluding the root.  The entering half-edge h satisfies
        left_face(h) == face and right_face(h) == parent, so a quantity that
        changes by net flow across edges can be propagated face by face.
        """
        seen = [False] * self.nf
        seen[self.outer_face] = True
        order: list[tuple[int, int]] = []
        queue = deque([self.outer_face])
        while queue:
            f = queue.popleft()
            for h in self.faces[f]:
                g = self.face_of[h ^ 1]
                if not seen[g]:
                    seen[g] = True
                    order.append((g, h ^ 1))
                    queue.append(g)
        if len(order) != self.nf - 1:
            raise PlanarGraphError("dual graph is not connected")
        return order

    def dual_path_to(self, target_face: int) -> list[int]:
        """Half-edges crossed by a dual walk from the outer face to a face.

        Crossing half-edge h means stepping from right_face(h) into
        left_face(h).  Built from a DFS dual tree, so the route differs from
        the BFS tree used by dual_tree.
        """
        parent_half = {self.outer_face: -1}
        stack = [self.outer_face]
        while stack:
            f = stack.pop()
            for h in reversed(self.faces[f]):
                g = self.face_of[h ^ 1]
                if g not in parent_half:
                    parent_half[g] = h ^ 1
                    stack.append(g)
        if target_face not in parent_half:
            raise PlanarGraphError("target face unreachable in dual")
        crossings = []
        f = target_face
        while f != self.outer_face:
            h = parent_half[f]
            crossings.append(h)
            f = self.right_face(h)
        crossings.reverse()
        return crossings

    # ---- serialisation ----

    def to_json(self) -> str:
        """Serialise to the package's JSON graph format.

        Labels are stringified; parallel edges between a pair must share a
        coupling to round-trip.
        """
        rot = {
            str(self.labels[v]): [str(self.labels[self.head(h)]) for h in self.rotation[v]]
            for v in range(self.nv)
        }
        coup: dict[str, float] = {}
        for e in range(self.ne):
            a = str(self.labels[self.edge_tail[e]])
            b = str(self.labels[self.edge_head[e]])
            key = f"{a}-{b}" if a <= b else f"{b}-{a}"
            if key in coup and coup[key] != self.coupling[e]:
                raise PlanarGraphError(
                    f"parallel edges {key} with distinct couplings cannot be serialised"
                )
            coup[key] = self.coupling[e]
        doc = {
            "schema": "xy-loops graph v1",
            "vertices": [str(lab) for lab in self.labels],
            "rotation": rot,
            "couplings": coup,
            "outer_face": [str(self.labels[self.origin[h]]) for h in self.faces[self.outer_face]],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PlanarGraph":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PlanarGraphError(f"invalid JSON: {exc}") from None
        for key in ("vertices", "rotation", "couplings"):
            if key not in doc:
                raise PlanarGraphError(f"graph document missing {key!r}")
        labels = list(doc["vertices"])
        known = set(labels)
        couplings: dict[tuple[str, str], float] = {}
        for key, val in doc["couplings"].items():
            pair = _split_edge_key(key, known)
            couplings[pair] = float(val)
        return cls(labels, doc["rotation"], couplings, outer_face=doc.get("outer_face"))


def _split_edge_key(key: str, known: set[str]) -> tuple[str, str]:
    """Splits 'a-b' into labels, trying each '-' position against the vertex set."""
    hits = []
    pos = key.find("-")
    while pos >= 0:
        a, b = key[:pos], key[pos + 1 :]
        if a in known and b in known:
            hits.append((a, b))
        pos = key.find("-", pos + 1)
    if len(hits) != 1:
        raise PlanarGraphError(f"cannot split edge key {key!r} against the vertex list")
    return hits[0]


# ============================================================
# Constructors
# ============================================================


def build_graph(
    rotation: Mapping[Hashable, Sequence[Hashable]],
    couplings: Mapping[tuple[Hashable, Hashable], float] | float = 1.0,
    outer_face: Sequence[Hashable] | None = None,
) -> PlanarGraph:
    """Builds a graph from per-vertex CCW neighbour lists."""
    return PlanarGraph(list(rotation.keys()), rotation, couplings, outer_face)


def cycle_graph(k: int, coupling: float = 1.0) -> PlanarGraph:
    """Cycle on k >= 3 vertices labelled 0..k-1."""
    if k < 3:
        raise PlanarGraphError("cycle needs at least 3 vertices")
    rot = {i: [(i - 1) % k, (i + 1) % k] for i in range(k)}
    return PlanarGraph(list(range(k)), rot, coupling)


def path_graph(k: int, coupling: float = 1.0) -> PlanarGraph:
    """Path on k >= 2 vertices labelled 0..k-1."""
    if k < 2:
        raise PlanarGraphError("path needs at least 2 vertices")
    rot: dict[Hashable, list[Hashable]] = {}
    for i in range(k):
        nbrs = []
        if i > 0:
            nbrs.append(i - 1)
        if i < k - 1:
            nbrs.append(i + 1)
        rot[i] = nbrs
    return PlanarGraph(list(range(k)), rot, coupling)


def parallel_edges(s: int, coupling: float = 1.0) -> PlanarGraph:
    """Two vertices 'a', 'b' joined by s parallel edges."""
    if s < 1:
        raise PlanarGraphError("need at least one edge")
    rot = {"a": ["b"] * s, "b": ["a"] * s}
    return PlanarGraph(["a", "b"], rot, coupling)


def chain_graph(lengths: Sequence[int], coupling: float = 1.0) -> PlanarGraph:
    """Vertices 'a' and 'b' joined by disjoint chains of the given edge counts.

    Chain c of length L contributes internal vertices ('c', c, 1..L-1).
    Lengths [1, 1, 1] is the theta graph, [1, 3] a 4-cycle with 'a' and 'b'
    adjacent, [2, 2] a 4-cycle with 'a' and 'b' opposite.  At most one chain
    may have length 1 twice only through parallel_edges.
    """
    if not lengths or any(L < 1 for L in lengths):
        raise PlanarGraphError("chain lengths must be positive")
    labels: list[Hashable] = ["a", "b"]
    rot: dict[Hashable, list[Hashable]] = {"a": [], "b": []}
    arrivals: list[Hashable] = []
    for c, L in enumerate(lengths):
        prev: Hashable = "a"
        for i in range(1, L):
            lab = ("c", c, i)
            labels.append(lab)
            rot[lab] = [prev]
            rot[prev].append(lab)
            prev = lab
        rot[prev].append("b")
        arrivals.append(prev)
    # Nested planar embedding: chains leave 'a' in order 0..k-1 and arrive
    # at 'b' in reverse order.
    rot["b"] = list(reversed(arrivals))
    return PlanarGraph(labels, rot, coupling)


def complete_four(coupling: float = 1.0) -> PlanarGraph:
    """Complete graph on 4 vertices in its planar embedding (0 in the centre)."""
    rot = {
        0: [1, 2, 3],
        1: [2, 0, 3],
        2: [3, 0, 1],
        3: [1, 0, 2],
    }
    return PlanarGraph([0, 1, 2, 3], rot, coupling)


def box_lattice(n: int, m: int, coupling: float = 1.0) -> PlanarGraph:
    """An n-by-m box of unit squares; vertices are (x, y), 0<=x<=n, 0<=y<=m."""
    if n < 1 or m < 1:
        raise PlanarGraphError("box needs n, m >= 1")
    labels = [(x, y) for y in range(m + 1) for x in range(n + 1)]
    rot: dict[Hashable, list[Hashable]] = {}
    for x, y in labels:
        nbrs = []
        # CCW from east: E, N, W, S
        if x < n:
            nbrs.append((x + 1, y))
        if y < m:
            nbrs.append((x, y + 1))
        if x > 0:
            nbrs.append((x - 1, y))
        if y > 0:
            nbrs.append((x, y - 1))
        rot[(x, y)] = nbrs
    g = PlanarGraph(labels, rot, coupling)
    # The face left of the westward half-edge (1,0)->(0,0) lies below the
    # bottom row, i.e. is the unbounded one.
    g.outer_face = g.face_of[g.half_edge_from_to(g.vertex_id((1, 0)), g.vertex_id((0, 0)))]
    return g


def triangulated_box(n: int, m: int, coupling: float = 1.0) -> PlanarGraph:
    """Box lattice with every unit square split by a centre vertex.

    Each cell (x, y) gains a centre vertex (x+1/2, y+1/2) joined to its
    lower-right and upper-left corners, and every edge (box edges included)
    carries coupling/2.  The two four-sided faces of a cell share the doubled
    diagonal, so after merging parallel dual edges every inner face has
    exactly three distinct neighbouring faces.
    """
    if n < 1 or m < 1:
        raise PlanarGraphError("box needs n, m >= 1")
    half = coupling / 2.0
    labels: list[Hashable] = [(x, y) for y in range(m + 1) for x in range(n + 1)]
    labels.extend((x + 0.5, y + 0.5) for y in range(m) for x in range(n))

    adj: dict[Hashable, list[Hashable]] = {lab: [] for lab in labels}
    couplings: dict[tuple[Hashable, Hashable], float] = {}

    def add(a, b):
        adj[a].append(b)
        adj[b].append(a)
        couplings[(a, b)] = half

    for y in range(m + 1):
        for x in range(n):
            add((x, y), (x + 1, y))
    for x in range(n + 1):
        for y in range(m):
            add((x, y), (x, y + 1))
    for y in range(m):
        for x in range(n):
            c = (x + 0.5, y + 0.5)
            add(c, (x + 1, y))
            add(c, (x, y + 1))

    def ang_key(v):
        def ang(w):
            return math.atan2(w[1] - v[1], w[0] - v[0]) % (2 * math.pi)

        return ang

    rot = {v: sorted(nbrs, key=ang_key(v)) for v, nbrs in adj.items()}
    g = PlanarGraph(labels, rot, couplings)
    g.outer_face = g.face_of[g.half_edge_from_to(g.vertex_id((1, 0)), g.vertex_id((0, 0)))]
    return g


# ============================================================
# Edge refinements
# ============================================================


def subdivide_edges(g: PlanarGraph, s: int) -> PlanarGraph:
    """Replaces every edge by a series path of s edges through fresh vertices.

    Every piece keeps the coupling of its parent edge; callers that want a
    rescaled model adjust beta themselves.  New vertices are labelled
    ('s', edge id, 1..s-1).  For s == 1 the input graph is returned as is.
    """
    if s < 1:
        raise PlanarGraphError("subdivision factor must be >= 1")
    if s == 1:
        return g

    rot: dict[Hashable, list[Hashable]] = {}
    couplings: dict[tuple[Hashable, Hashable], float] = {}
    for v in range(g.nv):
        ring: list[Hashable] = []
        for h in g.rotation[v]:
            e = h >> 1
            # tail side sees segment vertex 1, head side segment s-1
            ring.append(("s", e, 1) if (h & 1) == 0 else ("s", e, s - 1))
        rot[g.labels[v]] = ring
    labels = list(g.labels)
    for e in range(g.ne):
        t_lab, h_lab = g.labels[g.edge_tail[e]], g.labels[g.edge_head[e]]
        path: list[Hashable] = [t_lab] + [("s", e, i) for i in range(1, s)] + [h_lab]
        for i in range(s):
            couplings[(path[i], path[i + 1])] = g.coupling[e]
        for i in range(1, s):
            rot[("s", e, i)] = [path[i - 1], path[i + 1]]
            labels.append(("s", e, i))
    gg = PlanarGraph(labels, rot, couplings)
    # Relocate the outer face structurally: the first boundary half-edge h0
    # keeps its left face across subdivision, represented by its first segment.
    h0 = g.faces[g.outer_face][0]
    e = h0 >> 1
    if (h0 & 1) == 0:
        a_lab: Hashable = g.labels[g.edge_tail[e]]
        b_lab: Hashable = ("s", e, 1)
    else:
        a_lab = g.labels[g.edge_head[e]]
        b_lab = ("s", e, s - 1)
    gg.outer_face = gg.face_of[gg.half_edge_from_to(gg.vertex_id(a_lab), gg.vertex_id(b_lab))]
    return gg


def parallel_refine(g: PlanarGraph, s: int) -> PlanarGraph:
    """Replaces every edge by a bundle of s parallel copies with the same coupling.

    Only simple input graphs are supported (each bundle must be the unique
    bundle between its endpoints for the nested pairing to apply).  For
    s == 1 the input graph is returned as is.
    """
    if s < 1:
        raise PlanarGraphError("refinement factor must be >= 1")
    if s == 1:
        return g
    pairs = [frozenset((g.edge_tail[e], g.edge_head[e])) for e in range(g.ne)]
    if len(set(pairs)) != g.ne:
        raise PlanarGraphError("parallel refinement needs a simple input graph")
    rot: dict[Hashable, list[Hashable]] = {}
    for v in range(g.nv):
        ring: list[Hashable] = []
        for h in g.rotation[v]:
            ring.extend([g.labels[g.head(h)]] * s)
        rot[g.labels[v]] = ring
    couplings = {
        (g.labels[g.edge_tail[e]], g.labels[g.edge_head[e]]): g.coupling[e]
        for e in range(g.ne)
    }
    gg = PlanarGraph(g.labels, rot, couplings)
    # The face left of a half-edge h0 is the wedge between h0 and the next
    # outgoing half-edge CCW at its origin, so after refinement the old left
    # face is the left face of the LAST copy of the bundle replacing h0.
    h0 = g.faces[g.outer_face][0]
    v = g.origin[h0]
    i = g.rotation[v].index(h0)
    gg.outer_face = gg.face_of[gg.rotation[v][i * s + s - 1]]
    return gg


# ============================================================
# Cut paths
# ============================================================


@dataclass(frozen=True)
class CutPath:
    """A dual walk from the outer face to an anchor face.

    crossings lists the crossed primal half-edges in order; crossing h means
    the dual walk steps from right_face(h) into left_face(h).  minus_vertices
    are the tails of the crossed half-edges and plus_vertices the heads, so
    every primal cycle with nonzero winding around the anchor face traverses
    some crossed edge and therefore visits both vertex classes.
    """

    anchor_face: int
    crossings: tuple[int, ...]
    minus_vertices: frozenset[int]
    plus_vertices: frozenset[int]

    @classmethod
    def from_crossings(cls, g: PlanarGraph, anchor_face: int, crossings: Sequence[int]) -> "CutPath":
        f = g.outer_face
        for h in crossings:
            if g.right_face(h) != f:
                raise PlanarGraphError("cut crossings do not chain from the outer face")
            f = g.left_face(h)
        if f != anchor_face:
            raise PlanarGraphError("cut crossings do not end at the anchor face")
        minus = frozenset(g.origin[h] for h in crossings)
        plus = frozenset(g.head(h) for h in crossings)
        return cls(anchor_face, tuple(crossings), minus, plus)

    @classmethod
    def default(cls, g: PlanarGraph, anchor_face: int) -> "CutPath":
        """Cut along the DFS dual route provided by the graph."""
        return cls.from_crossings(g, anchor_face, g.dual_path_to(anchor_face))


def box_cut(g: PlanarGraph, cell: tuple[int, int]) -> CutPath:
    """Straight horizontal cut into a box lattice, anchored at a cell's face.

    Walks eastward from outside the box at height y + 1/2, crossing the
    vertical edges (x', y)-(x', y+1) for x' = 0..x.  The crossed half-edges
    point south, so the minus side is the upper row of endpoints and the plus
    side the lower row.
    """
    x, y = cell
    anchor = face_of_cell(g, x, y)
    crossings = []
    for xx in range(0, x + 1):
        hi, lo = g.vertex_id((xx, y + 1)), g.vertex_id((xx, y))
        crossings.append(g.half_edge_from_to(hi, lo))
    return CutPath.from_crossings(g, anchor, crossings)


def face_of_cell(g: PlanarGraph, x: int, y: int) -> int:
    """Face id of the unit cell with lower-left corner (x, y) in a box lattice."""
    # the eastward half-edge (x,y)->(x+1,y) has the cell on its left
    return g.face_of[g.half_edge_from_to(g.vertex_id((x, y)), g.vertex_id((x + 1, y)))]


def simple_cycles(g: PlanarGraph, max_len: int | None = None) -> list[list[int]]:
    """All simple vertex cycles of length >= 3 (desk-scale exhaustive DFS).

    Cycles are vertex id lists starting at their smallest vertex; parallel
    copies between a vertex pair are not distinguished.
    """
    cycles = []
    adj = [sorted(set(g.head(h) for h in g.rotation[v])) for v in range(g.nv)]
    for start in range(g.nv):
        stack = [(start, [start])]
        while stack:
            v, path = stack.pop()
            for w in adj[v]:
                if w == start and len(path) >= 3:
                    if path[1] < path[-1]:
                        cycles.append(path)
                elif w > start and w not in path:
                    if max_len is None or len(path) < max_len:
                        stack.append((w, path + [w]))
    return cycles


def winding_of_vertex_cycle(g: PlanarGraph, cycle: Sequence[int], cut: CutPath) -> int:
    """Signed number of times a vertex cycle crosses a cut path."""
    sign = {h: +1 for h in cut.crossings}
    for h in cut.crossings:
        sign[h ^ 1] = -1
    w = 0
    for i, v in enumerate(cycle):
        h = g.half_edge_from_to(v, cycle[(i + 1) % len(cycle)])
        w += sign.get(h, 0)
    return w


def validate_cut(g: PlanarGraph, cut: CutPath, max_cycle_len: int | None = None) -> None:
    """Checks the separating property of a cut on a desk-scale simple graph.

    Every simple cycle with nonzero winding around the anchor face must visit
    a minus-side vertex and a plus-side vertex.  Raises PlanarGraphError on a
    violation.
    """
    for cyc in simple_cycles(g, max_cycle_len):
        if winding_of_vertex_cycle(g, cyc, cut) != 0:
            if not (set(cyc) & cut.minus_vertices and set(cyc) & cut.plus_vertices):
                raise PlanarGraphError(f"cut misses winding cycle {cyc}")


# ============================================================
# Diagnostics
# ============================================================


def check_graph(g: PlanarGraph) -> dict:
    """Structural summary used by the command line 'graph check'."""
    deg = [g.degree(v) for v in range(g.nv)]
    collapsed = {}
    for f in g.inner_faces():
        nbrs = set()
        outer_hits = 0
        for h in g.faces[f]:
            other = g.right_face(h)
            if other == g.outer_face:
                outer_hits += 1
            elif other != f:
                nbrs.add(other)
        collapsed[f] = len(nbrs) + outer_hits
    return {
        "vertices": g.nv,
        "edges": g.ne,
        "faces": g.nf,
        "euler": g.nv - g.ne + g.nf,
        "outer_face": [str(lab) for lab in g.face_vertices(g.outer_face)],
        "min_degree": min(deg),
        "max_degree": max(deg),
        "face_lengths": sorted(len(w) for w in g.faces),
        "inner_dual_degrees": sorted(collapsed.values()),
        "couplings_min": min(g.coupling),
        "couplings_max": max(g.coupling),
    }
