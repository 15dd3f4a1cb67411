"""Concrete 2-D tile maps realizing an abstract supply-chain topology.

Cell coordinates are (x, y) with x the column and y the row; the kind grid
is indexed kinds[y, x]. Units occupy chain cells (source, path, processing,
sink); agents walk on floor, center tiles and repair tiles; the two cell
populations are disjoint by construction. Exact coordinates are canonical
generator choices, frozen by golden tests so seeded runs stay reproducible
across versions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .topology import Topology

# Tile kinds.
FLOOR, WALL, PATH, PROCESSING, CENTER, REPAIR, SOURCE, SINK = range(8)

ASCII_OF_KIND = ".#=PCRSX"
KIND_OF_ASCII = {ch: k for k, ch in enumerate(ASCII_OF_KIND)}

UNIT_KINDS = frozenset({PATH, PROCESSING, SOURCE, SINK})
WALKABLE_KINDS = frozenset({FLOOR, CENTER, REPAIR})

Cell = tuple[int, int]

LAYOUT_STYLES = ("circular", "linear", "branched")


class LayoutError(ValueError):
    pass


class StyleTopologyMismatch(LayoutError):
    pass


class SpacingTooSmall(LayoutError):
    pass


@dataclass
class CenterAnchor:
    processing: Cell
    center_tile: Cell
    repair_tile: Cell | None


@dataclass
class ChainIndex:
    """Linearized chain: cells in topological order plus successor indices.

    This is the gridless view of the unit flow used by the engine's unit
    movement phase (and mirrored by the abstract queue oracle in tests).
    """

    cells: list[Cell]
    index: dict[Cell, int]
    succ: list[tuple[int, ...]]
    pred: list[tuple[int, ...]]
    proc_center: list[int]  # center id at processing cells, else 0
    proc_of_center: dict[int, int]
    source_indices: list[int]
    sink_flags: list[bool]
    branch_indices: list[int]
    merge_indices: list[int]


@dataclass
class TileMap:
    kinds: np.ndarray
    chain_next: dict[Cell, tuple[Cell, ...]]
    center_anchor: dict[int, CenterAnchor]
    source_cells: tuple[Cell, ...]
    sink_cells: tuple[Cell, ...]
    branch_cells: frozenset[Cell]
    merge_cells: frozenset[Cell]
    style: str
    spacing: int
    _chain_index: ChainIndex | None = field(default=None, repr=False)
    _walk_cache: dict = field(default_factory=dict, repr=False)

    @property
    def width(self) -> int:
        return int(self.kinds.shape[1])

    @property
    def height(self) -> int:
        return int(self.kinds.shape[0])

    def kind_at(self, cell: Cell) -> int:
        x, y = cell
        return int(self.kinds[y, x])

    def in_bounds(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def is_walkable(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and self.kind_at(cell) in WALKABLE_KINDS

    def num_centers(self) -> int:
        return len(self.center_anchor)

    def chain_index(self) -> ChainIndex:
        if self._chain_index is None:
            self._chain_index = _linearize(self)
        return self._chain_index

    def to_ascii(self) -> str:
        rows = []
        for y in range(self.height):
            rows.append("".join(ASCII_OF_KIND[int(k)] for k in self.kinds[y]))
        return "\n".join(rows) + "\n"


def _neighbors4(cell: Cell) -> list[Cell]:
    x, y = cell
    return [(x, y - 1), (x, y + 1), (x - 1, y), (x + 1, y)]


def _linearize(m: TileMap) -> ChainIndex:
    """Topologically order the chain cells from the sources."""
    pred_count: dict[Cell, int] = {}
    for cell, nxts in m.chain_next.items():
        pred_count.setdefault(cell, 0)
        for n in nxts:
            pred_count[n] = pred_count.get(n, 0) + 1
    ready = [c for c in m.source_cells if pred_count.get(c, 0) == 0]
    order: list[Cell] = []
    counts = dict(pred_count)
    while ready:
        ready.sort(key=lambda c: (c[1], c[0]))
        cell = ready.pop(0)
        order.append(cell)
        for n in m.chain_next.get(cell, ()):
            counts[n] -= 1
            if counts[n] == 0:
                ready.append(n)
    if len(order) != len(pred_count):
        raise LayoutError("chain flow is disconnected or cyclic; cannot linearize")

    index = {c: i for i, c in enumerate(order)}
    succ = [tuple(index[n] for n in m.chain_next.get(c, ())) for c in order]
    pred_lists: list[list[int]] = [[] for _ in order]
    for i, succs in enumerate(succ):
        for j in succs:
            pred_lists[j].append(i)
    proc_center = [0] * len(order)
    proc_of_center = {}
    for cid, anchor in m.center_anchor.items():
        i = index[anchor.processing]
        proc_center[i] = cid
        proc_of_center[cid] = i
    return ChainIndex(
        cells=order,
        index=index,
        succ=succ,
        pred=[tuple(sorted(p)) for p in pred_lists],
        proc_center=proc_center,
        proc_of_center=proc_of_center,
        source_indices=[index[c] for c in m.source_cells],
        sink_flags=[m.kind_at(c) == SINK for c in order],
        branch_indices=sorted(index[c] for c in m.branch_cells),
        merge_indices=sorted(index[c] for c in m.merge_cells),
    )


# ---------------------------------------------------------------------------
# generators


def generate_layout(t: Topology, style: str, spacing: int = 2) -> TileMap:
    """Generate the canonical tile map for a topology.

    circular and linear require chain topologies; branched accepts any
    valid topology with in/out degree at most two. Identical inputs give
    identical maps.
    """
    if style not in LAYOUT_STYLES:
        raise LayoutError(f"unknown layout style {style!r}; expected one of {LAYOUT_STYLES}")
    if style in ("circular", "linear") and not t.is_chain():
        raise StyleTopologyMismatch(f"{style} layout requires a chain topology")
    if style in ("linear", "branched") and spacing < 2:
        raise SpacingTooSmall(f"spacing {spacing} < 2 leaves no room for the queue cell")
    if style == "linear":
        return _generate_linear(t, spacing)
    if style == "circular":
        return _generate_circular(t)
    return _generate_branched(t, spacing)


def _blank(width: int, height: int) -> np.ndarray:
    kinds = np.full((height, width), FLOOR, dtype=np.uint8)
    kinds[0, :] = WALL
    kinds[-1, :] = WALL
    kinds[:, 0] = WALL
    kinds[:, -1] = WALL
    return kinds


def _generate_linear(t: Topology, d: int) -> TileMap:
    order = t.chain_order()
    n = len(order)
    xs = {c: 3 + k * d for k, c in enumerate(order)}
    x_last = 3 + (n - 1) * d
    width, height = x_last + 4, 6
    kinds = _blank(width, height)

    chain_row = 4
    chain_cells = [(x, chain_row) for x in range(1, x_last + 3)]
    for x, y in chain_cells:
        kinds[y, x] = PATH
    kinds[chain_row, 1] = SOURCE
    kinds[chain_row, x_last + 2] = SINK
    anchors: dict[int, CenterAnchor] = {}
    for c in order:
        x = xs[c]
        kinds[chain_row, x] = PROCESSING
        kinds[3, x] = CENTER
        kinds[2, x] = REPAIR
        anchors[c] = CenterAnchor((x, chain_row), (x, 3), (x, 2))

    chain_next = {cell: (nxt,) for cell, nxt in zip(chain_cells, chain_cells[1:])}
    chain_next[chain_cells[-1]] = ()
    return TileMap(
        kinds=kinds,
        chain_next=chain_next,
        center_anchor=anchors,
        source_cells=((1, chain_row),),
        sink_cells=((x_last + 2, chain_row),),
        branch_cells=frozenset(),
        merge_cells=frozenset(),
        style="linear",
        spacing=d,
    )


def _ring_cells(r: int) -> list[Cell]:
    """Perimeter of the square (1,1)..(r,r), clockwise from (1,1)."""
    cells = [(x, 1) for x in range(1, r + 1)]
    cells += [(r, y) for y in range(2, r + 1)]
    cells += [(x, r) for x in range(r - 1, 0, -1)]
    cells += [(1, y) for y in range(r - 1, 1, -1)]
    return cells


def _generate_circular(t: Topology) -> TileMap:
    order = t.chain_order()
    n = len(order)
    r = 11
    while 4 * (r - 1) < 3 * (n + 1):
        r += 2
    ring = _ring_cells(r)
    p = len(ring)
    corners = {0, r - 1, 2 * r - 2, 3 * r - 3}

    gap = p // (n + 1)
    proc_pos: list[int] = []
    for k in range(1, n + 1):
        pos = k * gap
        while pos in corners or pos in proc_pos or pos >= p - 1:
            pos += 1
        proc_pos.append(pos)

    width = height = r + 2
    kinds = _blank(width, height)
    for x, y in ring:
        kinds[y, x] = PATH
    kinds[1, 1] = SOURCE
    sink = ring[p - 1]
    kinds[sink[1], sink[0]] = SINK

    anchors: dict[int, CenterAnchor] = {}
    for c, pos in zip(order, proc_pos):
        x, y = ring[pos]
        kinds[y, x] = PROCESSING
        if y == 1:
            ct, rt = (x, 2), (x, 3)
        elif x == r:
            ct, rt = (r - 1, y), (r - 2, y)
        elif y == r:
            ct, rt = (x, r - 1), (x, r - 2)
        else:
            ct, rt = (2, y), (3, y)
        kinds[ct[1], ct[0]] = CENTER
        kinds[rt[1], rt[0]] = REPAIR
        anchors[c] = CenterAnchor((x, y), ct, rt)

    chain_next = {cell: (nxt,) for cell, nxt in zip(ring, ring[1:])}
    chain_next[ring[-1]] = ()
    return TileMap(
        kinds=kinds,
        chain_next=chain_next,
        center_anchor=anchors,
        source_cells=((1, 1),),
        sink_cells=(sink,),
        branch_cells=frozenset(),
        merge_cells=frozenset(),
        style="circular",
        spacing=0,
    )


def _generate_branched(t: Topology, d: int) -> TileMap:
    for c in t.centers:
        if len(t.successors(c)) > 2:
            raise StyleTopologyMismatch(f"center {c} has out-degree > 2; branched layout supports 2")
        if len(t.predecessors(c)) > 2:
            raise StyleTopologyMismatch(f"center {c} has in-degree > 2; branched layout supports 2")

    pitch = max(d, 4)
    topo = t.topological_order()
    depth: dict[int, int] = {}
    for c in topo:
        preds = t.predecessors(c)
        depth[c] = 0 if not preds else max(depth[p] for p in preds) + 1

    lane: dict[int, int] = {}
    next_lane = 0
    for c in topo:
        if c not in lane:
            lane[c] = next_lane
            next_lane += 1
        first_taken = False
        for child in sorted(t.successors(c)):
            if child in lane:
                continue
            if not first_taken:
                lane[child] = lane[c]
                first_taken = True
            else:
                lane[child] = next_lane
                next_lane += 1

    xs = {c: 3 + depth[c] * pitch for c in topo}
    ys = {c: 4 + lane[c] * 4 for c in topo}

    # Routes between processing cells (inclusive of both endpoints).
    # Horizontal runs, sources and sinks are laid out first; each cross-lane
    # edge then picks the leftmost vertical column whose interior crosses no
    # existing flow (two chains may share a cell only by branching at it or
    # merging into it, never by crossing).
    routes: list[list[Cell]] = []
    occupied: set[Cell] = set()

    def add_route(route: list[Cell]) -> None:
        routes.append(route)
        occupied.update(route)

    cross_edges: list[tuple[int, int]] = []
    for a, b in t.edges:
        if ys[a] == ys[b]:
            add_route([(x, ys[a]) for x in range(xs[a], xs[b] + 1)])
        else:
            cross_edges.append((a, b))
    for s in sorted(t.source_centers):
        add_route([(1, ys[s]), (2, ys[s]), (xs[s], ys[s])])
    sink_cells: list[Cell] = []
    for s in sorted(t.sink_centers):
        cell = (xs[s] + 2, ys[s])
        add_route([(xs[s], ys[s]), (xs[s] + 1, ys[s]), cell])
        sink_cells.append(cell)

    for a, b in cross_edges:
        xa, ya, xb, yb = xs[a], ys[a], xs[b], ys[b]
        step = 1 if yb > ya else -1
        col = None
        for cand in range(xa + 1, xb):
            interior = [(cand, y) for y in range(ya + step, yb, step)]
            if not any(c in occupied for c in interior):
                col = cand
                break
        if col is None:
            raise StyleTopologyMismatch(
                f"no collision-free vertical column for edge ({a},{b}); topology too tangled"
            )
        route = [(x, ya) for x in range(xa, col + 1)]
        route += [(col, y) for y in range(ya + step, yb + step, step)]
        route += [(x, yb) for x in range(col + 1, xb + 1)]
        add_route(route)

    links: dict[Cell, list[Cell]] = {}
    preds: dict[Cell, list[Cell]] = {}
    for route in routes:
        for cur, nxt in zip(route, route[1:]):
            if nxt not in links.setdefault(cur, []):
                links[cur].append(nxt)
                preds.setdefault(nxt, []).append(cur)
            preds.setdefault(cur, preds.get(cur, []))

    chain_cells = set(links) | set(preds)
    proc_cells = {(xs[c], ys[c]): c for c in topo}
    branch_cells = set()
    merge_cells = set()
    for cell, nxts in links.items():
        if len(nxts) > 2 or len(preds.get(cell, [])) > 2:
            raise StyleTopologyMismatch(f"flow collision at {cell}; topology too tangled for branched layout")
        if len(nxts) == 2:
            branch_cells.add(cell)
        if len(preds.get(cell, [])) == 2:
            merge_cells.add(cell)
        if len(nxts) == 2 and len(preds.get(cell, [])) == 2:
            raise StyleTopologyMismatch(f"cell {cell} is both branch and merge; unsupported")

    # One spare floor column right of the sinks keeps the walking layer
    # connected across lanes (chain rows are impassable to agents). Lane 0
    # anchors sit above its chain row, deeper lanes below theirs, so tile
    # clusters never end up enclosed by connector columns.
    width = max(x for x, _ in chain_cells) + 3
    anchor_tiles: dict[int, tuple[Cell, Cell]] = {}
    for c in topo:
        x, y = xs[c], ys[c]
        side = -1 if lane[c] == 0 else 1
        anchor_tiles[c] = ((x, y + side), (x, y + 2 * side))
    height = max(
        max(y for _, y in chain_cells),
        max(rt[1] for _, rt in anchor_tiles.values()),
    ) + 2
    kinds = _blank(width, height)
    for cell in chain_cells:
        x, y = cell
        if kinds[y, x] != FLOOR:
            raise StyleTopologyMismatch(f"flow collides with the border at {cell}")
        kinds[y, x] = PROCESSING if cell in proc_cells else PATH
    anchors: dict[int, CenterAnchor] = {}
    for c in topo:
        ct, rt = anchor_tiles[c]
        for tile, kind in ((ct, CENTER), (rt, REPAIR)):
            if kinds[tile[1], tile[0]] != FLOOR:
                raise StyleTopologyMismatch(f"anchor tile {tile} of center {c} collides with the flow")
            kinds[tile[1], tile[0]] = kind
        anchors[c] = CenterAnchor((xs[c], ys[c]), ct, rt)

    source_cells = tuple((1, ys[s]) for s in sorted(t.source_centers))
    for x, y in source_cells:
        kinds[y, x] = SOURCE
    for x, y in sink_cells:
        kinds[y, x] = SINK

    chain_next = {cell: tuple(links.get(cell, ())) for cell in chain_cells}
    m = TileMap(
        kinds=kinds,
        chain_next=chain_next,
        center_anchor=anchors,
        source_cells=source_cells,
        sink_cells=tuple(sink_cells),
        branch_cells=frozenset(branch_cells),
        merge_cells=frozenset(merge_cells),
        style="branched",
        spacing=pitch,
    )
    diags = validate_tilemap(m)
    if diags:
        raise StyleTopologyMismatch(f"branched layout cannot realize this topology cleanly: {diags}")
    return m


# ---------------------------------------------------------------------------
# ASCII import and validation


def tilemap_from_ascii(text: str, style: str = "imported", spacing: int = 0) -> TileMap:
    """Rebuild a TileMap from its ASCII art.

    Flow direction is inferred by breadth-first distance from the source
    cells; center indices are assigned in order of flow distance. Intended
    for hand-authored test maps; the result may fail validate_tilemap.
    """
    rows = [r for r in text.splitlines() if r]
    height, width = len(rows), max(len(r) for r in rows)
    kinds = np.full((height, width), WALL, dtype=np.uint8)
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            if ch not in KIND_OF_ASCII:
                raise LayoutError(f"unknown tile character {ch!r} at ({x},{y})")
            kinds[y, x] = KIND_OF_ASCII[ch]

    chain_cells = {
        (x, y) for y in range(height) for x in range(width) if kinds[y, x] in UNIT_KINDS
    }
    sources = sorted(
        (c for c in chain_cells if kinds[c[1], c[0]] == SOURCE), key=lambda c: (c[1], c[0])
    )
    dist: dict[Cell, int] = {c: 0 for c in sources}
    frontier = list(sources)
    while frontier:
        nxt: list[Cell] = []
        for cell in frontier:
            for nb in _neighbors4(cell):
                if nb in chain_cells and nb not in dist:
                    dist[nb] = dist[cell] + 1
                    nxt.append(nb)
        frontier = nxt

    chain_next: dict[Cell, tuple[Cell, ...]] = {}
    for cell in chain_cells:
        if kinds[cell[1], cell[0]] == SINK or cell not in dist:
            chain_next[cell] = ()
            continue
        succs = [
            nb
            for nb in _neighbors4(cell)
            if nb in chain_cells and dist.get(nb, -1) == dist[cell] + 1
        ]
        chain_next[cell] = tuple(sorted(succs, key=lambda c: (c[1], c[0])))

    pred_count: dict[Cell, int] = {}
    for cell, nxts in chain_next.items():
        for n in nxts:
            pred_count[n] = pred_count.get(n, 0) + 1

    procs = sorted(
        (c for c in chain_cells if kinds[c[1], c[0]] == PROCESSING),
        key=lambda c: (dist.get(c, 10**9), c[1], c[0]),
    )
    anchors: dict[int, CenterAnchor] = {}
    for i, cell in enumerate(procs, start=1):
        cts = [nb for nb in _neighbors4(cell) if _kind_in(kinds, nb) == CENTER]
        ct = cts[0] if len(cts) == 1 else None
        rt = None
        if ct is not None:
            rts = [nb for nb in _neighbors4(ct) if _kind_in(kinds, nb) == REPAIR]
            rt = rts[0] if len(rts) == 1 else None
        anchors[i] = CenterAnchor(cell, ct if ct is not None else cell, rt)

    return TileMap(
        kinds=kinds,
        chain_next=chain_next,
        center_anchor=anchors,
        source_cells=tuple(sources),
        sink_cells=tuple(
            sorted(
                (c for c in chain_cells if kinds[c[1], c[0]] == SINK), key=lambda c: (c[1], c[0])
            )
        ),
        branch_cells=frozenset(c for c, n in chain_next.items() if len(n) == 2),
        merge_cells=frozenset(c for c, n in pred_count.items() if n == 2),
        style=style,
        spacing=spacing,
    )


def _kind_in(kinds: np.ndarray, cell: Cell) -> int:
    x, y = cell
    if 0 <= y < kinds.shape[0] and 0 <= x < kinds.shape[1]:
        return int(kinds[y, x])
    return WALL


def validate_tilemap(m: TileMap) -> list[str]:
    """Return the list of violated map invariants (empty when valid)."""
    diags: list[str] = []

    for cid, a in sorted(m.center_anchor.items()):
        if m.kind_at(a.processing) != PROCESSING:
            diags.append(f"BadAnchorKind(center={cid})")
            continue
        cts = [nb for nb in _neighbors4(a.processing) if _kind_in(m.kinds, nb) == CENTER]
        if a.center_tile == a.processing or m.kind_at(a.center_tile) != CENTER or len(cts) != 1:
            diags.append(f"MissingCenterTile(center={cid})")
            continue
        rts = [nb for nb in _neighbors4(a.center_tile) if _kind_in(m.kinds, nb) == REPAIR]
        if a.repair_tile is None or m.kind_at(a.repair_tile) != REPAIR or len(rts) != 1:
            diags.append(f"MissingRepairTile(center={cid})")

    # Flow connectivity: every chain cell on a source->sink route.
    chain_cells = {
        (x, y)
        for y in range(m.height)
        for x in range(m.width)
        if m.kinds[y, x] in UNIT_KINDS
    }
    reach: set[Cell] = set(m.source_cells)
    stack = list(m.source_cells)
    while stack:
        cell = stack.pop()
        for n in m.chain_next.get(cell, ()):
            if n not in reach:
                reach.add(n)
                stack.append(n)
    sinks = set(m.sink_cells)
    if not m.source_cells or not sinks or not (reach & sinks) or chain_cells - reach:
        diags.append("DisconnectedFlow")

    for cell, nxts in m.chain_next.items():
        if len(nxts) == 2 and cell not in m.branch_cells:
            diags.append(f"BadChainOrder(cell={cell})")
        if len(nxts) > 2:
            diags.append(f"BadChainOrder(cell={cell})")
        for n in nxts:
            if n not in _neighbors4(cell):
                diags.append(f"NonAdjacentFlow(cell={cell})")

    # All center and repair tiles mutually reachable on foot.
    tiles = [a.center_tile for a in m.center_anchor.values()] + [
        a.repair_tile for a in m.center_anchor.values() if a.repair_tile is not None
    ]
    tiles = [c for c in tiles if m.in_bounds(c) and m.kind_at(c) in WALKABLE_KINDS]
    if tiles:
        seen = {tiles[0]}
        stack = [tiles[0]]
        while stack:
            cell = stack.pop()
            for nb in _neighbors4(cell):
                if nb not in seen and m.is_walkable(nb):
                    seen.add(nb)
                    stack.append(nb)
        if any(c not in seen for c in tiles):
            diags.append("DisconnectedWalkable")

    return diags
