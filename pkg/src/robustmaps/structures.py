"""Robustness graphs, their component structures, and related combinatorics.

Two input states are adjacent when some pair (R, x_R) of the specification
matches both, i.e. the states agree on R in the required assignment.  The
connected components of the induced subgraph on a vertex set S form a
robustness structure: the blocks are exactly the input classes a robust
system can still tell apart on S.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass
from math import prod
from typing import Iterable, Iterator, Optional, Sequence

from .errors import (
    EnumerationTimeout,
    InconsistentStructure,
    NotBinary,
    NotSaturated,
    StateSpaceTooLarge,
)
from .spaces import StateLike, StateSpace, make_state_space
from .specs import ALL, RobustnessSpec, is_saturated, make_rk_spec

ENUMERATION_GUARD = 24
FINK_GUARD = 8
CODE_GUARD = 2 ** 20


class _UnionFind:
    """Union-find with path compression over 0..size-1."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.count = size

    def find(self, v: int) -> int:
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
            self.count -= 1


def _normalize_subset(space: StateSpace, subset: Iterable[StateLike]) -> tuple[int, ...]:
    return tuple(sorted({space.as_index(x) for x in subset}))


def _cliques(spec: RobustnessSpec, vertices: Sequence[int]) -> Iterator[list[int]]:
    """Vertex groups matched by a single pair; each group induces a clique.

    Pairs whose cylinder sits inside another pair's cylinder are skipped,
    so the full edge set is never materialized for saturated specs.
    """
    space = spec.space
    coords = {v: space.coords_of(v) for v in vertices}
    for r, marker in spec.edge_pairs():
        nodes = tuple(sorted(r))
        if marker == ALL:
            groups: dict[tuple[int, ...], list[int]] = {}
            for v in vertices:
                key = tuple(coords[v][i - 1] for i in nodes)
                groups.setdefault(key, []).append(v)
            for group in groups.values():
                if len(group) > 1:
                    yield group
        else:
            group = [
                v
                for v in vertices
                if tuple(coords[v][i - 1] for i in nodes) == marker
            ]
            if len(group) > 1:
                yield group


@dataclass(frozen=True)
class RobustnessGraph:
    """Induced robustness graph on a vertex subset of the input space."""

    spec: RobustnessSpec
    vertices: tuple[int, ...]
    adjacency: dict[int, frozenset[int]]

    @property
    def space(self) -> StateSpace:
        return self.spec.space

    def edges(self) -> list[tuple[int, int]]:
        return sorted(
            (v, w) for v, nbrs in self.adjacency.items() for w in nbrs if v < w
        )

    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency.values()) // 2

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adjacency[v]


@dataclass(frozen=True)
class RobustnessStructure:
    """Disjoint blocks: connected components of a robustness graph."""

    space: StateSpace
    blocks: tuple[frozenset[int], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for block in self.blocks:
            if not block:
                raise InconsistentStructure("blocks must be nonempty")
            if seen & block:
                raise InconsistentStructure("blocks must be pairwise disjoint")
            seen |= block

    @property
    def union(self) -> frozenset[int]:
        return frozenset().union(*self.blocks) if self.blocks else frozenset()

    def block_index(self, x: StateLike) -> int:
        idx = self.space.as_index(x)
        for i, block in enumerate(self.blocks):
            if idx in block:
                return i
        raise KeyError(f"state {idx} outside the structure's support")

    def block_sizes(self) -> tuple[int, ...]:
        return tuple(sorted(len(b) for b in self.blocks))

    def _key(self):
        return (self.space.input_cardinalities, tuple(tuple(sorted(b)) for b in self.blocks))

    def __eq__(self, other) -> bool:
        return isinstance(other, RobustnessStructure) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())


def _structure_from_blocks(space: StateSpace, blocks: Iterable[Iterable[int]]) -> RobustnessStructure:
    ordered = tuple(
        sorted((frozenset(b) for b in blocks), key=lambda b: min(b))
    )
    return RobustnessStructure(space=space, blocks=ordered)


def structure_from_blocks(space: StateSpace, blocks: Iterable[Iterable[StateLike]]) -> RobustnessStructure:
    """Public constructor normalizing arbitrary state designators."""
    return _structure_from_blocks(
        space, [[space.as_index(x) for x in block] for block in blocks]
    )


def build_graph(spec: RobustnessSpec, subset: Iterable[StateLike]) -> RobustnessGraph:
    """Induced robustness graph on ``subset`` (the full graph for all states)."""
    vertices = _normalize_subset(spec.space, subset)
    adjacency: dict[int, set[int]] = {v: set() for v in vertices}
    for group in _cliques(spec, vertices):
        for v, w in itertools.combinations(group, 2):
            adjacency[v].add(w)
            adjacency[w].add(v)
    return RobustnessGraph(
        spec=spec,
        vertices=vertices,
        adjacency={v: frozenset(nbrs) for v, nbrs in adjacency.items()},
    )


def components_of_set(spec: RobustnessSpec, subset: Iterable[StateLike]) -> RobustnessStructure:
    """Connected components of the induced graph, without materializing edges."""
    vertices = _normalize_subset(spec.space, subset)
    pos = {v: i for i, v in enumerate(vertices)}
    uf = _UnionFind(len(vertices))
    for group in _cliques(spec, vertices):
        first = pos[group[0]]
        for v in group[1:]:
            uf.union(first, pos[v])
    blocks: dict[int, list[int]] = {}
    for v in vertices:
        blocks.setdefault(uf.find(pos[v]), []).append(v)
    return _structure_from_blocks(spec.space, blocks.values())


def connected_components(graph: RobustnessGraph) -> RobustnessStructure:
    """Blocks of the graph, ordered by smallest contained vertex."""
    return components_of_set(graph.spec, graph.vertices)


# -- maximality ----------------------------------------------------------------


def _neighbor_blocks(
    spec: RobustnessSpec,
    structure: RobustnessStructure,
    x: int,
) -> set[int]:
    """Indices of blocks containing a vertex adjacent to the outside state x."""
    space = spec.space
    xc = space.coords_of(x)
    hit: set[int] = set()
    for i, block in enumerate(structure.blocks):
        for v in block:
            vc = space.coords_of(v)
            for r, marker in spec.edge_pairs():
                nodes = tuple(sorted(r))
                xr = tuple(xc[j - 1] for j in nodes)
                if tuple(vc[j - 1] for j in nodes) != xr:
                    continue
                if marker == ALL or marker == xr:
                    hit.add(i)
                    break
            if i in hit:
                break
    return hit


def is_maximal(structure: RobustnessStructure, spec: RobustnessSpec) -> bool:
    """True iff adding any outside state merges at least two blocks.

    Evaluates both definitional forms (edge witnesses into two distinct
    blocks, and a strict drop in component count) and insists they agree.
    """
    support = sorted(structure.union)
    recomputed = components_of_set(spec, support)
    if recomputed.blocks != structure.blocks:
        raise InconsistentStructure(
            "blocks are not the connected components of the induced graph"
        )
    outside = [x for x in spec.space.states() if x not in structure.union]
    for x in outside:
        witness = len(_neighbor_blocks(spec, structure, x)) >= 2
        merged = components_of_set(spec, support + [x])
        drop = len(merged.blocks) < len(structure.blocks)
        if witness != drop:
            raise AssertionError(
                f"maximality conditions disagree at state {x}: "
                f"witness={witness} drop={drop}"
            )
        if not drop:
            return False
    return True


# -- fast enumeration over subsets ----------------------------------------------


def _cylinder_masks(spec: RobustnessSpec) -> list[int]:
    """Bit masks of the cylinder sets that generate all edges."""
    space = spec.space
    coords = [space.coords_of(v) for v in space.states()]
    masks: list[int] = []
    for r, marker in spec.edge_pairs():
        nodes = tuple(sorted(r))
        if marker == ALL:
            groups: dict[tuple[int, ...], int] = {}
            for v in space.states():
                key = tuple(coords[v][i - 1] for i in nodes)
                groups[key] = groups.get(key, 0) | (1 << v)
            masks.extend(m for m in groups.values() if m.bit_count() > 1)
        else:
            m = 0
            for v in space.states():
                if tuple(coords[v][i - 1] for i in nodes) == marker:
                    m |= 1 << v
            if m.bit_count() > 1:
                masks.append(m)
    return masks


def _neighbor_masks(size: int, cylinder_masks: list[int]) -> list[int]:
    nbr = [0] * size
    for m in cylinder_masks:
        rest = m
        while rest:
            bit = rest & -rest
            v = bit.bit_length() - 1
            nbr[v] |= m & ~bit
            rest ^= bit
    return nbr


def _mask_components(size: int, mask: int, cylinder_masks: list[int]) -> list[int]:
    """Masks of the connected components of the subset given as a bit mask."""
    parent = list(range(size))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for m in cylinder_masks:
        members = m & mask
        if members == 0 or members & (members - 1) == 0:
            continue
        bit = members & -members
        first = find(bit.bit_length() - 1)
        rest = members ^ bit
        while rest:
            b = rest & -rest
            r = find(b.bit_length() - 1)
            if r != first:
                parent[r] = first
            rest ^= b
    comps: dict[int, int] = {}
    rest = mask
    while rest:
        bit = rest & -rest
        v = bit.bit_length() - 1
        comps[find(v)] = comps.get(find(v), 0) | bit
        rest ^= bit
    return list(comps.values())


def _mask_is_maximal(
    size: int,
    mask: int,
    components: list[int],
    neighbor_masks: list[int],
) -> bool:
    outside = ((1 << size) - 1) & ~mask
    while outside:
        bit = outside & -outside
        x = bit.bit_length() - 1
        nbrs = neighbor_masks[x] & mask
        hits = 0
        for comp in components:
            if comp & nbrs:
                hits += 1
                if hits == 2:
                    break
        if hits < 2:
            return False
        outside ^= bit
    return True


def _structure_from_masks(space: StateSpace, components: list[int]) -> RobustnessStructure:
    blocks = []
    for comp in components:
        block = []
        while comp:
            bit = comp & -comp
            block.append(bit.bit_length() - 1)
            comp ^= bit
        blocks.append(block)
    return _structure_from_blocks(space, blocks)


def enumerate_maximal_structures(
    spec: RobustnessSpec,
    limit: Optional[int] = None,
    time_budget: Optional[float] = None,
    symmetry_reduction: bool = False,
) -> list[RobustnessStructure]:
    """All maximal structures, by exhaustive scan over vertex subsets.

    Ordered by support size then support tuple.  ``time_budget`` (seconds)
    raises EnumerationTimeout when exceeded; ``symmetry_reduction`` scans
    only orbit-minimal subsets and expands orbits afterwards, which changes
    nothing about the output.
    """
    space = spec.space
    size = space.size_in
    if size > ENUMERATION_GUARD:
        raise StateSpaceTooLarge(
            f"|input space| = {size} exceeds enumeration guard {ENUMERATION_GUARD}"
        )
    cylinders = _cylinder_masks(spec)
    neighbors = _neighbor_masks(size, cylinders)
    perms = _index_permutations(spec) if symmetry_reduction else None
    deadline = None if time_budget is None else time.monotonic() + time_budget

    found: list[RobustnessStructure] = []
    seen: set[RobustnessStructure] = set()
    order = sorted(range(1 << size), key=lambda m: (m.bit_count(), m))
    for i, mask in enumerate(order):
        if deadline is not None and i % 512 == 0 and time.monotonic() > deadline:
            raise EnumerationTimeout(f"time budget {time_budget}s exceeded")
        if perms is not None and any(_apply_perm_mask(mask, p) < mask for p in perms):
            continue
        components = _mask_components(size, mask, cylinders)
        if not _mask_is_maximal(size, mask, components, neighbors):
            continue
        structure = _structure_from_masks(space, components)
        candidates = [structure]
        if perms is not None:
            candidates = [
                _permute_structure(structure, p) for p in perms
            ]
        for cand in candidates:
            if cand not in seen:
                seen.add(cand)
                found.append(cand)
        if limit is not None and len(found) >= limit:
            found = found[:limit]
            break
    found.sort(key=lambda s: (len(s.union), tuple(sorted(s.union))))
    return found


def sample_maximal_structures(
    spec: RobustnessSpec,
    count: int,
    seed: int,
) -> list[RobustnessStructure]:
    """Distinct maximal structures found by randomized growth.

    Starting from a random subset, outside states that would not merge two
    blocks are absorbed until every remaining outside state would; the
    result is maximal by construction.
    """
    import random

    space = spec.space
    size = space.size_in
    cylinders = _cylinder_masks(spec)
    neighbors = _neighbor_masks(size, cylinders)
    rng = random.Random(seed)
    results: list[RobustnessStructure] = []
    seen: set[RobustnessStructure] = set()
    attempts = 0
    while len(results) < count and attempts < 50 * count:
        attempts += 1
        # sparse seeds produce many-block structures, dense seeds few-block ones
        start = rng.sample(range(size), rng.randint(1, size))
        mask = 0
        for v in start:
            mask |= 1 << v
        while True:
            components = _mask_components(size, mask, cylinders)
            absorbable = []
            outside = ((1 << size) - 1) & ~mask
            while outside:
                bit = outside & -outside
                x = bit.bit_length() - 1
                nbrs = neighbors[x] & mask
                hits = sum(1 for comp in components if comp & nbrs)
                if hits < 2:
                    absorbable.append(x)
                outside ^= bit
            if not absorbable:
                break
            mask |= 1 << rng.choice(absorbable)
        structure = _structure_from_masks(space, components)
        if structure not in seen:
            seen.add(structure)
            results.append(structure)
    results.sort(key=lambda s: (len(s.union), tuple(sorted(s.union))))
    return results


# -- symmetry -------------------------------------------------------------------


def _index_permutations(spec: RobustnessSpec) -> list[tuple[int, ...]]:
    """Input-space index permutations preserving a saturated spec.

    Combines axis permutations between equal-size alphabets that map the
    family of occurring node sets to itself, with arbitrary per-axis value
    permutations.
    """
    if not is_saturated(spec):
        raise NotSaturated("symmetry machinery requires a saturated specification")
    space = spec.space
    n = space.n
    cards = space.input_cardinalities
    occurring = spec.occurring_sets()
    axis_perms = []
    for tau in itertools.permutations(range(1, n + 1)):
        if any(cards[tau[i - 1] - 1] != cards[i - 1] for i in range(1, n + 1)):
            continue
        mapped = {frozenset(tau[i - 1] for i in r) for r in occurring}
        if mapped == set(occurring):
            axis_perms.append(tau)
    value_perm_choices = [
        list(itertools.permutations(range(d))) for d in cards
    ]
    tables: list[tuple[int, ...]] = []
    coords = [space.coords_of(v) for v in space.states()]
    for tau in axis_perms:
        for sigmas in itertools.product(*value_perm_choices):
            table = []
            for v in space.states():
                old = coords[v]
                new = tuple(
                    sigmas[i - 1][old[tau[i - 1] - 1]] for i in range(1, n + 1)
                )
                table.append(space.index_of(new))
            tables.append(tuple(table))
    return tables


def _apply_perm_mask(mask: int, perm: tuple[int, ...]) -> int:
    out = 0
    rest = mask
    while rest:
        bit = rest & -rest
        out |= 1 << perm[bit.bit_length() - 1]
        rest ^= bit
    return out


def _permute_structure(structure: RobustnessStructure, perm: tuple[int, ...]) -> RobustnessStructure:
    return _structure_from_blocks(
        structure.space, [[perm[v] for v in block] for block in structure.blocks]
    )


def symmetry_classes(
    spec: RobustnessSpec, sets: Iterable[Iterable[StateLike]]
) -> list[list[frozenset[int]]]:
    """Partition the given state sets into orbits of the spec's symmetries."""
    space = spec.space
    perms = _index_permutations(spec)
    normalized = [frozenset(space.as_index(x) for x in s) for s in sets]
    orbits: dict[tuple[int, ...], list[frozenset[int]]] = {}
    for s in normalized:
        images = {tuple(sorted(perm[v] for v in s)) for perm in perms}
        canonical = min(images)
        orbits.setdefault(canonical, []).append(s)
    return [orbits[key] for key in sorted(orbits)]


# -- counting bound, products, binary results -----------------------------------


def structure_size_bound(spec: RobustnessSpec, nodes: Iterable[int]) -> int:
    """Upper bound on the block count of any structure, via one node set R.

    The matched assignments on R contribute one potential block each; every
    unmatched assignment contributes at most one block per completion.
    """
    space = spec.space
    r = frozenset(space.subset_key(nodes))
    total = space.restriction_size(r)
    if r in spec.full_sets:
        matched = total
    else:
        matched = sum(1 for s, _ in spec.explicit if s == r)
    complement = [i for i in space.nodes() if i not in r]
    return matched + (total - matched) * prod(space.cardinalities[i] for i in complement)


def check_product_structure(structure: RobustnessStructure) -> bool:
    """True iff every block is an axis-aligned product and the axes are covered."""
    space = structure.space
    covered = [set() for _ in range(space.n)]
    for block in structure.blocks:
        coords = [space.coords_of(v) for v in block]
        axes = [sorted({c[i] for c in coords}) for i in range(space.n)]
        if prod(len(a) for a in axes) != len(block):
            return False
        for i, axis in enumerate(axes):
            covered[i].update(axis)
    return all(
        covered[i] == set(range(space.cardinalities[i + 1])) for i in range(space.n)
    )


def _set_partitions(items: list[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def fink_maximal_structures(d1: int, d2: int) -> list[RobustnessStructure]:
    """Maximal single-survivor structures for two inputs, built directly.

    Blocks are products S_1 x S_2 of disjoint value groups covering both
    alphabets; every matching of equal-size partitions of the two alphabets
    yields exactly one structure.
    """
    if d1 > FINK_GUARD or d2 > FINK_GUARD:
        raise StateSpaceTooLarge(f"alphabet sizes {d1},{d2} exceed guard {FINK_GUARD}")
    space = make_state_space([1, d1, d2])
    results = []
    partitions1 = [sorted((sorted(p) for p in part), key=lambda p: p[0])
                   for part in _set_partitions(list(range(d1)))]
    partitions2 = [sorted((sorted(p) for p in part), key=lambda p: p[0])
                   for part in _set_partitions(list(range(d2)))]
    for p1 in partitions1:
        for p2 in partitions2:
            if len(p1) != len(p2):
                continue
            for match in itertools.permutations(range(len(p2))):
                blocks = []
                for j, part1 in enumerate(p1):
                    part2 = p2[match[j]]
                    blocks.append(
                        [space.index_of((a, b)) for a in part1 for b in part2]
                    )
                results.append(_structure_from_blocks(space, blocks))
    results.sort(key=lambda s: (len(s.union), tuple(sorted(s.union)),
                                tuple(tuple(sorted(b)) for b in s.blocks)))
    return results


def smallk_connectivity_check(structure: RobustnessStructure, k: int) -> bool:
    """Check each block stays connected under every weaker uniform level s.

    Applies to binary inputs and levels s up to n - 2k + 1.
    """
    space = structure.space
    if any(d != 2 for d in space.input_cardinalities):
        raise NotBinary("connectivity check requires binary inputs")
    smax = min(space.n, space.n - 2 * k + 1)
    for s in range(1, smax + 1):
        spec_s = make_rk_spec(space, s)
        for block in structure.blocks:
            if len(components_of_set(spec_s, block).blocks) > 1:
                return False
    return True


# -- singleton codes -------------------------------------------------------------


def max_singleton_code_size(n: int, k: int, d: int) -> int:
    """Largest set of words pairwise at Hamming distance >= n - k + 1.

    Exact branch and bound; words are length-n strings over a size-d
    alphabet.  Such sets are the structures whose blocks are all singletons.
    """
    if d ** n > CODE_GUARD:
        raise StateSpaceTooLarge(f"{d}^{n} exceeds guard {CODE_GUARD}")
    distance = n - k + 1
    if distance <= 1:
        return d ** n
    if distance > n:
        return 1

    words = list(itertools.product(range(d), repeat=n))

    def dist(a, b) -> int:
        return sum(1 for x, y in zip(a, b) if x != y)

    # relabeling values per coordinate is distance-preserving, so some
    # maximum code contains the all-zero word
    zero = words[0]
    candidates = [w for w in words if dist(w, zero) >= distance]

    best = 1

    def extend(chosen_size: int, cands: list) -> None:
        nonlocal best
        if chosen_size > best:
            best = chosen_size
        for i, w in enumerate(cands):
            if chosen_size + len(cands) - i <= best:
                return
            extend(
                chosen_size + 1,
                [u for u in cands[i + 1 :] if dist(u, w) >= distance],
            )

    extend(1, candidates)
    return best


def rk_hamming_adjacent(space: StateSpace, k: int, x: StateLike, y: StateLike) -> bool:
    """Uniform-level adjacency via Hamming distance, for equal alphabets.

    Agreement on some k nodes is the same as disagreement on at most n - k,
    which is cheaper to test than scanning pairs.
    """
    if len(set(space.input_cardinalities)) != 1:
        raise NotBinary("hamming shortcut requires equal input alphabets")
    xc = space.coords_of(space.as_index(x))
    yc = space.coords_of(space.as_index(y))
    if xc == yc:
        return False
    return sum(1 for a, b in zip(xc, yc) if a != b) <= space.n - k


# -- export ----------------------------------------------------------------------

_CLUSTER_COLORS = (
    "#a6cee3", "#b2df8a", "#fb9a99", "#fdbf6f",
    "#cab2d6", "#ffff99", "#1f78b4", "#33a02c",
)


def export_dot(graph: RobustnessGraph, structure: Optional[RobustnessStructure] = None) -> str:
    """Graphviz text, vertices labeled by coordinates, blocks as clusters."""
    space = graph.space
    lines = ["graph G {"]
    if graph.vertices:
        lines.append("  node [shape=circle];")

    def node_line(v: int, indent: str) -> str:
        label = ",".join(str(c) for c in space.coords_of(v))
        return f'{indent}"{v}" [label="{label}"];'

    clustered: set[int] = set()
    if structure is not None:
        for i, block in enumerate(structure.blocks):
            lines.append(f"  subgraph cluster_{i} {{")
            lines.append(f'    style=filled; color="{_CLUSTER_COLORS[i % len(_CLUSTER_COLORS)]}";')
            for v in sorted(block):
                lines.append(node_line(v, "    "))
                clustered.add(v)
            lines.append("  }")
    for v in graph.vertices:
        if v not in clustered:
            lines.append(node_line(v, "  "))
    for v, w in graph.edges():
        lines.append(f'  "{v}" -- "{w}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- JSON ------------------------------------------------------------------------


def structure_to_json(structure: RobustnessStructure) -> str:
    doc = {"blocks": [sorted(b) for b in structure.blocks]}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def structure_from_json(space: StateSpace, text: str) -> RobustnessStructure:
    doc = json.loads(text)
    return structure_from_blocks(space, doc["blocks"])
