"""Robustness specifications: sets of (node subset, partial assignment) pairs.

A pair (R, x_R) demands that the system behave identically on every input
state agreeing with x_R on R, i.e. that knocking out the nodes outside R is
harmless whenever R sits in state x_R.  Specifications that pair some R with
every assignment are stored as compact ALL markers instead of exponentially
many explicit pairs.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

from .errors import InvalidK, InvalidValue, NotSaturated
from .spaces import StateLike, StateSpace, make_state_space

ALL = "ALL"

Pair = tuple[frozenset[int], tuple[int, ...]]


@dataclass(frozen=True)
class RobustnessSpec:
    space: StateSpace
    full_sets: frozenset[frozenset[int]] = field(default_factory=frozenset)
    explicit: frozenset[Pair] = field(default_factory=frozenset)

    @staticmethod
    def from_pairs(
        space: StateSpace,
        pairs: Iterable[tuple[Iterable[int], Union[Sequence[int], str]]],
    ) -> "RobustnessSpec":
        """Build a spec, deduplicating and promoting complete groups to ALL.

        Each pair is (node iterable, value sequence) or (node iterable, "ALL").
        Values align with the nodes sorted ascending.
        """
        full: set[frozenset[int]] = set()
        explicit: set[Pair] = set()
        for nodes, values in pairs:
            key = space.subset_key(nodes)
            if isinstance(values, str):
                if values != ALL:
                    raise InvalidValue(f"unknown assignment marker {values!r}")
                full.add(frozenset(key))
                continue
            vals = tuple(values)
            for node, value in zip(key, vals):
                space.check_value(node, value)
            if len(vals) != len(key):
                raise InvalidValue(f"expected {len(key)} values for {key}, got {len(vals)}")
            explicit.add((frozenset(key), vals))
        # promote explicit groups that cover the whole restricted space
        by_set: dict[frozenset[int], set[tuple[int, ...]]] = {}
        for r, vals in explicit:
            by_set.setdefault(r, set()).add(vals)
        for r, group in by_set.items():
            if len(group) == space.restriction_size(r):
                full.add(r)
        explicit = {(r, v) for r, v in explicit if r not in full}
        return RobustnessSpec(space=space, full_sets=frozenset(full), explicit=frozenset(explicit))

    # -- queries -----------------------------------------------------------

    def occurring_sets(self) -> frozenset[frozenset[int]]:
        return self.full_sets | {r for r, _ in self.explicit}

    def contains(self, nodes: Iterable[int], values: Sequence[int]) -> bool:
        r = frozenset(self.space.subset_key(nodes))
        return r in self.full_sets or (r, tuple(values)) in self.explicit

    def pairs(self) -> Iterator[Pair]:
        """All pairs, expanding ALL markers; deterministic order."""
        for r in sorted(self.full_sets, key=_set_key):
            nodes = tuple(sorted(r))
            for values in self.space.assignments(nodes):
                yield r, values
        for r, values in sorted(self.explicit, key=lambda p: (_set_key(p[0]), p[1])):
            yield r, values

    def pair_count(self) -> int:
        return sum(self.space.restriction_size(r) for r in self.full_sets) + len(self.explicit)

    def is_empty(self) -> bool:
        return not self.full_sets and not self.explicit

    def edge_pairs(self) -> Iterator[Union[tuple[frozenset[int], str], Pair]]:
        """Pairs that can contribute graph edges, dominated ones dropped.

        A pair is dominated when its cylinder set lies inside the cylinder
        set of another pair, in which case it adds no new edges.  ALL markers
        are yielded as (R, "ALL").
        """
        full = sorted(self.full_sets, key=_set_key)
        minimal_full = [
            r for r in full if not any(s < r for s in self.full_sets)
        ]
        for r in minimal_full:
            yield r, ALL
        for r, values in sorted(self.explicit, key=lambda p: (_set_key(p[0]), p[1])):
            if any(s < r for s in self.full_sets):
                continue
            if any(
                s < r and vs == tuple(values[sorted(r).index(i)] for i in sorted(s))
                for s, vs in self.explicit
            ):
                continue
            yield r, values


def _set_key(r: frozenset[int]) -> tuple:
    return (len(r), tuple(sorted(r)))


# -- constructors ------------------------------------------------------------


def make_rk_spec(space: StateSpace, k: int) -> RobustnessSpec:
    """Spec demanding robustness to knockout of all but any >= k inputs."""
    if not 0 <= k <= space.n:
        raise InvalidK(f"k={k} outside 0..{space.n}")
    full = frozenset(
        frozenset(c)
        for size in range(k, space.n + 1)
        for c in itertools.combinations(space.nodes(), size)
    )
    return RobustnessSpec(space=space, full_sets=full)


def make_canalyzing_spec(space: StateSpace, node: int, value: int) -> RobustnessSpec:
    """Spec of a function forced constant once ``node`` takes ``value``."""
    space.check_value(node, value)
    pairs = []
    others = [i for i in space.nodes() if i != node]
    for size in range(0, len(others) + 1):
        for extra in itertools.combinations(others, size):
            nodes = tuple(sorted((node,) + extra))
            pos = nodes.index(node)
            for rest in itertools.product(*(range(space.cardinalities[i]) for i in nodes if i != node)):
                values = rest[:pos] + (value,) + rest[pos:]
                pairs.append((nodes, values))
    return RobustnessSpec.from_pairs(space, pairs)


def make_nested_canalyzing_spec(space: StateSpace, canalyzing_values: Sequence[int]) -> RobustnessSpec:
    """Spec of a nested cascade: node 1 decides at a_1, else node 2 at a_2, ..."""
    values = tuple(canalyzing_values)
    if len(values) != space.n:
        raise InvalidValue(f"expected {space.n} canalyzing values, got {len(values)}")
    for node, value in enumerate(values, start=1):
        space.check_value(node, value)
    pairs = []
    for k in range(1, space.n + 1):
        head = tuple(range(1, k + 1))
        tail_nodes = tuple(range(k + 1, space.n + 1))
        for size in range(0, len(tail_nodes) + 1):
            for extra in itertools.combinations(tail_nodes, size):
                nodes = head + extra
                head_choices = [
                    [v for v in range(space.cardinalities[i]) if v != values[i - 1]]
                    for i in range(1, k)
                ]
                head_choices.append([values[k - 1]])
                tail_choices = [range(space.cardinalities[i]) for i in extra]
                for combo in itertools.product(*head_choices, *tail_choices):
                    pairs.append((nodes, tuple(combo)))
    return RobustnessSpec.from_pairs(space, pairs)


# -- coherence and saturation -------------------------------------------------


def _strict_supersets(space: StateSpace, r: frozenset[int]) -> Iterator[frozenset[int]]:
    """Subsets R' with R < R' < [n]."""
    others = [i for i in space.nodes() if i not in r]
    for size in range(1, len(others)):
        for extra in itertools.combinations(others, size):
            yield r | frozenset(extra)


def _extensions(space: StateSpace, r: frozenset[int], values: tuple[int, ...],
                rprime: frozenset[int]) -> Iterator[tuple[int, ...]]:
    """All assignments on rprime agreeing with ``values`` on r."""
    key = tuple(sorted(rprime))
    fixed = dict(zip(sorted(r), values))
    choices = [
        [fixed[i]] if i in fixed else range(space.cardinalities[i]) for i in key
    ]
    return itertools.product(*choices)


def _covers_all(spec: RobustnessSpec, r: frozenset[int]) -> bool:
    if r in spec.full_sets:
        return True
    count = sum(1 for s, _ in spec.explicit if s == r)
    return count == spec.space.restriction_size(r)


def is_coherent(spec: RobustnessSpec) -> bool:
    """True iff every pair's extensions to strictly larger proper R' are present."""
    space = spec.space
    for r in spec.full_sets:
        for rp in _strict_supersets(space, r):
            if not _covers_all(spec, rp):
                return False
    for r, values in spec.explicit:
        for rp in _strict_supersets(space, r):
            if rp in spec.full_sets:
                continue
            for ext in _extensions(space, r, values, rp):
                if (rp, ext) not in spec.explicit:
                    return False
    return True


def coherent_closure(spec: RobustnessSpec) -> RobustnessSpec:
    """Smallest coherent spec containing ``spec``."""
    space = spec.space
    full = set(spec.full_sets)
    explicit = set(spec.explicit)
    for r in spec.full_sets:
        for rp in _strict_supersets(space, r):
            full.add(rp)
    for r, values in spec.explicit:
        for rp in _strict_supersets(space, r):
            for ext in _extensions(space, r, values, rp):
                explicit.add((rp, ext))
    pairs = [(tuple(sorted(r)), ALL) for r in full]
    pairs += [(tuple(sorted(r)), v) for r, v in explicit]
    return RobustnessSpec.from_pairs(space, pairs)


def is_saturated(spec: RobustnessSpec) -> bool:
    """True iff every occurring R occurs with every assignment."""
    return not spec.explicit


# -- derived families ----------------------------------------------------------


def r_min(spec: RobustnessSpec, x: StateLike) -> frozenset[frozenset[int]]:
    """Inclusion-minimal surviving sets binding at x; {[n]} when none bind."""
    space = spec.space
    coords = space.coords_of(space.as_index(x))
    binding = [
        r for r in spec.occurring_sets()
        if spec.contains(sorted(r), space.restrict_coords(coords, sorted(r)))
    ]
    if not binding:
        return frozenset({frozenset(space.nodes())})
    return frozenset(
        r for r in binding if not any(s < r for s in binding)
    )


@dataclass(frozen=True)
class DeltaFamily:
    """Downward-closed family of node subsets, with restriction lookups."""

    members: frozenset[frozenset[int]]

    def __contains__(self, c) -> bool:
        return frozenset(c) in self.members

    def __iter__(self):
        return iter(sorted(self.members, key=_set_key))

    def __len__(self) -> int:
        return len(self.members)

    def of(self, c: Iterable[int]) -> frozenset[frozenset[int]]:
        """Members contained in c."""
        cset = frozenset(c)
        return frozenset(b for b in self.members if b <= cset)


def delta_family(spec: RobustnessSpec) -> DeltaFamily:
    """Downward closure of the minimal binding sets of a saturated spec."""
    if not is_saturated(spec):
        raise NotSaturated("delta_family requires a saturated specification")
    minimal = r_min(spec, 0) if spec.space.size_in > 0 else frozenset()
    members: set[frozenset[int]] = set()
    for r in minimal:
        nodes = tuple(sorted(r))
        for size in range(0, len(nodes) + 1):
            for c in itertools.combinations(nodes, size):
                members.add(frozenset(c))
    return DeltaFamily(members=frozenset(members))


# -- JSON ----------------------------------------------------------------------


def spec_to_json(spec: RobustnessSpec) -> str:
    pairs = []
    for r in sorted(spec.full_sets, key=_set_key):
        pairs.append({"R": sorted(r), "x": ALL})
    for r, values in sorted(spec.explicit, key=lambda p: (_set_key(p[0]), p[1])):
        pairs.append({"R": sorted(r), "x": list(values)})
    doc = {"cardinalities": list(spec.space.cardinalities), "pairs": pairs}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def spec_from_json(text: str) -> RobustnessSpec:
    doc = json.loads(text)
    space = make_state_space(doc["cardinalities"])
    pairs = [(p["R"], p["x"]) for p in doc["pairs"]]
    return RobustnessSpec.from_pairs(space, pairs)
