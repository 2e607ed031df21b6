"""Finite product state spaces with dense row-major indexing.

Node 0 is the output node, nodes 1..n are inputs.  Input states are indexed
row-major with node 1 slowest, so index(x) = x_1*d_2*...*d_n + ... + x_n.
The same convention applies to restricted spaces X_A for A a sorted subset
of input nodes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod
from typing import Iterable, Iterator, Sequence, Union

from .errors import InvalidCardinality, InvalidNode, InvalidValue


@dataclass(frozen=True)
class StateSpace:
    """Alphabet sizes (d_0, d_1, ..., d_n); d_0 is the output alphabet."""

    cardinalities: tuple[int, ...]

    def __post_init__(self):
        if len(self.cardinalities) < 2:
            raise InvalidCardinality(
                "need an output node and at least one input node, got "
                f"{list(self.cardinalities)}"
            )
        for d in self.cardinalities:
            if not isinstance(d, int) or d < 1:
                raise InvalidCardinality(f"cardinalities must be integers >= 1, got {d!r}")

    @property
    def d0(self) -> int:
        return self.cardinalities[0]

    @property
    def n(self) -> int:
        return len(self.cardinalities) - 1

    @property
    def input_cardinalities(self) -> tuple[int, ...]:
        return self.cardinalities[1:]

    @property
    def size_in(self) -> int:
        return prod(self.input_cardinalities)

    def nodes(self) -> tuple[int, ...]:
        return tuple(range(1, self.n + 1))

    def check_node(self, node: int) -> None:
        if not 1 <= node <= self.n:
            raise InvalidNode(f"node {node} outside 1..{self.n}")

    def check_value(self, node: int, value: int) -> None:
        self.check_node(node)
        if not 0 <= value < self.cardinalities[node]:
            raise InvalidValue(
                f"value {value} outside alphabet of node {node} "
                f"(size {self.cardinalities[node]})"
            )

    # -- full input states ------------------------------------------------

    def index_of(self, coords: Sequence[int]) -> int:
        if len(coords) != self.n:
            raise InvalidValue(f"expected {self.n} coordinates, got {len(coords)}")
        idx = 0
        for node, value in enumerate(coords, start=1):
            self.check_value(node, value)
            idx = idx * self.cardinalities[node] + value
        return idx

    def coords_of(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.size_in:
            raise InvalidValue(f"state index {index} outside 0..{self.size_in - 1}")
        coords = []
        for d in reversed(self.input_cardinalities):
            coords.append(index % d)
            index //= d
        return tuple(reversed(coords))

    def as_index(self, state: "StateLike") -> int:
        """Normalize an index, coordinate tuple, or InputState to an index."""
        if isinstance(state, InputState):
            return state.index
        if isinstance(state, int):
            if not 0 <= state < self.size_in:
                raise InvalidValue(f"state index {state} outside 0..{self.size_in - 1}")
            return state
        return self.index_of(tuple(state))

    def state(self, state: "StateLike") -> "InputState":
        idx = self.as_index(state)
        return InputState(space=self, index=idx, coordinates=self.coords_of(idx))

    def states(self) -> range:
        return range(self.size_in)

    # -- restricted spaces X_A --------------------------------------------

    def subset_key(self, nodes: Iterable[int]) -> tuple[int, ...]:
        key = tuple(sorted(set(nodes)))
        for node in key:
            self.check_node(node)
        return key

    def restriction_size(self, nodes: Iterable[int]) -> int:
        return prod(self.cardinalities[i] for i in self.subset_key(nodes))

    def restricted_index_of(self, nodes: Sequence[int], values: Sequence[int]) -> int:
        """Index of the partial assignment ``values`` (aligned with sorted nodes)."""
        key = self.subset_key(nodes)
        if len(values) != len(key):
            raise InvalidValue(f"expected {len(key)} values for {key}, got {len(values)}")
        idx = 0
        for node, value in zip(key, values):
            self.check_value(node, value)
            idx = idx * self.cardinalities[node] + value
        return idx

    def restricted_values_of(self, nodes: Sequence[int], index: int) -> tuple[int, ...]:
        key = self.subset_key(nodes)
        values = []
        for node in reversed(key):
            d = self.cardinalities[node]
            values.append(index % d)
            index //= d
        return tuple(reversed(values))

    def restrict_coords(self, coords: Sequence[int], nodes: Sequence[int]) -> tuple[int, ...]:
        key = self.subset_key(nodes)
        return tuple(coords[node - 1] for node in key)

    def restricted_index(self, state: "StateLike", nodes: Sequence[int]) -> int:
        """Index into X_A of the restriction x|_A of a full input state."""
        coords = self.coords_of(self.as_index(state))
        key = self.subset_key(nodes)
        idx = 0
        for node in key:
            idx = idx * self.cardinalities[node] + coords[node - 1]
        return idx

    def assignments(self, nodes: Sequence[int]) -> Iterator[tuple[int, ...]]:
        """All partial assignments on ``nodes``, in restricted-index order."""
        key = self.subset_key(nodes)
        return itertools.product(*(range(self.cardinalities[i]) for i in key))


@dataclass(frozen=True)
class InputState:
    """A joint input state, carrying both views of itself."""

    space: StateSpace
    index: int
    coordinates: tuple[int, ...]

    def restrict(self, nodes: Sequence[int]) -> tuple[int, ...]:
        return self.space.restrict_coords(self.coordinates, nodes)


StateLike = Union[int, Sequence[int], InputState]


@dataclass(frozen=True)
class CylinderSet:
    """All input states agreeing with a partial assignment on a node set."""

    space: StateSpace
    nodes: tuple[int, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        key = self.space.subset_key(self.nodes)
        if key != self.nodes:
            raise InvalidNode(f"nodes must be sorted and unique, got {self.nodes}")
        if len(self.values) != len(key):
            raise InvalidValue(f"expected {len(key)} values, got {len(self.values)}")
        for node, value in zip(key, self.values):
            self.space.check_value(node, value)

    def __len__(self) -> int:
        free = [i for i in self.space.nodes() if i not in set(self.nodes)]
        return prod(self.space.cardinalities[i] for i in free)

    def contains(self, state: StateLike) -> bool:
        coords = self.space.coords_of(self.space.as_index(state))
        return all(coords[node - 1] == value for node, value in zip(self.nodes, self.values))

    def indices(self) -> tuple[int, ...]:
        space = self.space
        fixed = dict(zip(self.nodes, self.values))
        axes = [
            [fixed[i]] if i in fixed else range(space.cardinalities[i])
            for i in space.nodes()
        ]
        return tuple(space.index_of(c) for c in itertools.product(*axes))


def make_state_space(cardinalities: Sequence[int]) -> StateSpace:
    """Build a state space from (d_0, d_1, ..., d_n)."""
    return StateSpace(cardinalities=tuple(cardinalities))
