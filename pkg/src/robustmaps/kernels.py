"""Stochastic maps, deterministic maps, and post-knockout families.

A stochastic map assigns each state of its domain a distribution over the
output alphabet.  A family with one member per surviving input subset A
describes the system under every possible knockout; the full-domain member
is the unperturbed system.

Entries are exact rationals by default; float mode compares rows with a
tolerance (1e-9 unless overridden).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .errors import InvalidValue, NotConstantOnBlock
from .spaces import StateLike, StateSpace, make_state_space
from .specs import RobustnessSpec
from .structures import RobustnessStructure, components_of_set

DEFAULT_TOL = 1e-9

Row = tuple


def _is_exact(value) -> bool:
    return isinstance(value, (int, Fraction))


@dataclass(frozen=True)
class StochasticMap:
    """Row-stochastic kernel from states of X_domain to the output alphabet."""

    space: StateSpace
    domain: tuple[int, ...]
    rows: tuple[Row, ...]
    mode: str = "rational"
    defective_rows: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        expected = self.space.restriction_size(self.domain)
        if len(self.rows) != expected:
            raise InvalidValue(f"expected {expected} rows for domain {self.domain}")
        for i, row in enumerate(self.rows):
            if len(row) != self.space.d0:
                raise InvalidValue(f"row {i} has length {len(row)}, want {self.space.d0}")
            if any(v < 0 for v in row):
                raise InvalidValue(f"negative entry in row {i}")
            total = sum(row)
            if i in self.defective_rows:
                if any(v != 0 for v in row):
                    raise InvalidValue(f"defective row {i} must be all zero")
                continue
            if self.mode == "rational":
                if total != 1:
                    raise InvalidValue(f"row {i} sums to {total}, not 1")
            elif abs(total - 1.0) > 1e-12:
                raise InvalidValue(f"row {i} sums to {total!r}")

    @staticmethod
    def from_rows(
        space: StateSpace,
        domain: Iterable[int],
        rows: Sequence[Sequence],
        defective_rows: Iterable[int] = (),
    ) -> "StochasticMap":
        key = space.subset_key(domain)
        tup = tuple(tuple(row) for row in rows)
        exact = all(_is_exact(v) for row in tup for v in row)
        return StochasticMap(
            space=space,
            domain=key,
            rows=tup,
            mode="rational" if exact else "float",
            defective_rows=frozenset(defective_rows),
        )

    def row(self, state_in_domain) -> Row:
        """Row for a state of X_domain (index or value tuple)."""
        if isinstance(state_in_domain, int):
            return self.rows[state_in_domain]
        return self.rows[self.space.restricted_index_of(self.domain, state_in_domain)]

    def row_at(self, state: StateLike) -> Row:
        """Row for the restriction of a full input state to the domain."""
        return self.rows[self.space.restricted_index(state, self.domain)]

    def is_full_domain(self) -> bool:
        return self.domain == self.space.nodes()

    def strictly_positive(self) -> bool:
        return all(v > 0 for row in self.rows for v in row)


def rows_equal(a: Row, b: Row, mode: str, tol: float = DEFAULT_TOL) -> bool:
    if mode == "rational":
        return tuple(a) == tuple(b)
    return max(abs(x - y) for x, y in zip(a, b)) <= tol


def uniform_map(space: StateSpace, domain: Iterable[int] = ()) -> StochasticMap:
    d0 = space.d0
    row = tuple(Fraction(1, d0) for _ in range(d0))
    size = space.restriction_size(domain)
    return StochasticMap.from_rows(space, domain, [row] * size)


def constant_map(space: StateSpace, domain: Iterable[int], row: Sequence) -> StochasticMap:
    size = space.restriction_size(domain)
    return StochasticMap.from_rows(space, domain, [tuple(row)] * size)


@dataclass(frozen=True)
class FunctionalModalities:
    """One stochastic map per surviving input subset; all 2^n present."""

    space: StateSpace
    members: Mapping[frozenset[int], StochasticMap]
    degenerate_rows: tuple = ()

    def __post_init__(self):
        expected = 1 << self.space.n
        if len(self.members) != expected:
            raise InvalidValue(f"family needs {expected} members, got {len(self.members)}")
        for a, kernel in self.members.items():
            if kernel.domain != tuple(sorted(a)):
                raise InvalidValue(f"member for {sorted(a)} has domain {kernel.domain}")

    @staticmethod
    def from_members(
        space: StateSpace,
        members: Mapping[Iterable[int], StochasticMap],
        degenerate_rows: tuple = (),
    ) -> "FunctionalModalities":
        normalized = {frozenset(space.subset_key(a)): m for a, m in members.items()}
        return FunctionalModalities(
            space=space, members=normalized, degenerate_rows=degenerate_rows
        )

    def member(self, nodes: Iterable[int]) -> StochasticMap:
        return self.members[frozenset(self.space.subset_key(nodes))]

    @property
    def full(self) -> StochasticMap:
        return self.member(self.space.nodes())

    @property
    def mode(self) -> str:
        return "rational" if all(m.mode == "rational" for m in self.members.values()) else "float"

    def subsets(self) -> list[frozenset[int]]:
        return sorted(self.members, key=lambda a: (len(a), tuple(sorted(a))))

    def strictly_positive(self) -> bool:
        return all(m.strictly_positive() for m in self.members.values())


def all_subsets(space: StateSpace) -> list[tuple[int, ...]]:
    nodes = space.nodes()
    return [
        c for size in range(space.n + 1) for c in itertools.combinations(nodes, size)
    ]


@dataclass(frozen=True)
class DeterministicMap:
    """Total function from input states to output symbols, as a dense table."""

    space: StateSpace
    table: tuple[int, ...]

    def __post_init__(self):
        if len(self.table) != self.space.size_in:
            raise InvalidValue(f"table length {len(self.table)} != {self.space.size_in}")
        for value in self.table:
            if not 0 <= value < self.space.d0:
                raise InvalidValue(f"output value {value} outside alphabet")

    def __call__(self, state: StateLike) -> int:
        return self.table[self.space.as_index(state)]


def from_function(f: DeterministicMap) -> StochasticMap:
    """0/1 kernel putting all mass on the function value."""
    space = f.space
    rows = []
    for x in space.states():
        row = [Fraction(0)] * space.d0
        row[f.table[x]] = Fraction(1)
        rows.append(tuple(row))
    return StochasticMap.from_rows(space, space.nodes(), rows)


# -- robustness predicates -------------------------------------------------------


def is_r_robust_map(
    kappa: StochasticMap,
    spec: RobustnessSpec,
    subset: Iterable[StateLike],
    tol: float = DEFAULT_TOL,
) -> bool:
    """True iff the kernel is constant across states tied together on the set.

    Checks constancy per matched cylinder slice and per connected component
    and insists the two verdicts agree.
    """
    space = spec.space
    if not kappa.is_full_domain():
        raise InvalidValue("robustness predicate needs the full-domain kernel")
    vertices = sorted({space.as_index(x) for x in subset})

    per_pair = True
    witness = None
    for r, values in spec.pairs():
        nodes = tuple(sorted(r))
        slice_states = [
            v for v in vertices
            if tuple(space.coords_of(v)[i - 1] for i in nodes) == values
        ]
        for other in slice_states[1:]:
            if not rows_equal(kappa.rows[slice_states[0]], kappa.rows[other], kappa.mode, tol):
                per_pair = False
                witness = (slice_states[0], other)
                break
        if not per_pair:
            break

    per_component = True
    structure = components_of_set(spec, vertices)
    for block in structure.blocks:
        states = sorted(block)
        for other in states[1:]:
            if not rows_equal(kappa.rows[states[0]], kappa.rows[other], kappa.mode, tol):
                per_component = False
                break
        if not per_component:
            break

    if per_pair != per_component:
        raise AssertionError(
            f"cylinder and component constancy disagree (witness {witness})"
        )
    return per_component


def is_r_robust_modalities(
    modalities: FunctionalModalities,
    spec: RobustnessSpec,
    subset: Iterable[StateLike],
    tol: float = DEFAULT_TOL,
) -> bool:
    """True iff the full member matches each surviving member where required."""
    space = spec.space
    full = modalities.full
    mode = modalities.mode
    for x in subset:
        idx = space.as_index(x)
        coords = space.coords_of(idx)
        for r in spec.occurring_sets():
            nodes = tuple(sorted(r))
            xr = tuple(coords[i - 1] for i in nodes)
            if not spec.contains(nodes, xr):
                continue
            if not rows_equal(
                full.rows[idx], modalities.member(nodes).row(xr), mode, tol
            ):
                return False
    return True


def is_canalyzing(f: DeterministicMap, nodes: Iterable[int], values: Sequence[int]) -> bool:
    """True iff the function is constant on the cylinder of the assignment."""
    space = f.space
    key = space.subset_key(nodes)
    states = [
        x for x in space.states()
        if tuple(space.coords_of(x)[i - 1] for i in key) == tuple(values)
    ]
    return len({f.table[x] for x in states}) <= 1


def is_r_canalyzing(f: DeterministicMap, spec: RobustnessSpec) -> bool:
    return all(is_canalyzing(f, tuple(sorted(r)), values) for r, values in spec.pairs())


# -- factorization and block-built families ---------------------------------------


def factorize_through_structure(
    kappa: StochasticMap,
    structure: RobustnessStructure,
    tol: float = DEFAULT_TOL,
) -> dict[int, Row]:
    """Per-block output distributions; fails with a witness pair otherwise."""
    out: dict[int, Row] = {}
    for i, block in enumerate(structure.blocks):
        states = sorted(block)
        pivot = kappa.rows[states[0]]
        for other in states[1:]:
            if not rows_equal(pivot, kappa.rows[other], kappa.mode, tol):
                raise NotConstantOnBlock(
                    f"rows differ inside block {i}",
                    witness=(states[0], other),
                )
        out[i] = pivot
    return out


def robust_modalities_from_blocks(
    spec: RobustnessSpec,
    structure: RobustnessStructure,
    block_rows: Sequence[Row],
    fill_row: Optional[Row] = None,
    fill: Optional[Callable[[tuple[int, ...], tuple[int, ...]], Row]] = None,
) -> FunctionalModalities:
    """Family robust on the structure's support, one output row per block.

    Members inherit the block row wherever the specification pins them down;
    unconstrained entries take ``fill_row`` or the ``fill`` callback (domain,
    assignment) -> row; default is uniform.
    """
    space = spec.space
    if len(block_rows) != len(structure.blocks):
        raise InvalidValue("need exactly one output row per block")
    support = structure.union
    d0 = space.d0
    uniform_row = tuple(Fraction(1, d0) for _ in range(d0))

    def default(domain, values):
        if fill is not None:
            return tuple(fill(domain, values))
        return tuple(fill_row) if fill_row is not None else uniform_row

    members = {}
    for domain in all_subsets(space):
        if domain == space.nodes():
            continue
        rows = []
        for values in space.assignments(domain):
            row = None
            if spec.contains(domain, values):
                in_support = [
                    x for x in support
                    if space.restrict_coords(space.coords_of(x), domain) == values
                ]
                if in_support:
                    row = block_rows[structure.block_index(in_support[0])]
            rows.append(row if row is not None else default(domain, values))
        members[frozenset(domain)] = StochasticMap.from_rows(space, domain, rows)
    full_rows = [
        block_rows[structure.block_index(x)]
        if x in support
        else default(space.nodes(), space.coords_of(x))
        for x in space.states()
    ]
    members[frozenset(space.nodes())] = StochasticMap.from_rows(
        space, space.nodes(), full_rows
    )
    return FunctionalModalities.from_members(space, members)


# -- single-kernel view of a family ------------------------------------------------


def hat_kappa(modalities: FunctionalModalities) -> StochasticMap:
    """One kernel over inputs extended with a knockout symbol per node.

    Each input alphabet gains one extra value (the last index) standing for
    "knocked out"; the row for an extended state is the row of the member
    for the surviving nodes.
    """
    space = modalities.space
    extended = make_state_space(
        [space.d0] + [d + 1 for d in space.input_cardinalities]
    )
    rows = []
    for y in extended.states():
        coords = extended.coords_of(y)
        surviving = tuple(
            i for i in extended.nodes() if coords[i - 1] != space.cardinalities[i]
        )
        values = tuple(coords[i - 1] for i in surviving)
        rows.append(modalities.member(surviving).row(values))
    return StochasticMap.from_rows(extended, extended.nodes(), rows)


def modalities_from_hat(hat: StochasticMap) -> FunctionalModalities:
    """Inverse of hat_kappa: split the extended kernel back into a family."""
    extended = hat.space
    space = make_state_space(
        [extended.d0] + [d - 1 for d in extended.input_cardinalities]
    )
    members = {}
    for domain in all_subsets(space):
        rows = []
        for values in space.assignments(domain):
            fixed = dict(zip(domain, values))
            coords = tuple(
                fixed.get(i, space.cardinalities[i]) for i in space.nodes()
            )
            rows.append(hat.rows[extended.index_of(coords)])
        members[frozenset(domain)] = StochasticMap.from_rows(space, domain, rows)
    return FunctionalModalities.from_members(space, members)


# -- JSON ---------------------------------------------------------------------------


def _entry_to_json(value):
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return f"{value}/1"
    return value


def _entry_from_json(value):
    if isinstance(value, str):
        num, _, den = value.partition("/")
        return Fraction(int(num), int(den or "1"))
    return float(value)


def kernel_to_json(kappa: StochasticMap) -> str:
    doc = {
        "domain": list(kappa.domain),
        "rows": {
            str(i): [_entry_to_json(v) for v in row] for i, row in enumerate(kappa.rows)
        },
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def kernel_from_json(space: StateSpace, text: str) -> StochasticMap:
    doc = json.loads(text)
    domain = space.subset_key(doc["domain"])
    size = space.restriction_size(domain)
    rows = []
    defective = []
    for i in range(size):
        row = tuple(_entry_from_json(v) for v in doc["rows"][str(i)])
        if all(v == 0 for v in row):
            defective.append(i)
        rows.append(row)
    return StochasticMap.from_rows(space, domain, rows, defective_rows=defective)


def modalities_to_json(modalities: FunctionalModalities) -> str:
    space = modalities.space
    doc = {
        "cardinalities": list(space.cardinalities),
        "members": [
            json.loads(kernel_to_json(modalities.members[a]))
            for a in modalities.subsets()
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def modalities_from_json(text: str) -> FunctionalModalities:
    doc = json.loads(text)
    space = make_state_space(doc["cardinalities"])
    members = {}
    for entry in doc["members"]:
        kernel = kernel_from_json(space, json.dumps(entry))
        members[frozenset(kernel.domain)] = kernel
    return FunctionalModalities.from_members(space, members)
