"""Log-linear (Gibbs) representations of post-knockout families.

A family of potentials, one table per input subset, reproduces every member
of a strictly positive family through normalized exponentials of partial
sums.  Inverting that representation on the subset lattice, extending small
members to large ones by normalized geometric means, and reading off
interaction orders all happen here.

Logs and exponentials force float arithmetic throughout this module; the
identity checks in tests use relative tolerance 1e-10 on inputs bounded
away from zero.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import InvalidValue, NonPositiveEntry, NotCoherent, NotSaturated
from .kernels import (
    FunctionalModalities,
    StochasticMap,
    all_subsets,
    rows_equal,
)
from .spaces import StateLike, StateSpace, make_state_space
from .specs import RobustnessSpec, delta_family, is_coherent, is_saturated, r_min

MAX_NODES = 12
DEFAULT_TOL = 1e-9

Table = list  # list over restricted states, each a list over output symbols


@dataclass(frozen=True)
class GibbsPotentials:
    """One real table per input subset, indexed like the matching member."""

    space: StateSpace
    tables: Mapping[frozenset[int], Table]

    def table(self, nodes: Iterable[int]) -> Table:
        return self.tables[frozenset(self.space.subset_key(nodes))]

    def subsets(self) -> list[frozenset[int]]:
        return sorted(self.tables, key=lambda a: (len(a), tuple(sorted(a))))


def _check_size(space: StateSpace) -> None:
    if space.n > MAX_NODES:
        raise InvalidValue(f"subset-lattice routines are capped at {MAX_NODES} inputs")


def _log_entry(value, domain, state, output) -> float:
    v = float(value)
    if v <= 0.0:
        raise NonPositiveEntry(
            f"entry {value!r} at domain {domain}, state {state}, output {output} "
            "must be strictly positive",
            domain=domain,
            state=state,
            output=output,
        )
    return math.log(v)


def _log_tables(modalities: FunctionalModalities) -> dict[frozenset[int], Table]:
    space = modalities.space
    logs: dict[frozenset[int], Table] = {}
    for a in modalities.subsets():
        nodes = tuple(sorted(a))
        member = modalities.members[a]
        table = []
        for idx, values in enumerate(space.assignments(nodes)):
            table.append(
                [
                    _log_entry(member.rows[idx][x0], nodes, values, x0)
                    for x0 in range(space.d0)
                ]
            )
        logs[a] = table
    return logs


def _restricted_position(nodes: tuple[int, ...], sub: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(nodes.index(i) for i in sub)


def moebius_potentials(modalities: FunctionalModalities) -> GibbsPotentials:
    """Canonical potentials by alternating sums of member logs over subsets."""
    space = modalities.space
    _check_size(space)
    logs = _log_tables(modalities)
    tables: dict[frozenset[int], Table] = {}
    for a in modalities.subsets():
        nodes = tuple(sorted(a))
        size = space.restriction_size(nodes)
        table = [[0.0] * space.d0 for _ in range(size)]
        for idx, values in enumerate(space.assignments(nodes)):
            for csize in range(len(nodes) + 1):
                for sub in itertools.combinations(nodes, csize):
                    sign = -1.0 if (len(nodes) - csize) % 2 else 1.0
                    pos = _restricted_position(nodes, sub)
                    sub_idx = space.restricted_index_of(sub, tuple(values[p] for p in pos))
                    sub_log = logs[frozenset(sub)][sub_idx]
                    row = table[idx]
                    for x0 in range(space.d0):
                        row[x0] += sign * sub_log[x0]
        tables[a] = table
    return GibbsPotentials(space=space, tables=tables)


def gibbs_to_modalities(potentials: GibbsPotentials) -> FunctionalModalities:
    """Normalized exponentials of summed potentials; strictly positive rows."""
    space = potentials.space
    _check_size(space)
    members = {}
    for domain in all_subsets(space):
        nodes = tuple(sorted(domain))
        rows = []
        for values in space.assignments(nodes):
            energy = [0.0] * space.d0
            for csize in range(len(nodes) + 1):
                for sub in itertools.combinations(nodes, csize):
                    pos = _restricted_position(nodes, sub)
                    sub_idx = space.restricted_index_of(sub, tuple(values[p] for p in pos))
                    sub_table = potentials.tables[frozenset(sub)][sub_idx]
                    for x0 in range(space.d0):
                        energy[x0] += sub_table[x0]
            peak = max(energy)
            weights = [math.exp(e - peak) for e in energy]
            total = sum(weights)
            rows.append(tuple(w / total for w in weights))
        members[frozenset(domain)] = StochasticMap.from_rows(space, domain, rows)
    return FunctionalModalities.from_members(space, members)


def with_gauge_shift(
    potentials: GibbsPotentials, nodes: Iterable[int], offsets: Sequence[float]
) -> GibbsPotentials:
    """Add an output-independent offset per state to one potential table."""
    space = potentials.space
    key = frozenset(space.subset_key(nodes))
    tables = {a: [list(row) for row in t] for a, t in potentials.tables.items()}
    for idx, off in enumerate(offsets):
        tables[key][idx] = [v + off for v in tables[key][idx]]
    return GibbsPotentials(space=space, tables=tables)


# -- pointwise robustness through potentials ---------------------------------------


def knockout_residual(
    potentials: GibbsPotentials, x: StateLike, nodes: Iterable[int]
) -> tuple[float, ...]:
    """Summed potentials of every subset reaching outside the surviving set.

    Robustness of the family at x against knocking the complement out is
    equivalent to this residual being constant across output symbols.
    """
    space = potentials.space
    surviving = frozenset(space.subset_key(nodes))
    coords = space.coords_of(space.as_index(x))
    residual = [0.0] * space.d0
    for b in potentials.subsets():
        if b <= surviving:
            continue
        b_nodes = tuple(sorted(b))
        idx = space.restricted_index_of(b_nodes, tuple(coords[i - 1] for i in b_nodes))
        row = potentials.tables[b][idx]
        for x0 in range(space.d0):
            residual[x0] += row[x0]
    return tuple(residual)


def is_robust_via_potentials(
    modalities: FunctionalModalities,
    x: StateLike,
    nodes: Iterable[int],
    tol: float = DEFAULT_TOL,
) -> bool:
    """Residual-constancy test, cross-checked against the direct comparison."""
    space = modalities.space
    potentials = moebius_potentials(modalities)
    residual = knockout_residual(potentials, x, nodes)
    by_residual = max(residual) - min(residual) <= tol

    idx = space.as_index(x)
    full_row = modalities.full.rows[idx]
    survivor_row = modalities.member(nodes).row_at(idx)
    direct = rows_equal(full_row, survivor_row, "float", tol)
    if by_residual != direct:
        raise AssertionError(
            f"potential residual and direct comparison disagree at state {idx}, "
            f"surviving set {tuple(sorted(nodes))}"
        )
    return direct


# -- geometric-mean families ---------------------------------------------------------


def _as_base_mapping(base) -> dict[frozenset[int], StochasticMap]:
    if isinstance(base, FunctionalModalities):
        return dict(base.members)
    return {frozenset(m.domain): m for m in base.values()} if isinstance(base, Mapping) else {
        frozenset(m.domain): m for m in base
    }


def _require_positive(kernel: StochasticMap) -> None:
    for idx, row in enumerate(kernel.rows):
        for x0, v in enumerate(row):
            if v <= 0:
                raise NonPositiveEntry(
                    f"base kernel on {kernel.domain} has entry {v!r}",
                    domain=kernel.domain,
                    state=idx,
                    output=x0,
                )


def geometric_mean_extension_k(base, k: int) -> FunctionalModalities:
    """Extend small members to the whole family by normalized geometric means.

    ``base`` supplies one strictly positive member per subset of size <= k;
    every larger member's row is the normalized geometric mean of its
    size-k restrictions.  This parametrizes the geometric-mean family: the
    base can be chosen freely and is recoverable from the output.
    """
    mapping = _as_base_mapping(base)
    spaces = {m.space for m in mapping.values()}
    if len(spaces) != 1:
        raise InvalidValue("base maps must share one state space")
    space = spaces.pop()
    _check_size(space)
    for size in range(k + 1):
        for sub in itertools.combinations(space.nodes(), size):
            if frozenset(sub) not in mapping:
                raise InvalidValue(f"base is missing the member for {sub}")
            _require_positive(mapping[frozenset(sub)])

    members = {}
    for domain in all_subsets(space):
        key = frozenset(domain)
        if len(domain) <= k:
            members[key] = mapping[key]
            continue
        nodes = tuple(sorted(domain))
        weight = 1.0 / math.comb(len(nodes), k)
        rows = []
        for values in space.assignments(nodes):
            energy = [0.0] * space.d0
            for sub in itertools.combinations(nodes, k):
                pos = _restricted_position(nodes, sub)
                row = mapping[frozenset(sub)].row(tuple(values[p] for p in pos))
                for x0 in range(space.d0):
                    energy[x0] += weight * math.log(float(row[x0]))
            peak = max(energy)
            weights = [math.exp(e - peak) for e in energy]
            total = sum(weights)
            rows.append(tuple(w / total for w in weights))
        members[key] = StochasticMap.from_rows(space, domain, rows)
    return FunctionalModalities.from_members(space, members)


def extract_base(modalities: FunctionalModalities, k: int) -> dict[frozenset[int], StochasticMap]:
    """The freely choosable part of a geometric-mean family: members of size <= k."""
    return {
        a: m for a, m in modalities.members.items() if len(a) <= k
    }


def is_tilde_member(modalities: FunctionalModalities, k: int, tol: float = 1e-9) -> bool:
    """Fixed-point test: re-extending the small members reproduces the family."""
    rebuilt = geometric_mean_extension_k(extract_base(modalities, k), k)
    for a in modalities.subsets():
        got = rebuilt.members[a]
        want = modalities.members[a]
        for idx in range(len(want.rows)):
            if not rows_equal(want.rows[idx], got.rows[idx], "float", tol):
                return False
    return True


def project_to_tilde_k(modalities: FunctionalModalities, k: int) -> FunctionalModalities:
    """Closest geometric-mean family: keep small members, remix the rest.

    Zero entries are legal; a geometric-mean row that vanishes identically
    is kept as a zero row and reported in ``degenerate_rows`` of the result.
    """
    space = modalities.space
    _check_size(space)
    members = {}
    degenerate = []
    for domain in all_subsets(space):
        key = frozenset(domain)
        if len(domain) <= k:
            members[key] = modalities.members[key]
            continue
        nodes = tuple(sorted(domain))
        exponent = 1.0 / math.comb(len(nodes), k)
        rows = []
        defective = []
        for idx, values in enumerate(space.assignments(nodes)):
            prod_row = [1.0] * space.d0
            for sub in itertools.combinations(nodes, k):
                pos = _restricted_position(nodes, sub)
                row = modalities.members[frozenset(sub)].row(
                    tuple(values[p] for p in pos)
                )
                for x0 in range(space.d0):
                    v = float(row[x0])
                    prod_row[x0] = 0.0 if v == 0.0 else prod_row[x0] * v ** exponent
            total = sum(prod_row)
            if total == 0.0:
                defective.append(idx)
                degenerate.append((key, idx))
                rows.append(tuple(prod_row))
            else:
                rows.append(tuple(v / total for v in prod_row))
        members[key] = StochasticMap.from_rows(
            space, domain, rows, defective_rows=defective
        )
    return FunctionalModalities.from_members(
        space, members, degenerate_rows=tuple(degenerate)
    )


def geometric_mean_extension_general(spec: RobustnessSpec, base) -> FunctionalModalities:
    """Geometric-mean extension driven by the minimal sets of a saturated spec.

    Members whose domain contains no minimal binding set keep their base
    value; every other member mixes the minimal sets inside its domain.
    """
    if not is_saturated(spec):
        raise NotSaturated("general geometric-mean extension needs a saturated spec")
    if not is_coherent(spec):
        raise NotCoherent("general geometric-mean extension needs a coherent spec")
    space = spec.space
    _check_size(space)
    minimal = sorted(r_min(spec, 0), key=lambda r: (len(r), tuple(sorted(r))))
    mapping = _as_base_mapping(base)
    for kernel in mapping.values():
        _require_positive(kernel)
    for r in minimal:
        if r not in mapping:
            raise InvalidValue(f"base is missing the member for {tuple(sorted(r))}")

    members = {}
    for domain in all_subsets(space):
        key = frozenset(domain)
        inside = [r for r in minimal if r <= key]
        if not inside:
            if key not in mapping:
                raise InvalidValue(f"base is missing the member for {domain}")
            members[key] = mapping[key]
            continue
        nodes = tuple(sorted(domain))
        weight = 1.0 / len(inside)
        rows = []
        for values in space.assignments(nodes):
            energy = [0.0] * space.d0
            for r in inside:
                r_nodes = tuple(sorted(r))
                pos = _restricted_position(nodes, r_nodes)
                row = mapping[r].row(tuple(values[p] for p in pos))
                for x0 in range(space.d0):
                    energy[x0] += weight * math.log(float(row[x0]))
            peak = max(energy)
            weights = [math.exp(e - peak) for e in energy]
            total = sum(weights)
            rows.append(tuple(w / total for w in weights))
        members[key] = StochasticMap.from_rows(space, domain, rows)
    return FunctionalModalities.from_members(space, members)


# -- interaction structure ------------------------------------------------------------


def _centered_spread(table: Table) -> float:
    """Largest deviation from the per-state output average."""
    worst = 0.0
    for row in table:
        mean = sum(row) / len(row)
        for v in row:
            worst = max(worst, abs(v - mean))
    return worst


def interaction_order(kappa: StochasticMap, tol: float = DEFAULT_TOL) -> int:
    """Largest subset size whose centered log-interaction term survives.

    Output-independent contributions are projected away before testing, so
    normalization constants never inflate the order.
    """
    space = kappa.space
    if not kappa.is_full_domain():
        raise InvalidValue("interaction order needs the full-domain kernel")
    _check_size(space)
    log_rows = []
    for x in space.states():
        log_rows.append(
            [
                _log_entry(kappa.rows[x][x0], kappa.domain, x, x0)
                for x0 in range(space.d0)
            ]
        )
    scale = max(1.0, max(abs(v) for row in log_rows for v in row))
    terms = _domain_interaction_terms(space, space.nodes(), log_rows)
    order = 0
    for a, table in terms.items():
        if _centered_spread(table) > tol * scale:
            order = max(order, len(a))
    return order


def delta_interaction_check(
    modalities: FunctionalModalities,
    spec: RobustnessSpec,
    tol: float = DEFAULT_TOL,
) -> bool:
    """Necessary test for membership in the spec's interaction family.

    Every potential of the family, decomposed over its domain's subsets,
    must put its output-dependent weight only on subsets of minimal binding
    sets.  Families built by the geometric-mean extension pass whenever each
    subset of nodes either contains a minimal set or sits inside one.
    """
    if not is_saturated(spec):
        raise NotSaturated("interaction check needs a saturated spec")
    if not is_coherent(spec):
        raise NotCoherent("interaction check needs a coherent spec")
    space = modalities.space
    delta = delta_family(spec)
    potentials = moebius_potentials(modalities)
    scale = 1.0
    for table in potentials.tables.values():
        for row in table:
            for v in row:
                scale = max(scale, abs(v))
    for a in potentials.subsets():
        nodes = tuple(sorted(a))
        table = potentials.tables[a]
        sub_space_terms = _domain_interaction_terms(space, nodes, table)
        for d, term in sub_space_terms.items():
            if d in delta:
                continue
            if _centered_spread(term) > tol * scale:
                return False
    return True


def _domain_interaction_terms(space: StateSpace, nodes: tuple[int, ...], table: Table):
    """Interaction decomposition of a table living on a restricted domain."""
    averages: dict[frozenset[int], Table] = {}
    subs = [
        c for size in range(len(nodes) + 1) for c in itertools.combinations(nodes, size)
    ]
    for sub in subs:
        size = space.restriction_size(sub)
        sums = [[0.0] * space.d0 for _ in range(size)]
        counts = [0] * size
        pos = _restricted_position(nodes, sub)
        for idx, values in enumerate(space.assignments(nodes)):
            sub_idx = space.restricted_index_of(sub, tuple(values[p] for p in pos))
            counts[sub_idx] += 1
            for x0 in range(space.d0):
                sums[sub_idx][x0] += table[idx][x0]
        averages[frozenset(sub)] = [
            [v / counts[i] for v in row] for i, row in enumerate(sums)
        ]
    terms: dict[frozenset[int], Table] = {}
    for sub in subs:
        size = space.restriction_size(sub)
        out = [[0.0] * space.d0 for _ in range(size)]
        for idx, values in enumerate(space.assignments(sub)):
            for csize in range(len(sub) + 1):
                for inner in itertools.combinations(sub, csize):
                    sign = -1.0 if (len(sub) - csize) % 2 else 1.0
                    pos = _restricted_position(sub, inner)
                    inner_idx = space.restricted_index_of(
                        inner, tuple(values[p] for p in pos)
                    )
                    row = averages[frozenset(inner)][inner_idx]
                    for x0 in range(space.d0):
                        out[idx][x0] += sign * row[x0]
        terms[frozenset(sub)] = out
    return terms


# -- explicit interaction bases --------------------------------------------------------


@dataclass(frozen=True)
class InteractionBasis:
    """Shared per-subset tables plus per-member mixing coefficients."""

    space: StateSpace
    k: int
    psi: Mapping[frozenset[int], Table]
    alpha: Mapping[tuple[frozenset[int], frozenset[int]], float]


def _alpha_coefficient(a_size: int, b_size: int, k: int) -> float:
    if b_size < k:
        return -1.0 if (a_size - b_size) % 2 else 1.0
    if a_size == k:
        return 1.0
    sign = -1.0 if (a_size - k) % 2 else 1.0
    return sign * k / a_size


def tilde_interaction_basis(modalities: FunctionalModalities, k: int) -> InteractionBasis:
    """Canonical basis of a geometric-mean family: member logs up to size k."""
    space = modalities.space
    logs = _log_tables(modalities)
    psi = {a: t for a, t in logs.items() if len(a) <= k}
    alpha = {}
    for domain in all_subsets(space):
        a = frozenset(domain)
        for bsize in range(min(len(domain), k) + 1):
            for sub in itertools.combinations(domain, bsize):
                alpha[(a, frozenset(sub))] = _alpha_coefficient(len(a), bsize, k)
    return InteractionBasis(space=space, k=k, psi=psi, alpha=alpha)


def basis_conditions_hold(basis: InteractionBasis, tol: float = 1e-12) -> bool:
    """Coefficient interdependence required of geometric-mean families.

    Below size k the signed coefficient is member-independent; at size k the
    signed coefficient scaled by the member size is member-independent.
    """
    by_b: dict[frozenset[int], list[tuple[int, float]]] = {}
    for (a, b), coeff in basis.alpha.items():
        by_b.setdefault(b, []).append((len(a), coeff))
    for b, entries in by_b.items():
        signed = []
        for a_size, coeff in entries:
            sign = -1.0 if a_size % 2 else 1.0
            if len(b) < basis.k:
                signed.append(sign * coeff)
            else:
                signed.append(sign * a_size * coeff)
        if max(signed) - min(signed) > tol:
            return False
    return True


def modalities_from_basis(basis: InteractionBasis) -> FunctionalModalities:
    """Family whose potentials are the basis mixtures."""
    space = basis.space
    tables: dict[frozenset[int], Table] = {}
    for domain in all_subsets(space):
        a = frozenset(domain)
        nodes = tuple(sorted(domain))
        size = space.restriction_size(nodes)
        table = [[0.0] * space.d0 for _ in range(size)]
        for idx, values in enumerate(space.assignments(nodes)):
            for bsize in range(min(len(nodes), basis.k) + 1):
                for sub in itertools.combinations(nodes, bsize):
                    coeff = basis.alpha[(a, frozenset(sub))]
                    pos = _restricted_position(nodes, sub)
                    sub_idx = space.restricted_index_of(
                        sub, tuple(values[p] for p in pos)
                    )
                    row = basis.psi[frozenset(sub)][sub_idx]
                    for x0 in range(space.d0):
                        table[idx][x0] += coeff * row[x0]
        tables[a] = table
    return gibbs_to_modalities(GibbsPotentials(space=space, tables=tables))


# -- JSON --------------------------------------------------------------------------------


def potentials_to_json(potentials: GibbsPotentials) -> str:
    doc = {
        "cardinalities": list(potentials.space.cardinalities),
        "tables": [
            {
                "domain": sorted(a),
                "values": {str(i): list(row) for i, row in enumerate(potentials.tables[a])},
            }
            for a in potentials.subsets()
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def potentials_from_json(text: str) -> GibbsPotentials:
    doc = json.loads(text)
    space = make_state_space(doc["cardinalities"])
    tables = {}
    for entry in doc["tables"]:
        nodes = space.subset_key(entry["domain"])
        size = space.restriction_size(nodes)
        tables[frozenset(nodes)] = [
            [float(v) for v in entry["values"][str(i)]] for i in range(size)
        ]
    return GibbsPotentials(space=space, tables=tables)
