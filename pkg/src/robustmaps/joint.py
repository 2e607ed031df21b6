"""Joint output-input distributions and their independence structure.

A joint distribution is stored by its fibers: for each input state the
vector of probabilities across output symbols.  Conditional independence of
the output from the knocked-out inputs given a pinned assignment is a
rank-one condition on the fiber matrix of the matching cylinder, checked
exactly in rational mode.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import (
    EmptyDistribution,
    IndexMismatch,
    InvalidValue,
    InvalidWitness,
)
from .kernels import StochasticMap
from .spaces import StateLike, StateSpace, make_state_space
from .specs import RobustnessSpec
from .structures import RobustnessStructure, components_of_set

DEFAULT_CI_TOL = 1e-12

Fiber = tuple


def _is_exact(value) -> bool:
    return isinstance(value, (int, Fraction))


@dataclass(frozen=True)
class JointDistribution:
    """Probabilities over (output symbol, input state), fibers cached by input."""

    space: StateSpace
    fibers: tuple[Fiber, ...]
    mode: str = "rational"

    def __post_init__(self):
        if len(self.fibers) != self.space.size_in:
            raise InvalidValue(f"expected {self.space.size_in} fibers")
        total = 0
        for fiber in self.fibers:
            if len(fiber) != self.space.d0:
                raise InvalidValue("fiber length must match the output alphabet")
            if any(v < 0 for v in fiber):
                raise InvalidValue("negative probability entry")
            total += sum(fiber)
        if self.mode == "rational":
            if total != 1:
                raise InvalidValue(f"total mass {total} != 1")
        elif abs(total - 1.0) > 1e-12:
            raise InvalidValue(f"total mass {total!r}")

    @staticmethod
    def from_fibers(space: StateSpace, fibers: Sequence[Sequence]) -> "JointDistribution":
        tup = tuple(tuple(f) for f in fibers)
        exact = all(_is_exact(v) for f in tup for v in f)
        return JointDistribution(
            space=space, fibers=tup, mode="rational" if exact else "float"
        )

    def probability(self, x0: int, x: StateLike):
        return self.fibers[self.space.as_index(x)][x0]

    def fiber(self, x: StateLike) -> Fiber:
        return self.fibers[self.space.as_index(x)]

    def support(self) -> tuple[int, ...]:
        return tuple(x for x in self.space.states() if any(v != 0 for v in self.fibers[x]))

    def input_marginal(self) -> tuple:
        return tuple(sum(f) for f in self.fibers)


def joint_from(kappa: StochasticMap, p_in: Sequence) -> JointDistribution:
    """Product of an input distribution with a full-domain kernel."""
    space = kappa.space
    if not kappa.is_full_domain():
        raise InvalidValue("joint construction needs the full-domain kernel")
    if len(p_in) != space.size_in:
        raise InvalidValue(f"input distribution needs {space.size_in} entries")
    fibers = [
        tuple(kappa.rows[x][x0] * p_in[x] for x0 in range(space.d0))
        for x in space.states()
    ]
    return JointDistribution.from_fibers(space, fibers)


# -- proportionality and independence -----------------------------------------------


def fibers_proportional(u: Fiber, v: Fiber, mode: str, tol: float = DEFAULT_CI_TOL) -> bool:
    """True when one vanishes or the two lie on a common ray."""
    if all(x == 0 for x in u) or all(x == 0 for x in v):
        return True
    scale = max(max(abs(x) for x in u), max(abs(x) for x in v))
    for i, j in itertools.combinations(range(len(u)), 2):
        minor = u[i] * v[j] - u[j] * v[i]
        if mode == "rational":
            if minor != 0:
                return False
        elif abs(minor) > tol * scale * scale:
            return False
    return True


def check_ci(
    p: JointDistribution,
    nodes: Iterable[int],
    values: Sequence[int],
    tol: float = DEFAULT_CI_TOL,
) -> bool:
    """Vanishing of all 2x2 minors on the cylinder slice of the assignment."""
    space = p.space
    key = space.subset_key(nodes)
    states = [
        x for x in space.states()
        if tuple(space.coords_of(x)[i - 1] for i in key) == tuple(values)
    ]
    pivot = None
    for x in states:
        if any(v != 0 for v in p.fibers[x]):
            pivot = x
            break
    if pivot is None:
        return True
    return all(
        fibers_proportional(p.fibers[pivot], p.fibers[x], p.mode, tol)
        for x in states
        if x != pivot
    )


def is_r_robust_distribution(
    p: JointDistribution,
    spec: RobustnessSpec,
    tol: float = DEFAULT_CI_TOL,
) -> bool:
    """Conjunction of the independence checks over every pair of the spec.

    The same verdict is recomputed from fiber proportionality on the
    support components, and the two must agree.
    """
    by_minors = all(
        check_ci(p, tuple(sorted(r)), values, tol) for r, values in spec.pairs()
    )

    support = p.support()
    by_components = True
    if support:
        structure = components_of_set(spec, support)
        for block in structure.blocks:
            states = sorted(block)
            for other in states[1:]:
                if not fibers_proportional(
                    p.fibers[states[0]], p.fibers[other], p.mode, tol
                ):
                    by_components = False
                    break
            if not by_components:
                break

    if by_minors != by_components:
        raise AssertionError(
            "determinantal and component-proportionality criteria disagree"
        )
    return by_minors


def support_structure(p: JointDistribution, spec: RobustnessSpec) -> RobustnessStructure:
    """Component structure of the induced graph on the nonzero fibers."""
    support = p.support()
    if not support:
        raise EmptyDistribution("distribution has empty support")
    return components_of_set(spec, support)


# -- the component manifolds ----------------------------------------------------------


@dataclass(frozen=True)
class ComponentParams:
    """Block weights, within-block input laws, and per-block output laws."""

    block_weights: tuple
    input_laws: tuple[tuple, ...]
    output_laws: tuple[tuple, ...]

    def __post_init__(self):
        if not (len(self.block_weights) == len(self.input_laws) == len(self.output_laws)):
            raise IndexMismatch("parameter groups must have one entry per block")


def sample_from_component(
    structure: RobustnessStructure, params: ComponentParams
) -> JointDistribution:
    """Distribution with the given structure: weight * input law * output law.

    Zero outside the structure's support; strictly positive parameters give
    exactly the structure's blocks as support components.
    """
    space = structure.space
    blocks = structure.blocks
    if len(params.block_weights) != len(blocks):
        raise IndexMismatch(
            f"{len(params.block_weights)} weights for {len(blocks)} blocks"
        )
    zero = Fraction(0)
    fibers = [[zero] * space.d0 for _ in range(space.size_in)]
    for b, block in enumerate(blocks):
        states = sorted(block)
        law = params.input_laws[b]
        out = params.output_laws[b]
        if len(law) != len(states):
            raise IndexMismatch(f"input law {b} has {len(law)} entries for {len(states)} states")
        if len(out) != space.d0:
            raise IndexMismatch(f"output law {b} has {len(out)} entries")
        for x, weight in zip(states, law):
            for x0 in range(space.d0):
                fibers[x][x0] = params.block_weights[b] * weight * out[x0]
    return JointDistribution.from_fibers(space, fibers)


def component_membership(
    p: JointDistribution,
    structure: RobustnessStructure,
    tol: float = DEFAULT_CI_TOL,
) -> bool:
    """Support matches the blocks exactly and fibers agree within blocks."""
    support = p.support()
    if not support:
        raise EmptyDistribution("distribution has empty support")
    if frozenset(support) != structure.union:
        return False
    for block in structure.blocks:
        states = sorted(block)
        for other in states[1:]:
            if not fibers_proportional(p.fibers[states[0]], p.fibers[other], p.mode, tol):
                return False
    return True


def epsilon_approximation(
    p: JointDistribution,
    target: RobustnessStructure,
    epsilon,
    new_point: StateLike,
    donor: StateLike,
) -> JointDistribution:
    """Move an epsilon share of the donor fiber onto a fresh support point.

    The target structure must be the component structure of the support
    plus the new point; the donor must share the new point's target block
    unless that block is the singleton of the new point.
    """
    space = p.space
    x = space.as_index(new_point)
    y = space.as_index(donor)
    support = frozenset(p.support())
    if x in support:
        raise InvalidWitness(f"state {x} is already in the support")
    if y not in support:
        raise InvalidWitness(f"donor {y} is outside the support")
    if target.union != support | {x}:
        raise InvalidWitness("target structure must cover the support plus the new point")
    x_block = target.blocks[target.block_index(x)]
    if x_block != frozenset({x}) and y not in x_block:
        raise InvalidWitness("donor must lie in the new point's target block")
    if p.mode == "rational" and not _is_exact(epsilon):
        raise InvalidValue("rational mode needs an exact epsilon")
    if not 0 <= epsilon <= 1:
        raise InvalidValue(f"epsilon {epsilon} outside [0, 1]")

    fibers = list(p.fibers)
    donor_fiber = fibers[y]
    fibers[y] = tuple(v * (1 - epsilon) for v in donor_fiber)
    fibers[x] = tuple(v * epsilon for v in donor_fiber)
    return JointDistribution.from_fibers(space, fibers)


def tv_distance(p: JointDistribution, q: JointDistribution):
    """Total variation distance, exact in rational mode."""
    total = sum(
        abs(pf[x0] - qf[x0])
        for pf, qf in zip(p.fibers, q.fibers)
        for x0 in range(p.space.d0)
    )
    return total / 2


@dataclass(frozen=True)
class ConditionalKernel:
    """Output-given-input rows where defined; undefined inputs listed."""

    space: StateSpace
    rows: dict[int, Fiber]
    undefined: tuple[int, ...]


def conditional_kernel(p: JointDistribution) -> ConditionalKernel:
    """Normalize each nonzero fiber; zero fibers are reported, not invented."""
    rows = {}
    undefined = []
    for x in p.space.states():
        fiber = p.fibers[x]
        mass = sum(fiber)
        if mass == 0:
            undefined.append(x)
        else:
            rows[x] = tuple(v / mass for v in fiber)
    return ConditionalKernel(space=p.space, rows=rows, undefined=tuple(undefined))


# -- randomized generation --------------------------------------------------------------


def random_rational_distribution(rng: random.Random, size: int) -> tuple[Fraction, ...]:
    weights = [rng.randint(1, 9) for _ in range(size)]
    total = sum(weights)
    return tuple(Fraction(w, total) for w in weights)


def random_component_params(
    structure: RobustnessStructure, rng: random.Random
) -> ComponentParams:
    """Strictly positive exact parameters for one structure."""
    d0 = structure.space.d0
    blocks = structure.blocks
    return ComponentParams(
        block_weights=random_rational_distribution(rng, len(blocks)),
        input_laws=tuple(
            random_rational_distribution(rng, len(b)) for b in blocks
        ),
        output_laws=tuple(random_rational_distribution(rng, d0) for _ in blocks),
    )


def random_robust_distribution(
    spec: RobustnessSpec, rng: random.Random
) -> tuple[JointDistribution, RobustnessStructure]:
    """Exact robust distribution over a uniformly drawn support subset."""
    space = spec.space
    while True:
        subset = [x for x in space.states() if rng.random() < 0.5]
        if subset:
            break
    structure = components_of_set(spec, subset)
    params = random_component_params(structure, rng)
    return sample_from_component(structure, params), structure


# -- JSON ---------------------------------------------------------------------------------


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


def joint_to_json(p: JointDistribution) -> str:
    entries = {}
    for x in p.space.states():
        for x0 in range(p.space.d0):
            v = p.fibers[x][x0]
            if v != 0:
                entries[f"({x0},{x})"] = _entry_to_json(v)
    doc = {"cardinalities": list(p.space.cardinalities), "entries": entries}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def joint_from_json(text: str) -> JointDistribution:
    doc = json.loads(text)
    space = make_state_space(doc["cardinalities"])
    zero = Fraction(0)
    fibers = [[zero] * space.d0 for _ in range(space.size_in)]
    for key, value in doc["entries"].items():
        x0_text, _, x_text = key.strip("()").partition(",")
        fibers[int(x_text)][int(x0_text)] = _entry_from_json(value)
    return JointDistribution.from_fibers(space, fibers)
