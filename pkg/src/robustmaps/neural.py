"""Sigmoid threshold units and their knockout families.

Inputs are spins in {-1,+1} encoded as indices {0,1}; the output is a spin
as well.  A finite inverse temperature gives the logistic unit; the naive
knockout family just drops the missing terms from the weighted sum, while
the renormalized family scales the surviving weights up so that the family
is a geometric-mean (single-interaction) family.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import InvalidValue
from .kernels import FunctionalModalities, StochasticMap, all_subsets
from .spaces import StateSpace, make_state_space


@dataclass(frozen=True)
class ThresholdParams:
    """Weights, firing threshold, and inverse temperature of one unit."""

    weights: tuple[float, ...]
    eta: float
    beta: Optional[float] = 1.0  # None marks the deterministic limit

    def __post_init__(self):
        if self.beta is not None and not self.beta > 0:
            raise InvalidValue(f"inverse temperature must be positive, got {self.beta}")


def _spin(index: int) -> int:
    return 2 * index - 1


def _binary_space(n: int) -> StateSpace:
    return make_state_space([2] + [2] * n)


def _logistic_row(argument: float) -> tuple[float, float]:
    """Distribution over output spins from the half-difference argument."""
    if argument >= 0:
        p_plus = 1.0 / (1.0 + math.exp(-argument))
    else:
        weight = math.exp(argument)
        p_plus = weight / (1.0 + weight)
    return (1.0 - p_plus, p_plus)


def _sign_row(argument: float) -> tuple[float, float]:
    if argument > 0:
        return (0.0, 1.0)
    if argument < 0:
        return (1.0, 0.0)
    return (0.5, 0.5)


def _family(n: int, row_of_domain_state) -> FunctionalModalities:
    space = _binary_space(n)
    members = {}
    for domain in all_subsets(space):
        rows = []
        for values in space.assignments(domain):
            rows.append(row_of_domain_state(domain, values))
        members[frozenset(domain)] = StochasticMap.from_rows(space, domain, rows)
    return FunctionalModalities.from_members(space, members)


def threshold_modalities(params: ThresholdParams) -> FunctionalModalities:
    """Naive knockout family: drop the missing terms from the weighted sum."""
    if params.beta is None:
        raise InvalidValue("finite inverse temperature required; use threshold_limit")
    w, eta, beta = params.weights, params.eta, params.beta

    def row(domain, values):
        drive = sum(
            w[node - 1] * _spin(v) for node, v in zip(domain, values)
        )
        return _logistic_row(beta * (drive - eta))

    return _family(len(w), row)


def renormalized_threshold_modalities(
    weights: Sequence[float], eta: float, beta: float
) -> FunctionalModalities:
    """Knockout family scaling surviving weights by n/|A|; uniform with no inputs.

    The full member equals the naive unit, and the family is a fixed point
    of the single-interaction geometric-mean extension.
    """
    params = ThresholdParams(weights=tuple(weights), eta=eta, beta=beta)
    w, n = params.weights, len(params.weights)

    def row(domain, values):
        if not domain:
            return (0.5, 0.5)
        factor = n / len(domain)
        drive = factor * sum(
            w[node - 1] * _spin(v) for node, v in zip(domain, values)
        )
        return _logistic_row(beta * (drive - eta))

    return _family(n, row)


def threshold_limit(
    weights: Sequence[float], eta: float, renormalized: bool = False
) -> FunctionalModalities:
    """Zero-temperature family: output 1, 1/2, or 0 by the sign of the drive."""
    w = tuple(weights)
    n = len(w)

    def row(domain, values):
        if renormalized and not domain:
            return (0.5, 0.5)
        factor = n / len(domain) if (renormalized and domain) else 1.0
        drive = factor * sum(
            w[node - 1] * _spin(v) for node, v in zip(domain, values)
        )
        return _sign_row(drive - eta)

    return _family(n, row)
