import itertools
import math

import pytest

from robustmaps import (
    InvalidValue,
    ThresholdParams,
    hat_kappa,
    interaction_order,
    is_tilde_member,
    make_state_space,
    moebius_potentials,
    renormalized_threshold_modalities,
    threshold_limit,
    threshold_modalities,
)

SPIN = {0: -1, 1: +1}


def test_zero_weights_give_uniform():
    family = threshold_modalities(ThresholdParams(weights=(0.0, 0.0), eta=0.0, beta=1.0))
    for a in family.subsets():
        for row in family.members[a].rows:
            assert max(abs(v - 0.5) for v in row) < 1e-12


def test_logistic_value_single_input():
    family = threshold_modalities(ThresholdParams(weights=(2.0,), eta=0.0, beta=1.0))
    # spin +1 input fires with probability 1/(1+e^-2)
    assert abs(family.full.row((1,))[1] - 1 / (1 + math.exp(-2))) < 1e-12


def test_naive_family_drops_missing_terms():
    w = (0.8, -0.4, 1.1)
    eta = 0.3
    beta = 1.7
    family = threshold_modalities(ThresholdParams(weights=w, eta=eta, beta=beta))
    space = family.space
    for domain in ((), (2,), (1, 3), (1, 2, 3)):
        member = family.member(domain)
        for values in space.assignments(domain):
            drive = sum(w[i - 1] * SPIN[v] for i, v in zip(domain, values))
            want = 1 / (1 + math.exp(-beta * (drive - eta)))
            assert abs(member.row(values)[1] - want) < 1e-12


def test_requires_finite_beta():
    with pytest.raises(InvalidValue):
        threshold_modalities(ThresholdParams(weights=(1.0,), eta=0.0, beta=None))
    with pytest.raises(InvalidValue):
        ThresholdParams(weights=(1.0,), eta=0.0, beta=-2.0)


def test_finite_beta_family_is_pairwise_interaction():
    family = threshold_modalities(ThresholdParams(weights=(0.9, -1.2), eta=0.4, beta=1.0))
    potentials = moebius_potentials(family)
    # output-dependent parts of the two-node potential cancel
    for row in potentials.table((1, 2)):
        assert max(row) - min(row) < 1e-9
    assert interaction_order(family.full) == 1


def test_renormalized_full_member_matches_naive():
    w = (1.0, -0.7, 0.2)
    eta = 0.25
    beta = 2.0
    naive = threshold_modalities(ThresholdParams(weights=w, eta=eta, beta=beta))
    renorm = renormalized_threshold_modalities(w, eta, beta)
    for r1, r2 in zip(naive.full.rows, renorm.full.rows):
        assert max(abs(a - b) for a, b in zip(r1, r2)) < 1e-12


def test_renormalized_family_is_geometric_mean_fixed_point():
    renorm = renormalized_threshold_modalities((1.0, 1.0), 0.0, 1.0)
    assert is_tilde_member(renorm, 1)
    naive = threshold_modalities(ThresholdParams(weights=(1.0, 1.0), eta=0.0, beta=1.0))
    assert not is_tilde_member(naive, 1)


def test_renormalized_single_survivor_weight_scaling():
    w = (1.0, 1.0)
    renorm = renormalized_threshold_modalities(w, 0.0, 1.0)
    member = renorm.member((1,))
    # surviving weight doubled: drive = 2 * w_1 * s_1
    for x1 in range(2):
        want = 1 / (1 + math.exp(-2.0 * SPIN[x1]))
        assert abs(member.row((x1,))[1] - want) < 1e-12
    for row in renorm.member(()).rows:
        assert row == (0.5, 0.5)


def test_limit_majority_vote():
    family = threshold_limit((1.0, 1.0, 1.0), 0.0)
    space = family.space
    for x in space.states():
        coords = space.coords_of(x)
        votes = sum(SPIN[v] for v in coords)
        want = 1.0 if votes > 0 else 0.0
        assert family.full.rows[x][1] == want


def test_limit_tie_is_half():
    family = threshold_limit((1.0, 1.0), 0.0)
    assert family.full.row((0, 1)) == (0.5, 0.5)
    assert family.full.row((1, 0)) == (0.5, 0.5)
    eta_tie = threshold_limit((1.0,), 1.0)
    assert eta_tie.full.row((1,)) == (0.5, 0.5)


def test_beta_sweep_converges_monotonically():
    w = (0.9, -1.3, 0.5)
    eta = 0.2
    for renorm in (False, True):
        limit = threshold_limit(w, eta, renormalized=renorm)
        space = limit.space
        previous = None
        for beta in (1.0, 10.0, 100.0, 1000.0):
            if renorm:
                fam = renormalized_threshold_modalities(w, eta, beta)
            else:
                fam = threshold_modalities(ThresholdParams(weights=w, eta=eta, beta=beta))
            worst = 0.0
            for a in fam.subsets():
                if renorm and not a:
                    continue
                for idx in range(len(fam.members[a].rows)):
                    lim_row = limit.members[a].rows[idx]
                    if lim_row[1] == 0.5:
                        continue  # ties do not move
                    worst = max(worst, abs(fam.members[a].rows[idx][1] - lim_row[1]))
            if previous is not None:
                assert worst < previous
            previous = worst
        assert previous < 1e-12


def test_extended_kernel_is_spin_formula_with_zeros():
    w = (0.7, -0.4)
    eta = 0.1
    beta = 1.3
    family = threshold_modalities(ThresholdParams(weights=w, eta=eta, beta=beta))
    hat = hat_kappa(family)
    ext = hat.space
    # extended value 2 plays the knocked-out spin 0
    spin3 = {0: -1, 1: +1, 2: 0}
    for y in ext.states():
        coords = ext.coords_of(y)
        drive = sum(w[i] * spin3[v] for i, v in enumerate(coords))
        want = 1 / (1 + math.exp(-beta * (drive - eta)))
        assert abs(hat.rows[y][1] - want) < 1e-12
