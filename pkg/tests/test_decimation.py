from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bubblediamond.decimation import (
    DomainError, branch_word, critical_points, decimation_functions, decimation_map,
    dirichlet_multiplicity, hausdorff_distance, inverse_branch, julia_approximation,
    predicted_dirichlet_spectrum, predicted_neumann_spectrum, preimage_generations,
    preimage_set, scale_function, schur_residual, shift_function,
)
from bubblediamond.graph import vertex_count
from bubblediamond.oracle import oracle_spectrum

# direct diagonalization, b=2 level 2, frozen (see test_oracle)
NEUMANN_2_2 = [0.0, 0.07384762724720376, 0.17023714272997426, 1 / 3, 2 / 3, 0.9036104845172308,
               1.0963895154827699, 4 / 3, 5 / 3, 1.8297628572700266, 1.9261523727527994, 2.0]


@pytest.mark.parametrize("b", range(2, 9))
def test_exact_values(b):
    assert [decimation_map(b, F(z)) for z in (0, 1, 2)] == [0, 1, 2]
    assert decimation_map(b, F(1, b + 1)) == 2 and decimation_map(b, F(b, b + 1)) == 2
    assert decimation_map(b, F(b + 2, b + 1)) == 0 and decimation_map(b, F(2 * b + 1, b + 1)) == 0
    f = decimation_functions(b)
    assert f.multiplier == f.derivative(F(0)) == F((2 * b + 1) * (b + 2), b)


def test_scale_and_shift():
    b = 2
    z = F(1, 2)
    assert shift_function(b, z) == scale_function(b, z) * decimation_map(b, z)
    with pytest.raises(DomainError):
        shift_function(b, F(1, 3))
    with pytest.raises(DomainError):
        scale_function(b, F(1, 3))


@pytest.mark.parametrize("b", [2, 3, 4, 5, 6])
def test_schur_identity(b):
    rng = np.random.default_rng(7)
    for z in rng.uniform(0, 2, 20):
        if min(abs(z - 1 / (b + 1)), abs(z - (2 * b + 1) / (b + 1)), abs(abs(z - 1) - b / (b + 1))) > 1e-3:
            assert schur_residual(b, z) < 1e-12
    with pytest.raises(DomainError):
        schur_residual(b, 1 / (b + 1))


def test_schur_identity_detects_perturbation():
    bad = decimation_functions(2).perturbed(2, F(1, 100))
    z = 0.77
    assert abs(bad.shift(z) - bad.scale(z) * bad(z)) > 1e-4


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2), st.floats(0.0, 2.0))
def test_inverse_branch_roundtrip(b, j, w):
    z = inverse_branch(b, j, w)
    lo, hi = decimation_functions(b).branch_interval(j)
    assert float(lo) <= z <= float(hi)
    assert abs(decimation_map(b, z) - w) < 1e-12


def test_inverse_branch_domain():
    with pytest.raises(DomainError):
        inverse_branch(2, 0, 2.5)
    with pytest.raises(ValueError):
        inverse_branch(2, 3, 1.0)
    assert inverse_branch(2, 2, 0.0) == pytest.approx(5 / 3, abs=1e-15)
    assert inverse_branch(2, 1, 2.0) == pytest.approx(2 / 3, abs=1e-15)


def test_critical_points():
    for b in (2, 5):
        for c in critical_points(b):
            assert abs(decimation_functions(b).derivative(c)) < 1e-12


def test_preimage_tree_order():
    gens = preimage_generations(2, [1 / 3, 5 / 3], 3)
    assert [len(g) for g in gens] == [2, 6, 18, 54]
    f = decimation_functions(2)
    for i, x in enumerate(gens[3]):
        word, seed = branch_word(i, 3, 2)
        y = x
        for j in word:
            lo, hi = f.branch_interval(j)
            assert float(lo) <= y <= float(hi)
            y = f(y)
        assert abs(y - gens[0][seed]) < 1e-12


def test_preimages_stay_distinct_at_depth():
    # near 0 the spacing falls far below any practical dedup tolerance
    pts = preimage_set(2, [1 / 3, 5 / 3], 12)
    assert len(pts) == 2 * 3 ** 12
    assert np.all(np.diff(pts) > 0)


def test_julia_approximation():
    pts = julia_approximation(3, 4)
    assert len(pts) == 81 and pts[0] == 0.0
    with pytest.raises(ValueError):
        julia_approximation(3, 2, seed=1.0)


def test_neumann_prediction_matches_frozen_oracle():
    pred = predicted_neumann_spectrum(2, 2)
    assert len(pred) == 12
    assert hausdorff_distance(pred.values, NEUMANN_2_2) < 1e-12


@pytest.mark.parametrize("b", [2, 3])
@pytest.mark.parametrize("level", [1, 2, 3])
def test_neumann_set_size(b, level):
    assert len(predicted_neumann_spectrum(b, level)) == 4 * 3 ** (level - 1)


@pytest.mark.parametrize("b, level", [(2, 2), (2, 3), (3, 2)])
def test_dirichlet_prediction(b, level):
    pred = predicted_dirichlet_spectrum(b, level)
    assert pred.total_multiplicity == vertex_count(b, level) - 2
    orc = oracle_spectrum(b, level, "dirichlet")
    assert hausdorff_distance(orc.values, pred.values) < 1e-10
    assert list(orc.multiplicities) == [e.multiplicity for e in pred.entries]


def test_dirichlet_multiplicity_formula():
    assert dirichlet_multiplicity(2, 2, 0) == 2
    assert dirichlet_multiplicity(3, 3, 0) == ((3 - 1) * 25 + 2) // 4
    with pytest.raises(ValueError):
        predicted_dirichlet_spectrum(2, 0)


def test_hausdorff():
    assert hausdorff_distance([0, 1], [0, 1.5, 1]) == 0.5
    assert hausdorff_distance([], []) == 0.0
