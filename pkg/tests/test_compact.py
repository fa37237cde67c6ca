from fractions import Fraction

import numpy as np
import pytest

from bubblediamond.compact import (
    KoenigsMap, compact_gap_label, compact_spectrum, functional_equation_residual,
    gap_sequence_check, koenigs_T,
)
from bubblediamond.decimation import decimation_functions
from bubblediamond.gaps import enumerate_gaps
from bubblediamond.jacobi import ConvergenceError

# frozen after the first verified run
BASE_GAP_RATIO_B2 = 1.1246600773015314
T2_B2 = 3.514944253108593


def test_basic_values():
    assert koenigs_T(2, 0.0) == 0.0
    assert koenigs_T(2, 2.0) == pytest.approx(T2_B2, rel=1e-12)
    h = 1e-7
    assert abs(koenigs_T(3, h) / h - 1) < 1e-6
    with pytest.raises(ValueError):
        koenigs_T(2, 2.5)
    with pytest.raises(ValueError):
        koenigs_T(2, 1.0, depth=0)


def test_non_convergence_reported():
    with pytest.raises(ConvergenceError):
        KoenigsMap(2, tol=0.0, max_depth=5)(1.0)


@pytest.mark.parametrize("b", [2, 3, 5, 8])
def test_functional_equation_and_monotonicity(b):
    t = KoenigsMap(b)
    assert functional_equation_residual(b, np.linspace(0, 2, 200)) < 1e-10
    assert abs(t.multiplier * t(1 / (b + 1)) - t(2.0)) < 1e-9
    assert np.all(np.diff(t(np.arange(0, 2.0001, 0.01))) > 0)


def test_multiplier_consistency():
    # resistance scaling (2b+1)/b times measure scaling b+2
    for b in range(2, 9):
        f = decimation_functions(b)
        assert f.multiplier == f.derivative(0) == Fraction(2 * b + 1, b) * (b + 2)


def test_compact_spectrum():
    b = 2
    cs = compact_spectrum(b, 3)
    values = [c.value for c in cs]
    assert values == sorted(values)
    assert values[0] == 0.0 and values[1] == pytest.approx(2 * T2_B2)
    assert len(set(values)) == len(values)
    t = KoenigsMap(b)
    for k in (1, 2, 3):
        lo, hi = 2 * t.multiplier ** k * t(1 / (b + 1)), 2 * t.multiplier ** k * t(b / (b + 1))
        assert not any(lo * (1 + 1e-12) < v < hi * (1 - 1e-12) for v in values)
    with pytest.raises(ValueError):
        compact_spectrum(2, 0)


def test_generation_scaling():
    b = 3
    cs = compact_spectrum(b, 3)
    lam = KoenigsMap(b).multiplier
    by_source = {(c.generation, round(c.source, 12)): c.value for c in cs}
    for (k, z), v in by_source.items():
        if k in (1, 2) and (k + 1, z) in by_source:
            assert by_source[k + 1, z] / v == pytest.approx(lam, rel=1e-12)


def test_multiplicity_policy():
    cs = compact_spectrum(2, 4)
    known = [c for c in cs if c.multiplicity is not None]
    assert known and all(c.generation >= 2 for c in known)


def test_gap_ratio():
    b = 2
    r = compact_gap_label(b, 1 / 3, 2 / 3)
    assert r == pytest.approx(BASE_GAP_RATIO_B2, rel=1e-10)
    seq = gap_sequence_check(b, 1 / 3, 2 / 3, 6)
    assert max(seq.ratios) - min(seq.ratios) < 1e-8 and seq.min_ratio == pytest.approx(r, abs=1e-8)
    for g in enumerate_gaps(b, 3):
        if g.left >= 1 / 3:
            assert compact_gap_label(b, g.left, g.right) > 0
    with pytest.raises(ValueError):
        compact_gap_label(b, 0.6, 0.5)
    with pytest.raises(ValueError):
        compact_gap_label(b, 0.01, 0.02)
