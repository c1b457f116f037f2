from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from roughlab.services.exact_dist import degenerate, product_coupling, uniform
from roughlab.services.index_sets import ArithProg, Powers
from roughlab.services.montecarlo import (
    COLUMNS,
    SampleConfig,
    calibration,
    estimate_density,
    estimate_exceedance,
    mc_check,
    sample_cells,
    substream,
)

HALF = Fraction(1, 2)


def test_exact_column_uses_symbolic_exceedance(docs):
    seq = docs["ex2.5"].sequence
    cfg = SampleConfig(seed=7, samples_per_index=2000)
    est = estimate_exceedance(seq, degenerate(1), Fraction(1), HALF, 10, cfg)
    assert est.exact == Fraction(1, 1024)
    assert est.passed
    assert est.row()["exact"] == "1/1024"


def test_degenerate_pieces_have_zero_spread(docs):
    seq = docs["split"].sequence
    cfg = SampleConfig(seed=1, samples_per_index=500)
    odd = estimate_exceedance(seq, degenerate(0), Fraction(0), HALF, 3, cfg)
    even = estimate_exceedance(seq, degenerate(0), Fraction(0), HALF, 4, cfg)
    assert (odd.exact, odd.estimate, odd.sigma, odd.passed) == (0, 0.0, 0.0, True)
    assert (even.exact, even.estimate, even.sigma, even.passed) == (1, 1.0, 0.0, True)


def test_frame_layout(docs):
    doc = docs["quarter"]
    frame = mc_check(doc.sequence, doc.target, Fraction(0), HALF,
                     SampleConfig(seed=3, samples_per_index=200, index_budget=(4, 1, 2)))
    assert list(frame.columns) == COLUMNS
    assert frame["n"].tolist() == [1, 2, 4]
    assert frame["exact"].tolist() == ["1/2", "3/4", "3/4"]


def test_results_independent_of_budget_order(docs):
    doc = docs["ex3.5"]
    first = mc_check(doc.sequence, doc.target, Fraction(1), HALF,
                     SampleConfig(seed=11, samples_per_index=300, index_budget=(5, 3, 9)))
    again = mc_check(doc.sequence, doc.target, Fraction(1), HALF,
                     SampleConfig(seed=11, samples_per_index=300, index_budget=(9, 3, 5, 5)))
    pd.testing.assert_frame_equal(first, again)
    wider = mc_check(doc.sequence, doc.target, Fraction(1), HALF,
                     SampleConfig(seed=11, samples_per_index=300, index_budget=(3, 4, 5, 6, 9)))
    assert wider.set_index("n").loc[[3, 5, 9], "estimate"].tolist() == first["estimate"].tolist()


def test_seed_changes_draws():
    a = substream(1, 10).integers(0, 1 << 30, size=8)
    b = substream(2, 10).integers(0, 1 << 30, size=8)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, substream(1, 10).integers(0, 1 << 30, size=8))


def test_cell_sampling_follows_probabilities():
    x, y = uniform([0, 1, 2, 3]), degenerate(0)
    cells = sample_cells(product_coupling(x, y), 40_000, substream(5, 1))
    counts = np.bincount(cells, minlength=4) / 40_000
    assert np.allclose(counts, 0.25, atol=0.02)


@pytest.mark.slow
@pytest.mark.parametrize("name,r", [("quarter", Fraction(0)), ("ex3.5", Fraction(1)), ("ex2.5", Fraction(0))])
def test_calibration(docs, name, r):
    doc = docs[name]
    cfg = SampleConfig(seed=20240601, samples_per_index=10_000, index_budget=tuple(range(1, 201)))
    frame = mc_check(doc.sequence, doc.target, r, Fraction(1, 4), cfg)
    assert len(frame) == 200
    assert calibration(frame) >= 0.95


def test_calibration_of_empty_frame():
    assert calibration(pd.DataFrame(columns=COLUMNS)) == 1.0


def test_density_by_counting():
    assert estimate_density(ArithProg(2, 1), 10) == HALF
    assert estimate_density(Powers(2), 16) == Fraction(1, 4)
    with pytest.raises(ValueError):
        estimate_density(ArithProg(2, 1), 0)


def test_sample_config():
    with pytest.raises(ValueError):
        SampleConfig(seed=1, samples_per_index=0)
    cfg = SampleConfig.from_settings((3, 1))
    assert cfg.seed == 20240601
    assert cfg.samples_per_index == 10000
    assert cfg.index_budget == (3, 1)
    assert SampleConfig.from_settings(seed=5, samples=10).samples_per_index == 10
