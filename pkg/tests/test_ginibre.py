import json
from pathlib import Path

import numpy as np
import pytest

import reference as ref
from lazyrm import BudgetExhausted, HDGinibre, RandomSource, faults, ginibre_new, ginibre_probe, ginibre_probe_count

FROZEN = json.loads((Path(__file__).parent / "data" / "frozen.json").read_text())


@pytest.mark.parametrize("case", FROZEN["ginibre"], ids=lambda c: f"seed{c['seed']}")
def test_matches_frozen_dense_oracle(case):
    op = HDGinibre(case["m"], case["n"], case["sigma"], RandomSource(case["seed"], case["stream"]))
    for side, x, y in zip(case["schedule"], case["x"], case["y"]):
        np.testing.assert_allclose(op.probe(np.array(x), side), y, atol=1e-12)


def test_frozen_oracle_is_reproducible():
    case = FROZEN["ginibre"][0]
    ys = ref.ginibre_probes(case["m"], case["n"], case["sigma"], case["seed"], case["stream"],
                            case["schedule"], [np.array(x) for x in case["x"]])
    for y, frozen in zip(ys, case["y"]):
        np.testing.assert_allclose(y, frozen, atol=1e-13)


def test_first_probe_is_norm_times_gaussian():
    x = np.array([0.0, 3.0, 4.0])
    op = HDGinibre(5, 3, 2.0, RandomSource(8))
    g = RandomSource(8).normal(5)
    np.testing.assert_allclose(op.probe(x), 2.0 * 5.0 * g, rtol=1e-14)


def test_budget_and_counts():
    op = ginibre_new(4, 3, 1.0, RandomSource(1))
    for side, vec in [("right", np.ones(3)), ("left", np.ones(4)), ("right", np.arange(3.0))]:
        ginibre_probe(op, vec, side)
    assert ginibre_probe_count(op) == (2, 1)
    assert op.remaining == 0
    with pytest.raises(BudgetExhausted):
        op.probe(np.ones(3))


def test_shape_checks():
    op = HDGinibre(4, 3)
    with pytest.raises(ValueError):
        op.probe(np.ones(4), "right")
    with pytest.raises(ValueError):
        op.probe(np.ones(3), "up")
    with pytest.raises(ValueError):
        op.probe(np.array([1.0, np.inf, 0.0]))
    for bad in [(0, 3), (3, 0)]:
        with pytest.raises(ValueError):
            HDGinibre(*bad)
    with pytest.raises(ValueError):
        HDGinibre(3, 3, sigma=0.0)


def test_basis_growth_beyond_initial_capacity():
    op = HDGinibre(60, 50, 1.0, RandomSource(2), capacity=1)
    rng = np.random.default_rng(0)
    for t in range(40):
        side = "right" if t % 3 else "left"
        op.probe(rng.standard_normal(op.input_dim(side)), side)
    U, V = op.basis
    assert U.shape == (40, 60) and V.shape == (40, 50)


def test_revealed_matrix_entry_statistics():
    # full reveal of a 6 x 4 Ginibre matrix by right probes of e_j
    sigma, m, n = 0.5, 6, 4
    mats = []
    for seed in range(3000):
        op = HDGinibre(m, n, sigma, RandomSource(seed, 11))
        mats.append(np.column_stack([op.probe(e) for e in np.eye(n)]))
    Q = np.stack(mats)
    assert abs(Q.mean()) < 4 * sigma / np.sqrt(Q.size)
    assert abs(Q.var() / sigma**2 - 1) < 0.03
    # independent entries: off-diagonal correlation of two fixed entries is ~0
    assert abs(np.corrcoef(Q[:, 0, 0], Q[:, 1, 1])[0, 1]) < 0.08


def test_complex_reveal_is_circular():
    op_vals = []
    for seed in range(2000):
        op = HDGinibre(3, 3, 1.0, RandomSource(seed, 12, "complex"))
        op_vals.append(op.probe(np.array([1.0, 0, 0]))[0])
        op.probe(np.array([0, 1j, 0]))
    z = np.array(op_vals)
    assert abs(np.mean(np.abs(z) ** 2) - 1) < 0.1
    assert abs(np.mean(z**2)) < 0.1


def test_skip_fault_breaks_consistency():
    rng = np.random.default_rng(0)
    x1, x2 = rng.standard_normal(5), rng.standard_normal(5)
    with faults.inject("skip-reflector"):
        op = HDGinibre(6, 5, 1.0, RandomSource(0))
        y1, y2 = op.probe(x1), op.probe(x2)
        y3 = op.probe(x1 + x2)
    assert np.linalg.norm(y3 - (y1 + y2)) > 1e-6
