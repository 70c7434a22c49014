import numpy as np
import pytest

from lazyrm import (DenseOracleMatrix, EnsembleSpec, GOEOperator, OracleCapExceeded, RandomSource,
                    SubsampledHaarOperator, USVOperator, build_operator, dense_haar, faults, goe_probe,
                    make_lazy, sample_dense, subsampled_probe, usv_probe)
from lazyrm.ensembles import CAP_ENV, oracle_cap


def reveal(op, side="right"):
    n = op.input_dim(side)
    return np.column_stack([op.probe(e, side) for e in np.eye(n)])


def test_goe_is_symmetric_with_right_variances():
    diag, off = [], []
    for s in range(1500):
        op = GOEOperator(4, RandomSource(s, 1), sigma=1.0)
        M = np.column_stack([goe_probe(op, e) for e in np.eye(4)[:2]])  # budget n//2 = 2
        diag.append(M[0, 0])
        off.append(M[1, 0])
        assert abs(M[0, 1] - M[1, 0]) < 1e-12
    assert abs(np.var(diag) - 2.0) < 0.2
    assert abs(np.var(off) - 1.0) < 0.1


def test_goe_budget():
    op = GOEOperator(5)
    assert op.remaining == 2


def test_usv_singular_values():
    sv = np.array([3.0, 2.0, 0.5])
    op = USVOperator(3, 5, sv, RandomSource(2))
    M = np.column_stack([usv_probe(op, e) for e in np.eye(5)[:3]])
    # three probes reveal a 3 x 3 block; the full matrix is checked on the dense path
    assert M.shape == (3, 3)
    D = sample_dense(EnsembleSpec("usv", 5, 3, singular_values=sv), RandomSource(2)).matrix
    np.testing.assert_allclose(np.linalg.svd(D, compute_uv=False), sv, atol=1e-12)
    with pytest.raises(ValueError):
        USVOperator(3, 5, [1.0, 2.0])


def test_usv_full_reveal():
    sv = np.array([3.0, 2.0])
    op = USVOperator(4, 2, sv, RandomSource(6))
    M = reveal(op)
    np.testing.assert_allclose(np.linalg.svd(M, compute_uv=False), sv, atol=1e-12)


def test_subsampled_haar_rows_orthonormal():
    op = SubsampledHaarOperator(3, 7, RandomSource(1))
    assert op.shape == (3, 7)
    A = np.array([subsampled_probe(op, e, "left") for e in np.eye(3)])
    np.testing.assert_allclose(A @ A.T, np.eye(3), atol=1e-12)
    with pytest.raises(ValueError):
        SubsampledHaarOperator(8, 7)


@pytest.mark.parametrize("field", ["real", "complex"])
def test_dense_haar_unitary_and_phase_corrected(field):
    Qs = [dense_haar(6, RandomSource(s, 0, field)) for s in range(600)]
    for Q in Qs[:5]:
        np.testing.assert_allclose(Q.conj().T @ Q, np.eye(6), atol=1e-12)
    q00 = np.array([Q[0, 0] for Q in Qs])
    assert abs(np.mean(q00.real > 0) - 0.5) < 0.08


def test_uncorrected_qr_is_biased():
    with faults.inject("uncorrected-qr"):
        q00 = np.array([dense_haar(6, RandomSource(s))[0, 0] for s in range(200)])
    assert np.mean(q00 > 0) < 0.1 or np.mean(q00 > 0) > 0.9


def test_dense_oracle_probes():
    M = np.arange(6.0).reshape(2, 3) + 1j
    op = DenseOracleMatrix(M, "x")
    np.testing.assert_allclose(op.probe(np.ones(3)), M @ np.ones(3))
    np.testing.assert_allclose(op.probe(np.ones(2), "left"), M.conj().T @ np.ones(2))
    assert op.remaining is None and "x" in repr(op)
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 1


@pytest.mark.parametrize("spec", [EnsembleSpec("ginibre", 5, 4, 0.5), EnsembleSpec("haar", 5),
                                  EnsembleSpec("goe", 5), EnsembleSpec("usv", 5, 4),
                                  EnsembleSpec("subsampled-haar", 3, 5)])
@pytest.mark.parametrize("backend", ["hd", "direct"])
def test_build_operator_shapes(spec, backend):
    op = build_operator(spec, backend, RandomSource(0))
    assert op.shape == spec.shape
    x = np.ones(spec.shape[1])
    assert op.probe(x).shape == (spec.shape[0],)


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec("wishart", 3)
    with pytest.raises(ValueError):
        EnsembleSpec("ginibre", 3)
    with pytest.raises(ValueError):
        build_operator(EnsembleSpec("haar", 3), "magic")


def test_complex_field_from_spec():
    op = make_lazy(EnsembleSpec("haar", 4, field="complex"), 3)
    assert np.iscomplexobj(op.probe(np.ones(4)))
    D = sample_dense(EnsembleSpec("goe", 4, field="complex"), 3).matrix
    np.testing.assert_allclose(D, D.conj().T)


def test_oracle_cap(monkeypatch):
    monkeypatch.setenv(CAP_ENV, "100")
    assert oracle_cap() == 100
    with pytest.raises(OracleCapExceeded):
        sample_dense(EnsembleSpec("ginibre", 20, 10))
    with pytest.raises(OracleCapExceeded):
        sample_dense(EnsembleSpec("subsampled-haar", 2, 11))
    sample_dense(EnsembleSpec("ginibre", 10, 10))
