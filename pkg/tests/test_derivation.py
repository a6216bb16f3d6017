import numpy as np
import pytest

from nestderiv.algebra import NestAlgebra
from nestderiv.derivation import (
    DerivationTable,
    EvaluationDomainError,
    distance_to_scalars,
    evaluate,
    inner_from,
    norm_estimate,
    validate,
)
from nestderiv.linalg import op_norm

from conftest import random_complex, unit


def zero_table(alg):
    return DerivationTable(alg, {u: np.zeros((alg.n, alg.n), dtype=complex) for u in alg.basis_units()})


class TestValidate:
    def test_zero_table_valid(self):
        report = validate(zero_table(NestAlgebra.triangular(3)))
        assert report.ok and report.max_residual == 0.0

    def test_inner_table_valid(self, rng):
        alg = NestAlgebra(4, (2, 4))
        table = inner_from(alg, random_complex(rng, (4, 4)))
        report = validate(table)
        assert report.ok
        assert report.max_residual < 1e-12 * table.value_scale

    def test_perturbed_table_invalid(self, rng):
        alg = NestAlgebra.triangular(2)
        table = inner_from(alg, random_complex(rng, (2, 2)))
        table.values[(0, 1)] = table.values[(0, 1)] + 1e-3 * unit(2, 0, 0)
        report = validate(table)
        assert not report.ok
        assert report.max_residual == pytest.approx(1e-3, rel=0.5)

    def test_missing_entry_rejected(self):
        alg = NestAlgebra.triangular(2)
        with pytest.raises(ValueError):
            DerivationTable(alg, {(0, 0): np.zeros((2, 2))})


class TestInnerFrom:
    def test_identity_generator_gives_zero(self):
        alg = NestAlgebra.triangular(3)
        table = inner_from(alg, np.eye(3))
        assert all(not v.any() for v in table.values.values())

    def test_lower_unit_generator(self):
        # c = E_21 (1-based): delta(E_11) = c, delta(E_12) = E_22 - E_11, delta(E_22) = -c
        alg = NestAlgebra.triangular(2)
        c = unit(2, 1, 0)
        table = inner_from(alg, c)
        assert np.array_equal(table.values[(0, 0)], c)
        assert np.array_equal(table.values[(0, 1)], unit(2, 1, 1) - unit(2, 0, 0))
        assert np.array_equal(table.values[(1, 1)], -c)

    def test_diagonal_generator(self):
        alg = NestAlgebra.triangular(2)
        table = inner_from(alg, np.diag([1.0, 2.0]))
        assert np.array_equal(table.values[(0, 1)], -unit(2, 0, 1))
        assert not table.values[(0, 0)].any()
        assert not table.values[(1, 1)].any()


class TestEvaluate:
    def test_zero_element(self, rng):
        alg = NestAlgebra.triangular(3)
        table = inner_from(alg, random_complex(rng, (3, 3)))
        assert not evaluate(table, np.zeros((3, 3))).any()

    def test_matches_commutator_on_algebra(self, rng):
        alg = NestAlgebra(5, (2, 3, 5))
        c = random_complex(rng, (5, 5))
        table = inner_from(alg, c)
        for _ in range(10):
            a = random_complex(rng, (5, 5))
            a[~alg.pattern_mask()] = 0
            assert op_norm(evaluate(table, a) - (c @ a - a @ c)) < 1e-12 * table.value_scale

    def test_outside_algebra_rejected(self, rng):
        alg = NestAlgebra.triangular(2)
        table = inner_from(alg, random_complex(rng, (2, 2)))
        with pytest.raises(EvaluationDomainError):
            evaluate(table, unit(2, 1, 0))

    def test_on_chain_projection(self, rng):
        alg = NestAlgebra.triangular(4)
        table = inner_from(alg, random_complex(rng, (4, 4)))
        p = alg.lattice_projection(2)
        expected = table.values[(0, 0)] + table.values[(1, 1)]
        assert op_norm(evaluate(table, p) - expected) < 1e-14


class TestDerivationInvariants:
    def test_vanishes_on_identity_and_scalars(self, rng):
        alg = NestAlgebra.triangular(4)
        table = inner_from(alg, random_complex(rng, (4, 4)))
        tol = 1e-12 * table.value_scale
        assert op_norm(evaluate(table, np.eye(4))) < tol
        assert op_norm(evaluate(table, (2.5 - 1j) * np.eye(4))) < tol

    def test_projection_corners_vanish(self, rng):
        # p delta(p) p = pperp delta(p) pperp = 0
        alg = NestAlgebra(6, (1, 4, 6))
        table = inner_from(alg, random_complex(rng, (6, 6)))
        tol = 1e-12 * table.value_scale
        for k in (1, 2):
            p = alg.lattice_projection(k)
            pperp = np.eye(6) - p
            dp = evaluate(table, p)
            assert op_norm(p @ dp @ p) < tol
            assert op_norm(pperp @ dp @ pperp) < tol

    def test_gauge_invariance_of_inner_tables(self, rng):
        alg = NestAlgebra.triangular(3)
        c = random_complex(rng, (3, 3))
        t1 = inner_from(alg, c)
        t2 = inner_from(alg, c + (3.7 + 0.2j) * np.eye(3))
        for u in alg.basis_units():
            assert np.allclose(t1.values[u], t2.values[u], atol=1e-13)


class TestNormEstimate:
    def test_zero_table(self):
        alg = NestAlgebra.triangular(2)
        est = norm_estimate(zero_table(alg), samples=4, seed=0, generator=np.zeros((2, 2)))
        assert est.lower == 0.0
        assert est.upper == pytest.approx(0.0, abs=1e-9)

    def test_diagonal_generator_upper(self):
        alg = NestAlgebra.triangular(2)
        table = inner_from(alg, np.diag([1.0, 2.0]))
        est = norm_estimate(table, samples=8, seed=0, generator=np.diag([1.0, 2.0]))
        assert est.upper == pytest.approx(1.0, abs=1e-9)

    def test_lower_unit_generator_bounds(self):
        alg = NestAlgebra.triangular(2)
        c = unit(2, 1, 0)
        table = inner_from(alg, c)
        est = norm_estimate(table, samples=16, seed=0, generator=c)
        assert est.upper == pytest.approx(2.0, abs=1e-9)
        # a = E_12 gives delta(a) = E_22 - E_11 of norm 1
        assert est.lower >= 1.0 - 1e-9
        assert est.lower <= est.upper + 1e-9

    def test_lower_below_upper(self, rng):
        for n in (3, 5):
            alg = NestAlgebra.triangular(n)
            c = random_complex(rng, (n, n))
            est = norm_estimate(inner_from(alg, c), samples=16, seed=7, generator=c)
            assert est.lower <= est.upper + 1e-9


class TestDistanceToScalars:
    def test_diagonal(self):
        lam, dist = distance_to_scalars(np.diag([1.0, 2.0]).astype(complex))
        assert abs(lam - 1.5) < 1e-5
        assert dist == pytest.approx(0.5, abs=1e-9)

    def test_already_scalar(self):
        lam, dist = distance_to_scalars((2 + 1j) * np.eye(3))
        assert abs(lam - (2 + 1j)) < 1e-8
        assert dist < 1e-9

    def test_never_above_trace_center(self, rng):
        for _ in range(5):
            c = random_complex(rng, (4, 4))
            lam, dist = distance_to_scalars(c)
            assert dist <= op_norm(c - (np.trace(c) / 4) * np.eye(4)) + 1e-12


def test_json_roundtrip(rng):
    alg = NestAlgebra(3, (1, 3))
    table = inner_from(alg, random_complex(rng, (3, 3)))
    table.tol = 1e-8
    restored = DerivationTable.from_json(table.to_json())
    assert restored.alg == alg
    assert restored.tol == 1e-8
    for u in alg.basis_units():
        assert np.allclose(restored.values[u], table.values[u], atol=1e-15)
