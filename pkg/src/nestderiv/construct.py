"""Explicit implementing operators for derivations on a nest algebra.

Given a derivation table and an interior invariant projection p, assembles
the operators b1 (implements on p), c1, b2 = b1 + c1 (implements on pSp),
c2 and b = b2 + c2 (implements on pSp and the complementary corner), the
two-projection implementer (1 - 2p) delta(p), and the triple product rule
residual whose vanishing is equivalent to b implementing the derivation on
all of the algebra.
"""

from dataclasses import dataclass

import numpy as np

from .algebra import NestAlgebra
from .derivation import DerivationTable, NormEstimate, evaluate, norm_estimate
from .linalg import (
    _as_matrix,
    _as_vector,
    adjoint,
    matrix_to_json,
    op_norm,
    rank_one,
    scalar_identity_part,
)


@dataclass(frozen=True)
class ConstructionChoices:
    """The free choices of the construction: p index, xi0 in p-perp, eta1 in p."""

    k: int
    xi0: np.ndarray
    eta1: np.ndarray

    def validate(self, alg: NestAlgebra):
        if not 1 <= self.k <= alg.num_levels or alg.chain[self.k - 1] >= alg.n:
            raise ValueError(f"k={self.k} is not an interior chain index for {alg.chain}")
        d = alg.chain[self.k - 1]
        xi0 = _as_vector(self.xi0)
        eta1 = _as_vector(self.eta1)
        if xi0.size != alg.n or eta1.size != alg.n:
            raise ValueError("choice vectors must have the algebra dimension")
        if abs(np.linalg.norm(xi0) - 1.0) > 1e-12 or abs(np.linalg.norm(eta1) - 1.0) > 1e-12:
            raise ValueError("choice vectors must be unit vectors")
        if np.any(xi0[:d] != 0):
            raise ValueError("xi0 must lie in p-perp (first d coordinates zero)")
        if np.any(eta1[d:] != 0):
            raise ValueError("eta1 must lie in p (last n - d coordinates zero)")
        return d


@dataclass
class ConstructionArtifacts:
    """The constructed operators and the choices that produced them."""

    b1: np.ndarray
    c1: np.ndarray
    b2: np.ndarray
    c2: np.ndarray
    b: np.ndarray
    choices: ConstructionChoices


@dataclass
class RuleResidual:
    """Triple-product-rule residuals per (p-perp basis index, p basis index)."""

    residuals: dict
    max_residual: float


@dataclass
class VerificationReport:
    residual_pSp: float
    residual_corner: float
    residual_full: float
    rule_max: float
    norms: dict
    gauge: tuple | None
    tol: float

    @property
    def thm11_ok(self) -> bool:
        return self.residual_pSp <= self.tol

    @property
    def thm12_ok(self) -> bool:
        return max(self.residual_pSp, self.residual_corner) <= self.tol

    @property
    def thm13_ok(self) -> bool:
        return max(self.residual_full, self.rule_max) <= self.tol

    def to_json(self) -> dict:
        gauge = None
        if self.gauge is not None:
            lam, residual = self.gauge
            gauge = {"lambda": [float(lam.real), float(lam.imag)], "residual": float(residual)}
        return {
            "residual_pSp": float(self.residual_pSp),
            "residual_corner": float(self.residual_corner),
            "residual_full": float(self.residual_full),
            "rule_max": float(self.rule_max),
            "norms": self.norms,
            "gauge": gauge,
            "pass": {"thm11": self.thm11_ok, "thm12": self.thm12_ok, "thm13": self.thm13_ok},
        }


def default_choices(alg: NestAlgebra, k: int | None = None) -> ConstructionChoices:
    """Reproducible defaults: d_k nearest ceil(n/2), first basis vectors of p-perp and p."""
    interior = [kk for kk in range(1, alg.num_levels + 1) if alg.chain[kk - 1] < alg.n]
    if not interior:
        raise ValueError("algebra has no interior invariant projection")
    if k is None:
        target = (alg.n + 1) // 2
        k = min(interior, key=lambda kk: (abs(alg.chain[kk - 1] - target), kk))
    d = alg.chain[k - 1]
    if d >= alg.n:
        raise ValueError(f"k={k} is not interior")
    xi0 = np.zeros(alg.n, dtype=complex)
    xi0[d] = 1.0
    eta1 = np.zeros(alg.n, dtype=complex)
    eta1[0] = 1.0
    return ConstructionChoices(k=k, xi0=xi0, eta1=eta1)


def build_b1(table: DerivationTable, choices: ConstructionChoices) -> np.ndarray:
    """Column-by-column assembly of the p-side implementer.

    For each basis vector eta of p, the rank-one a = xi0 (x) eta lies in the
    algebra, carries xi0 to eta, and equals a p0 for p0 = xi0 (x) xi0; the
    column of b1 at eta is delta(a p0) xi0.  Columns in p-perp are zero.
    """
    alg = table.alg
    d = choices.validate(alg)
    xi0 = _as_vector(choices.xi0)
    p0 = rank_one(xi0, xi0)
    b1 = np.zeros((alg.n, alg.n), dtype=complex)
    for i in range(d):
        eta = np.zeros(alg.n, dtype=complex)
        eta[i] = 1.0
        a = rank_one(xi0, eta) @ p0
        b1[:, i] = evaluate(table, a) @ xi0
    return b1


def build_c1(table: DerivationTable, choices: ConstructionChoices) -> np.ndarray:
    """c1 = -p delta(p) p-perp; kills p and matches -delta(p) on p-perp."""
    alg = table.alg
    choices.validate(alg)
    p = alg.lattice_projection(choices.k)
    pperp = np.eye(alg.n) - p
    return -p @ evaluate(table, p) @ pperp


def build_c2(table: DerivationTable, choices: ConstructionChoices, basis=None) -> np.ndarray:
    """The corner correction, summed over an orthonormal basis of p-perp.

    For each basis vector xi_a of p-perp, with q_a = xi_a (x) eta1 and
    q1 = xi0 (x) eta1, the row block of c2 at xi_a is
    -q_a* delta(q_a) p-perp + q_a* delta(q1) q1* q_a.  The result is
    independent of the basis (that is the linearity lemma, tested separately).
    """
    alg = table.alg
    d = choices.validate(alg)
    n = alg.n
    xi0 = _as_vector(choices.xi0)
    eta1 = _as_vector(choices.eta1)
    p = alg.lattice_projection(choices.k)
    pperp = np.eye(n) - p

    if basis is None:
        basis = []
        for a in range(d, n):
            xi = np.zeros(n, dtype=complex)
            xi[a] = 1.0
            basis.append(xi)

    q1 = rank_one(xi0, eta1)
    dq1 = evaluate(table, q1)
    c2 = np.zeros((n, n), dtype=complex)
    for xi in basis:
        xi = _as_vector(xi)
        p_xi = rank_one(xi, xi)
        q = rank_one(xi, eta1)
        qs = adjoint(q)
        c2 += p_xi @ (-qs @ evaluate(table, q) @ pperp + qs @ dq1 @ adjoint(q1) @ q)
    return c2


def build_b(table: DerivationTable, choices: ConstructionChoices) -> ConstructionArtifacts:
    """Full pipeline: b = b1 + c1 + c2."""
    b1 = build_b1(table, choices)
    c1 = build_c1(table, choices)
    b2 = b1 + c1
    c2 = build_c2(table, choices)
    return ConstructionArtifacts(b1=b1, c1=c1, b2=b2, c2=c2, b=b2 + c2, choices=choices)


def two_projection_b(table: DerivationTable, k: int) -> np.ndarray:
    """(1 - 2p) delta(p): implements the derivation on the single projection p."""
    p = table.alg.lattice_projection(k)
    return (np.eye(table.alg.n) - 2.0 * p) @ evaluate(table, p)


def triple_rule_residual(table: DerivationTable, choices: ConstructionChoices) -> RuleResidual:
    """Residual of the triple product rule over all rank-one corner elements.

    For q = xi_a (x) eta with xi_a ranging over the basis of p-perp and eta
    over the basis of p, checks
    delta(q) = delta(q q_a* q1) q1* q_a + q q_a* delta(q_a) - q q_a* delta(q1) q1* q_a.
    Every evaluation argument lies in the algebra; if not, the construction
    itself is broken and an error propagates.
    """
    alg = table.alg
    d = choices.validate(alg)
    n = alg.n
    xi0 = _as_vector(choices.xi0)
    eta1 = _as_vector(choices.eta1)
    q1 = rank_one(xi0, eta1)
    q1s = adjoint(q1)
    dq1 = evaluate(table, q1)

    residuals = {}
    max_residual = 0.0
    for a in range(d, n):
        xi_a = np.zeros(n, dtype=complex)
        xi_a[a] = 1.0
        q_a = rank_one(xi_a, eta1)
        qas = adjoint(q_a)
        dqa = evaluate(table, q_a)
        for i in range(d):
            eta = np.zeros(n, dtype=complex)
            eta[i] = 1.0
            q = rank_one(xi_a, eta)
            rhs = (
                evaluate(table, q @ qas @ q1) @ q1s @ q_a
                + q @ qas @ dqa
                - q @ qas @ dq1 @ q1s @ q_a
            )
            residual = op_norm(evaluate(table, q) - rhs)
            residuals[(a, i)] = residual
            if residual > max_residual:
                max_residual = residual
    return RuleResidual(residuals=residuals, max_residual=max_residual)


def _commutator_residual(table: DerivationTable, b: np.ndarray, units) -> float:
    worst = 0.0
    for u in units:
        e = table.alg.unit_matrix(u)
        residual = op_norm(table.values[u] - (b @ e - e @ b))
        worst = max(worst, residual)
    return worst


def verify(
    table: DerivationTable,
    artifacts: ConstructionArtifacts,
    tol: float | None = None,
    generator=None,
    norm_samples: int = 32,
    norm_seed: int = 0,
    norms: NormEstimate | None = None,
) -> VerificationReport:
    """Residual verification of the implementation claims.

    Measures commutator residuals of b2 and b against the table over the pSp
    units, of b over the complementary corner units and over all units, the
    triple-rule residual, the operator norms against the derivation-norm
    bounds, and (when the inner generator is known) the gauge scalar by which
    b differs from it.
    """
    alg = table.alg
    choices = artifacts.choices
    d = choices.validate(alg)
    if tol is None:
        tol = 1e-9 * table.value_scale

    units = alg.basis_units()
    units_psp = [u for u in units if u.i < d and u.j < d]
    units_corner = [u for u in units if u.i >= d and u.j >= d]

    residual_psp = max(
        _commutator_residual(table, artifacts.b2, units_psp),
        _commutator_residual(table, artifacts.b, units_psp),
    )
    residual_corner = _commutator_residual(table, artifacts.b, units_corner)
    residual_full = _commutator_residual(table, artifacts.b, units)
    rule = triple_rule_residual(table, choices)

    estimate = norms if norms is not None else norm_estimate(
        table, samples=norm_samples, seed=norm_seed, generator=generator
    )
    norm_data = {
        "b1": op_norm(artifacts.b1),
        "b2": op_norm(artifacts.b2),
        "b": op_norm(artifacts.b),
        "delta_lower": estimate.lower,
        "delta_upper": estimate.upper,
    }

    gauge = None
    if generator is not None:
        gauge = scalar_identity_part(artifacts.b - _as_matrix(generator))

    return VerificationReport(
        residual_pSp=residual_psp,
        residual_corner=residual_corner,
        residual_full=residual_full,
        rule_max=rule.max_residual,
        norms=norm_data,
        gauge=gauge,
        tol=tol,
    )


def artifacts_to_json(artifacts: ConstructionArtifacts) -> dict:
    return {
        "k": int(artifacts.choices.k),
        "xi0": matrix_to_json(artifacts.choices.xi0.reshape(1, -1)),
        "eta1": matrix_to_json(artifacts.choices.eta1.reshape(1, -1)),
        "b1": matrix_to_json(artifacts.b1),
        "c1": matrix_to_json(artifacts.c1),
        "b2": matrix_to_json(artifacts.b2),
        "c2": matrix_to_json(artifacts.c2),
        "b": matrix_to_json(artifacts.b),
    }
