"""Per-level implementers along the invariant chain and their normalization.

For every interior chain projection p_a an operator b_a implementing the
derivation on p_a is built.  Any two of them differ by a scalar on the range
of the smaller projection; the normalization pass removes those scalars
against the smallest level, after which the family is consistent and the top
operator is the stabilized implementer (the finite stand-in for a strong
limit, which is meaningless at finite dimension).
"""

from dataclasses import dataclass

import numpy as np

from .algebra import NestAlgebra
from .construct import build_b1, ConstructionChoices
from .derivation import DerivationTable
from .linalg import matrix_to_json, op_norm, scalar_identity_part


@dataclass
class ChainMember:
    k: int
    b: np.ndarray
    choices: ConstructionChoices


@dataclass
class ChainFamily:
    alg: NestAlgebra
    members: list
    # (k_alpha, k_beta) -> (lambda, residual) for k_alpha < k_beta
    lambdas: dict

    def to_json(self) -> dict:
        out = []
        for m in self.members:
            lams = [
                {"beta": kb, "value": [lam.real, lam.imag], "residual": residual}
                for (ka, kb), (lam, residual) in sorted(self.lambdas.items())
                if ka == m.k
            ]
            out.append({"k": m.k, "b": matrix_to_json(m.b), "lambdas": lams})
        return {"family": out}


def _level_choices(alg: NestAlgebra, k: int) -> ConstructionChoices:
    d = alg.chain[k - 1]
    xi0 = np.zeros(alg.n, dtype=complex)
    xi0[d] = 1.0
    eta1 = np.zeros(alg.n, dtype=complex)
    eta1[0] = 1.0
    return ConstructionChoices(k=k, xi0=xi0, eta1=eta1)


def _compressed_scalar(alg: NestAlgebra, delta_b: np.ndarray, d: int):
    """Scalar part of an operator difference compressed to the first d coordinates."""
    return scalar_identity_part(delta_b[:d, :d])


def chain_family(table: DerivationTable) -> ChainFamily:
    """b_a for every interior chain level plus pairwise consistency scalars."""
    alg = table.alg
    interior = [k for k in range(1, alg.num_levels + 1) if alg.chain[k - 1] < alg.n]
    if not interior:
        raise ValueError("irreducible model: construction inapplicable (chain has no interior projection)")
    members = []
    for k in interior:
        choices = _level_choices(alg, k)
        members.append(ChainMember(k=k, b=build_b1(table, choices), choices=choices))
    lambdas = {}
    for ia, ma in enumerate(members):
        da = alg.chain[ma.k - 1]
        for mb in members[ia + 1 :]:
            lambdas[(ma.k, mb.k)] = _compressed_scalar(alg, ma.b - mb.b, da)
    return ChainFamily(alg=alg, members=members, lambdas=lambdas)


def normalize_chain(family: ChainFamily) -> ChainFamily:
    """Shift each member by a scalar on its projection so differences vanish.

    Against the smallest interior level a0: b_b += lambda_{a0 b} * p_b, which
    zeroes the compression of (b_a0 - b_b) to range(p_a0); the remaining
    pairwise scalars then vanish as well since every p_a dominates p_a0.
    """
    if len(family.members) <= 1:
        return family
    alg = family.alg
    base = family.members[0]
    members = [ChainMember(k=base.k, b=base.b.copy(), choices=base.choices)]
    for m in family.members[1:]:
        lam, _ = family.lambdas[(base.k, m.k)]
        p = alg.lattice_projection(m.k)
        members.append(ChainMember(k=m.k, b=m.b + lam * p, choices=m.choices))
    lambdas = {}
    for ia, ma in enumerate(members):
        da = alg.chain[ma.k - 1]
        for mb in members[ia + 1 :]:
            lambdas[(ma.k, mb.k)] = _compressed_scalar(alg, ma.b - mb.b, da)
    return ChainFamily(alg=alg, members=members, lambdas=lambdas)


def stabilized_b(family: ChainFamily) -> np.ndarray:
    """The top-level operator of a normalized family (the finite 'limit')."""
    return max(family.members, key=lambda m: m.k).b


def implements_on_projection(table: DerivationTable, b: np.ndarray, k: int) -> float:
    """max over basis units u of op_norm((delta(u) - [b, u]) p) for p at level k."""
    alg = table.alg
    p = alg.lattice_projection(k)
    worst = 0.0
    for u in alg.basis_units():
        e = alg.unit_matrix(u)
        residual = op_norm((table.values[u] - (b @ e - e @ b)) @ p)
        worst = max(worst, residual)
    return worst
