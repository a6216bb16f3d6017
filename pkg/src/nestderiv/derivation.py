"""Derivations on a nest algebra, stored as tables on the matrix-unit basis.

A derivation delta is determined by its values delta(E_ij) on the admissible
matrix units; evaluation on a general algebra element is by entrywise
linearity.  Evaluation outside the algebra is an error, never an
extrapolation.
"""

from dataclasses import dataclass, field

import numpy as np

from .algebra import MatrixUnit, NestAlgebra
from .linalg import (
    DimensionError,
    _as_matrix,
    matrix_from_json,
    matrix_to_json,
    op_norm,
)


class EvaluationDomainError(ValueError):
    """Raised when a derivation is evaluated outside its algebra."""


@dataclass
class DerivationTable:
    """delta given by its values on the basis units of alg."""

    alg: NestAlgebra
    values: dict
    tol: float = 1e-9
    validated: bool = False

    def __post_init__(self):
        n = self.alg.n
        units = self.alg.basis_units()
        missing = [u for u in units if tuple(u) not in {tuple(k) for k in self.values}]
        if missing:
            raise ValueError(f"missing table entries for units {missing[:4]}...")
        clean = {}
        for key, val in self.values.items():
            val = _as_matrix(val)
            if val.shape != (n, n):
                raise DimensionError(f"value for {key} has shape {val.shape}, expected {(n, n)}")
            if not np.all(np.isfinite(val)):
                raise ValueError(f"non-finite value for unit {key}")
            clean[MatrixUnit(*key)] = val
        self.values = clean

    @property
    def value_scale(self) -> float:
        """1 + max operator norm over the table, the residual scale."""
        return 1.0 + max((op_norm(v) for v in self.values.values()), default=0.0)

    def to_json(self) -> dict:
        entries = [
            {"i": int(u.i), "j": int(u.j), "value": matrix_to_json(self.values[u])}
            for u in sorted(self.values)
        ]
        return {
            "algebra": {"n": self.alg.n, "chain": list(self.alg.chain)},
            "entries": entries,
            "tol": self.tol,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DerivationTable":
        alg = NestAlgebra(int(obj["algebra"]["n"]), tuple(obj["algebra"]["chain"]))
        values = {
            (int(e["i"]), int(e["j"])): matrix_from_json(e["value"]) for e in obj["entries"]
        }
        return cls(alg, values, tol=float(obj.get("tol", 1e-9)))


@dataclass
class ValidationReport:
    max_residual: float
    failing_pairs: list = field(default_factory=list)
    tol: float = 1e-9

    @property
    def ok(self) -> bool:
        return not self.failing_pairs


@dataclass
class NormEstimate:
    """Sampled lower bound and, for known inner generators, analytic upper bound."""

    lower: float
    upper: float | None = None


def inner_from(alg: NestAlgebra, c) -> DerivationTable:
    """The inner derivation d_c(a) = c a - a c, tabulated on the basis units."""
    c = _as_matrix(c)
    if c.shape != (alg.n, alg.n):
        raise DimensionError(f"generator must be {alg.n}x{alg.n}, got {c.shape}")
    values = {}
    for u in alg.basis_units():
        e = alg.unit_matrix(u)
        values[u] = c @ e - e @ c
    table = DerivationTable(alg, values)
    table.validated = True
    return table


def validate(table: DerivationTable) -> ValidationReport:
    """Check the product rule on every pair of basis units.

    For units (E_ij, E_kl): delta(E_ij) E_kl + E_ij delta(E_kl) must equal
    delta(E_il) when j == k and 0 otherwise, to the table tolerance scaled by
    the magnitude of the stored values.
    """
    alg = table.alg
    units = alg.basis_units()
    scaled_tol = table.tol * table.value_scale
    max_residual = 0.0
    failing = []
    unit_mats = {u: alg.unit_matrix(u) for u in units}
    for u in units:
        du = table.values[u]
        for v in units:
            lhs = du @ unit_mats[v] + unit_mats[u] @ table.values[v]
            if u.j == v.i:
                lhs = lhs - table.values[MatrixUnit(u.i, v.j)]
            residual = op_norm(lhs)
            if residual > max_residual:
                max_residual = residual
            if residual > scaled_tol:
                failing.append((tuple(u), tuple(v), residual))
    report = ValidationReport(max_residual=max_residual, failing_pairs=failing, tol=scaled_tol)
    table.validated = report.ok
    return report


def evaluate(table: DerivationTable, a) -> np.ndarray:
    """delta(a) = sum over admissible units of a_ij * delta(E_ij).

    a must lie in the algebra (within the table tolerance).
    """
    a = _as_matrix(a)
    alg = table.alg
    if not alg.contains(a, tol=table.tol * max(1.0, op_norm(a))):
        raise EvaluationDomainError("derivation undefined outside S")
    out = np.zeros((alg.n, alg.n), dtype=complex)
    for u, value in table.values.items():
        coeff = a[u.i, u.j]
        if coeff != 0:
            out += coeff * value
    return out


def _random_algebra_element(alg: NestAlgebra, rng) -> np.ndarray:
    mask = alg.pattern_mask()
    a = rng.standard_normal((alg.n, alg.n)) + 1j * rng.standard_normal((alg.n, alg.n))
    a[~mask] = 0.0
    norm = op_norm(a)
    return a / norm if norm > 0 else a


def _golden_min(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Golden-section minimizer of a unimodal f on [lo, hi]; returns argmin."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 > f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f(x1)
    return 0.5 * (lo + hi)


def distance_to_scalars(c, tol: float = 1e-10):
    """min over lam of op_norm(c - lam I), by coordinate descent on re/im.

    The map lam -> op_norm(c - lam I) is convex; golden-section search on the
    real and imaginary parts alternately converges to the target tolerance.
    Returns (lam, distance).
    """
    c = _as_matrix(c)
    n = c.shape[0]
    eye = np.eye(n)
    lam = complex(np.trace(c) / n)
    best = op_norm(c - lam * eye)
    for _ in range(30):
        # the minimizer lies within 2*f(lam) of lam, by the triangle inequality
        radius = 2.0 * best + tol
        re = _golden_min(lambda x: op_norm(c - complex(x, lam.imag) * eye), lam.real - radius, lam.real + radius, tol)
        lam = complex(re, lam.imag)
        im = _golden_min(lambda y: op_norm(c - complex(lam.real, y) * eye), lam.imag - radius, lam.imag + radius, tol)
        lam = complex(lam.real, im)
        current = op_norm(c - lam * eye)
        if best - current < tol:
            best = min(best, current)
            break
        best = current
    return lam, op_norm(c - lam * eye)


def norm_estimate(table: DerivationTable, samples: int = 32, seed: int = 0, generator=None) -> NormEstimate:
    """Bounds on the derivation norm over the unit ball of the algebra.

    lower: best sampled op_norm(delta(a)) over unit-norm a in the algebra,
    refined by a short random local ascent.  upper (when the inner generator
    c is known): 2 * min over lam of op_norm(c - lam I), valid because the
    restricted norm is at most the norm of d_c on all of B(H).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    alg = table.alg
    mask = alg.pattern_mask()

    best_a = None
    lower = 0.0
    for _ in range(samples):
        a = _random_algebra_element(alg, rng)
        val = op_norm(evaluate(table, a))
        if val > lower:
            lower, best_a = val, a

    if best_a is not None:
        step = 0.5
        for _ in range(40):
            perturb = rng.standard_normal((alg.n, alg.n)) + 1j * rng.standard_normal((alg.n, alg.n))
            perturb[~mask] = 0.0
            cand = best_a + step * perturb
            norm = op_norm(cand)
            if norm == 0:
                continue
            cand = cand / norm
            val = op_norm(evaluate(table, cand))
            if val > lower:
                lower, best_a = val, cand
            else:
                step *= 0.8

    upper = None
    if generator is not None:
        _, dist = distance_to_scalars(_as_matrix(generator))
        upper = 2.0 * dist
    return NormEstimate(lower=lower, upper=upper)
