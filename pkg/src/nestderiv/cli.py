"""Batch front end: generate derivation tables, build and verify implementers.

Subcommands:
  generate   write a seeded random inner derivation table (and its generator)
  construct  build b1, c1, c2, b from a table and write the verification report
  verify     verify a supplied operator b against a table without rebuilding
  chain      per-level chain family, normalization, and stabilized operator

Exit codes: 0 success, 1 validation failure, 2 config error, 3 I/O error.
All output is deterministic JSON for fixed (config, seed).
"""

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .algebra import NestAlgebra
from .chain import chain_family, implements_on_projection, normalize_chain, stabilized_b
from .construct import (
    ConstructionChoices,
    artifacts_to_json,
    build_b,
    default_choices,
    verify,
)
from .derivation import DerivationTable, inner_from, norm_estimate, validate
from .linalg import matrix_from_json, matrix_to_json, op_norm, scalar_identity_part

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_IO = 3


class ConfigError(ValueError):
    pass


def _write_json(path: str, obj: dict):
    """Atomic write: temp file in the target directory, then rename."""
    payload = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_json(path: str) -> dict:
    with open(path) as handle:
        return json.load(handle)


def _parse_chain(args, n: int) -> tuple:
    if args.chain is None:
        return tuple(range(1, n + 1))
    try:
        chain = tuple(int(x) for x in args.chain.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad chain {args.chain!r}") from exc
    return chain


def _load_table(path: str) -> DerivationTable:
    try:
        return DerivationTable.from_json(_read_json(path))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad derivation table {path}: {exc}") from exc


def _choices_from_args(args, alg: NestAlgebra) -> ConstructionChoices:
    base = default_choices(alg, k=args.k)
    xi0, eta1 = base.xi0, base.eta1
    d = alg.chain[base.k - 1]
    if args.xi0_index is not None:
        if not d <= args.xi0_index < alg.n:
            raise ConfigError(f"--xi0-index must lie in p-perp ({d}..{alg.n - 1})")
        xi0 = np.zeros(alg.n, dtype=complex)
        xi0[args.xi0_index] = 1.0
    if args.eta1_index is not None:
        if not 0 <= args.eta1_index < d:
            raise ConfigError(f"--eta1-index must lie in p (0..{d - 1})")
        eta1 = np.zeros(alg.n, dtype=complex)
        eta1[args.eta1_index] = 1.0
    return ConstructionChoices(k=base.k, xi0=xi0, eta1=eta1)


def cmd_generate(args) -> int:
    try:
        alg = NestAlgebra(args.n, _parse_chain(args, args.n))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.zero:
        c = np.zeros((alg.n, alg.n), dtype=complex)
    else:
        rng = np.random.default_rng(args.seed)
        c = rng.standard_normal((alg.n, alg.n)) + 1j * rng.standard_normal((alg.n, alg.n))
    table = inner_from(alg, c)
    table.tol = args.tol
    report = validate(table)
    _write_json(args.out, table.to_json())
    generator_path = args.out + ".generator.json"
    _write_json(generator_path, matrix_to_json(c))
    print(f"wrote {args.out} (validation residual {report.max_residual:.3e})")
    print(f"wrote {generator_path}")
    return EXIT_OK


def cmd_construct(args) -> int:
    table = _load_table(args.input)
    if args.tol is not None:
        table.tol = args.tol
    report = validate(table)
    if not report.ok:
        print(
            f"table failed validation: max residual {report.max_residual:.3e} "
            f"over {len(report.failing_pairs)} pairs (tol {report.tol:.3e})",
            file=sys.stderr,
        )
        return EXIT_VALIDATION

    try:
        choices = _choices_from_args(args, table.alg)
        artifacts = build_b(table, choices)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    generator = None
    if args.generator:
        generator = matrix_from_json(_read_json(args.generator))
    verification = verify(table, artifacts, generator=generator, norm_seed=args.seed)
    out = verification.to_json()
    out["artifacts"] = artifacts_to_json(artifacts)
    _write_json(args.out, out)
    print(f"wrote {args.out}")

    ok = verification.thm11_ok and verification.thm12_ok
    if args.gate_thm13:
        ok = ok and verification.thm13_ok
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_verify(args) -> int:
    table = _load_table(args.input)
    if args.tol is not None:
        table.tol = args.tol
    report = validate(table)
    if not report.ok:
        print(f"table failed validation: max residual {report.max_residual:.3e}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        choices = _choices_from_args(args, table.alg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    b = matrix_from_json(_read_json(args.b))
    if b.shape != (table.alg.n, table.alg.n):
        raise ConfigError(f"operator b has shape {b.shape}, expected {(table.alg.n,) * 2}")

    from .construct import ConstructionArtifacts

    zero = np.zeros_like(b)
    # supplied b stands in for every stage; components are not re-derived
    artifacts = ConstructionArtifacts(b1=b, c1=zero, b2=b, c2=zero, b=b, choices=choices)
    generator = None
    if args.generator:
        generator = matrix_from_json(_read_json(args.generator))
    verification = verify(table, artifacts, generator=generator, norm_seed=args.seed)
    _write_json(args.out, verification.to_json())
    print(f"wrote {args.out}")
    ok = verification.thm11_ok and verification.thm12_ok
    if args.gate_thm13:
        ok = ok and verification.thm13_ok
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_chain(args) -> int:
    table = _load_table(args.input)
    if args.tol is not None:
        table.tol = args.tol
    report = validate(table)
    if not report.ok:
        print(f"table failed validation: max residual {report.max_residual:.3e}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        family = chain_family(table)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    normalized = normalize_chain(family)
    b_top = stabilized_b(normalized)
    top_k = max(m.k for m in normalized.members)
    out = normalized.to_json()
    out["stabilized"] = {
        "k": top_k,
        "b": matrix_to_json(b_top),
        "implements_residual": implements_on_projection(table, b_top, top_k),
        "norm": op_norm(b_top),
    }
    if len(normalized.members) == 1:
        out["note"] = "single interior projection: consistency pairs are vacuous"
    if args.generator:
        c = matrix_from_json(_read_json(args.generator))
        lam, residual = scalar_identity_part((b_top - c)[: table.alg.chain[top_k - 1], :][:, : table.alg.chain[top_k - 1]])
        out["stabilized"]["gauge_on_p"] = {"lambda": [lam.real, lam.imag], "residual": residual}
    _write_json(args.out, out)
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nestderiv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a seeded random inner derivation table")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--chain", help="comma-separated invariant dimensions, default 1..n")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--tol", type=float, default=1e-9)
    gen.add_argument("--zero", action="store_true", help="zero generator (zero derivation)")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    def common(p):
        p.add_argument("--input", required=True, help="derivation table JSON")
        p.add_argument("--k", type=int, default=None, help="interior chain index of p (1-based)")
        p.add_argument("--xi0-index", type=int, default=None, dest="xi0_index")
        p.add_argument("--eta1-index", type=int, default=None, dest="eta1_index")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--generator", help="generator matrix JSON, enables gauge and norm bounds")
        p.add_argument("--gate-thm13", action="store_true", dest="gate_thm13")
        p.add_argument("--out", required=True)

    con = sub.add_parser("construct", help="build b and write the verification report")
    common(con)
    con.set_defaults(func=cmd_construct)

    ver = sub.add_parser("verify", help="verify a provided operator b against a table")
    common(ver)
    ver.add_argument("--b", required=True, help="operator matrix JSON")
    ver.set_defaults(func=cmd_verify)

    cha = sub.add_parser("chain", help="chain family, normalization, stabilized operator")
    cha.add_argument("--input", required=True)
    cha.add_argument("--tol", type=float, default=None)
    cha.add_argument("--generator")
    cha.add_argument("--out", required=True)
    cha.set_defaults(func=cmd_chain)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
