"""centrep command line.

Exit codes: 0 pass, 1 check failure, 2 usage or format error, 3 hypothesis violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from .errors import ConstructionError, FormatError, GenerationError, HypothesisViolation
from .exterior import NotNilpotentError
from .instances import SPEC_VERSION, Instance, InstanceSpec, min_dim, random_instance, targeted_instance
from .lie import JacobiError, LieAlgebra, ce_complex, central_action, cohomology
from .linalg import rank
from .structure import canonical_decomposition, check_pair, lefschetz_maps, verify_decomposition
from .witness import CASE_TAGS, construct_witness

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_HYPOTHESIS = 0, 1, 2, 3

ORACLE_HELP = (
    "also assemble the Lie algebra L (dim_I + 2) and confirm through its "
    "Chevalley-Eilenberg cohomology that the certified class is nonzero; "
    "well under a second up to dim_I = 6, a few seconds at dim_I = 8, "
    "and growing like 4^dim beyond that"
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _max_dim() -> int:
    raw = os.environ.get("CENTREP_MAX_DIM", "16")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"CENTREP_MAX_DIM must be an integer, got {raw!r}") from None


def _check_dim(n: int):
    cap = _max_dim()
    if n > cap:
        raise UsageError(f"ambient dimension {n} exceeds CENTREP_MAX_DIM={cap}")


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_instance(path: str, need_eps: bool = True) -> tuple[Instance, str]:
    text = _read(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from None
    if not need_eps and isinstance(data, dict) and "epsilon" not in data and "dim" in data:
        data = dict(data, epsilon=["0"] * int(data["dim"]))
    inst = Instance.from_json(data)
    _check_dim(inst.dim)
    return inst, hashlib.sha256(text.encode()).hexdigest()


def _emit(args, report: dict, text_lines: list[str]):
    report = dict(report, spec_version=SPEC_VERSION)
    if getattr(args, "timing", False):
        report["timing_seconds"] = round(time.perf_counter() - args._t0, 6)
    else:
        report.pop("timing_seconds", None)
    payload = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if getattr(args, "report", None):
        Path(args.report).write_text(payload)
    if getattr(args, "json", False):
        sys.stdout.write(payload)
    else:
        for line in text_lines:
            print(line)


# commands


def cmd_generate(args) -> int:
    if args.dim_i < 2:
        raise UsageError("--dim-i must be at least 2")
    if args.bound < 1:
        raise UsageError("--bound must be at least 1")
    if args.case is not None and args.dim_i < min_dim(args.case):
        raise UsageError(f"--case {args.case} needs --dim-i >= {min_dim(args.case)}")
    _check_dim(args.dim_i)
    try:
        if args.case is None:
            inst = random_instance(InstanceSpec(args.dim_i, args.seed, None, args.bound))
        else:
            inst = targeted_instance(args.case, args.dim_i, seed=args.seed)
    except (GenerationError, ConstructionError) as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    body = inst.dumps()
    if args.out:
        Path(args.out).write_text(body)
        print(f"wrote {args.out} (dim_I={inst.dim}, sha256={inst.sha256[:12]})")
    else:
        sys.stdout.write(body)
    return EXIT_PASS


def _verify(args, oracle: bool) -> int:
    from .oracle import run_oracle

    inst, file_hash = _load_instance(args.input)
    if oracle:
        _check_dim(inst.dim + 2)
    cert = construct_witness(inst.theta, inst.eps, inst.omega)
    checks = cert.checks.as_dict()
    report = {
        "command": args.command,
        "inputs": {"file_sha256": file_hash, "instance_sha256": inst.sha256},
        "case_tag": cert.case_tag,
        "checks": checks,
        "certificate": cert.to_json(inst.sha256),
        "decomposition": {"p": cert.decomposition.p, "q": cert.decomposition.q, "rank": cert.decomposition.rank},
    }
    ok = cert.checks.all_passed and cert.discrepancy is None
    lines = [
        f"case: {cert.case_tag}  N={cert.N}  M={cert.M}",
        "checks: " + "  ".join(f"({k}) {'pass' if v else 'FAIL'}" for k, v in checks.items()),
    ]
    if cert.discrepancy:
        lines.append(f"discrepancy: {cert.discrepancy}")
    if oracle:
        orep = run_oracle(inst.theta, inst.eps, inst.omega, cert)
        report["oracle"] = orep.to_json()
        report["nontrivial"] = bool(orep.central_nontrivial) and not orep.iz_omega_exact
        ok = ok and orep.passed
        lines.append(
            f"oracle: {'pass' if orep.passed else 'FAIL'}  "
            f"i_z[omega] {'exact' if orep.iz_omega_exact else 'not exact'}  "
            f"witness class degree {orep.witness_degree}  "
            f"central action {'nontrivial' if orep.central_nontrivial else 'trivial'} (degree {orep.central_degree})"
        )
    report["outcome"] = "pass" if ok else "fail"
    lines.append(f"outcome: {report['outcome']}")
    _emit(args, report, lines)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    return _verify(args, args.oracle)


def cmd_oracle(args) -> int:
    return _verify(args, True)


def cmd_cohomology(args) -> int:
    text = _read(args.algebra)
    try:
        L = LieAlgebra.from_json(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, JacobiError):
            raise
        raise FormatError(f"{args.algebra}: {exc}") from None
    _check_dim(L.dim)
    cx = ce_complex(L)
    coh = cohomology(L, cx)
    action = central_action(L, cx)
    report = {
        "command": "cohomology",
        "inputs": {"file_sha256": hashlib.sha256(text.encode()).hexdigest()},
        "dim": L.dim,
        "betti": coh.betti,
        "nilpotent": action.nilpotent,
        "central_action": action.to_json(),
        "outcome": "pass",
    }
    lines = ["betti: " + " ".join(map(str, coh.betti))]
    if not action.nilpotent:
        lines.append("warning: algebra is not nilpotent")
    if action.nontrivial:
        lines.append(f"central action: nontrivial, witness degree {action.degree}")
    else:
        lines.append("central action: trivial action (exhaustive search over a center basis and all cocycle bases)")
    _emit(args, report, lines)
    return EXIT_PASS


def _structure_report(args, lefschetz: bool) -> int:
    inst, file_hash = _load_instance(args.input, need_eps=False)
    check_pair(inst.theta, inst.omega)
    D = canonical_decomposition(inst.theta, inst.omega)
    problems = verify_decomposition(D, inst.theta, inst.omega)
    report = {
        "command": args.command,
        "inputs": {"file_sha256": file_hash},
        "decomposition": D.to_json(),
        "labels": D.labels(),
        "problems": problems,
    }
    ok = not problems
    lines = [
        f"rank r={D.rank}  p={D.p} (UV blocks, l={[b.l for b in D.uv]})  q={D.q} (Z blocks, m={[b.m for b in D.zb]}, c={[str(b.c) for b in D.zb]})",
        "decomposition: " + ("verified" if not problems else "; ".join(problems)),
    ]
    if lefschetz:
        maps = []
        for k in range(D.rank + 1):
            m = lefschetz_maps(D, k)
            rk = rank(m)
            bij = m.rows == m.cols == rk
            maps.append({"k": k, "rows": m.rows, "cols": m.cols, "rank": rk, "bijective": bij})
            ok = ok and bij
            lines.append(f"mu^{k}: Lambda^{D.rank - k} -> Lambda^{D.rank + k}  {m.cols}x{m.rows} rank {rk}  {'bijective' if bij else 'NOT bijective'}")
        report["lefschetz"] = maps
    report["outcome"] = "pass" if ok else "fail"
    lines.append(f"outcome: {report['outcome']}")
    _emit(args, report, lines)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_canonical(args) -> int:
    return _structure_report(args, lefschetz=False)


def cmd_lefschetz(args) -> int:
    return _structure_report(args, lefschetz=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="centrep", description="Witnesses for nontrivial central actions on Lie algebra cohomology.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def outputs(p):
        p.add_argument("--report", metavar="FILE", help="write a JSON report to FILE")
        p.add_argument("--json", action="store_true", help="print the JSON report instead of text")
        p.add_argument("--timing", action="store_true", help="include wall-clock timing in the JSON report")

    g = sub.add_parser("generate", help="write a random or case-targeted instance")
    g.add_argument("--dim-i", type=int, required=True, help="dimension of the abelian ideal I (>= 2)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--case", choices=CASE_TAGS, help="produce an instance landing on this case")
    g.add_argument("--bound", type=int, default=3, help="bound on numerators and denominators of random rationals")
    g.add_argument("--out", metavar="FILE", help="output file (default: stdout)")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="construct and verify a witness certificate")
    v.add_argument("--input", required=True, metavar="FILE")
    v.add_argument("--oracle", action="store_true", help=ORACLE_HELP)
    outputs(v)
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="verify plus the cohomology oracle (same as verify --oracle)")
    o.add_argument("--input", required=True, metavar="FILE")
    outputs(o)
    o.set_defaults(func=cmd_oracle)

    c = sub.add_parser("cohomology", help="Betti numbers and the central action of a Lie algebra file")
    c.add_argument("--algebra", required=True, metavar="FILE")
    outputs(c)
    c.set_defaults(func=cmd_cohomology)

    for name, func, text in (
        ("canonical", cmd_canonical, "canonical decomposition of (theta, Omega)"),
        ("lefschetz", cmd_lefschetz, "canonical decomposition plus the Lefschetz maps"),
    ):
        s = sub.add_parser(name, help=text)
        s.add_argument("--input", required=True, metavar="FILE", help="instance file; epsilon may be omitted")
        outputs(s)
        s.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._t0 = time.perf_counter()
    try:
        return args.func(args)
    except (UsageError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypothesisViolation as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (NotNilpotentError, JacobiError) as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except ConstructionError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
