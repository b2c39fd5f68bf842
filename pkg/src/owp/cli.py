"""Command-line interface: ``owp solve | verify | check | partition | gadget``.

Exit codes are the machine contract: 0 success/Found, 1 Exhausted or
invalid, 2 Timeout, 64 usage or infeasible input, 65 unreadable input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .formats import (
    Certificate,
    FactorFile,
    FormatError,
    load_gadget,
    read_cert,
    read_factor,
    read_graph,
    save_gadget,
    write_cert,
    write_graph,
)
from .graph_core import CycleType, FactorSpec, HostGraph, verify_decomposition

EX_OK, EX_FAIL, EX_TIMEOUT, EX_USAGE, EX_DATAERR = 0, 1, 2, 64, 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunLedger:
    """Key=value run record, written whatever way the command ends."""

    command: str
    seed: int = 0
    verdict: str = "Error"
    stats: dict = field(default_factory=dict)
    started: float = field(default_factory=time.monotonic)

    def render(self, code: int) -> str:
        lines = [f"command={self.command}", f"seed={self.seed}", f"verdict={self.verdict}", f"exit={code}"]
        lines += [f"{k}={v}" for k, v in self.stats.items()]
        lines.append(f"wall_time={time.monotonic() - self.started:.3f}")
        return "\n".join(lines) + "\n"

    def emit(self, code: int, path: str | None) -> None:
        text = self.render(code)
        if path:
            Path(path).write_text(text, encoding="ascii", newline="\n")
        else:
            sys.stderr.write(text)


def _ledger_path(args) -> str | None:
    if getattr(args, "ledger", None):
        return args.ledger
    if getattr(args, "out", None):
        return str(args.out) + ".ledger"
    return None


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="ascii", newline="\n")


def _search_config(args):
    from .solver import SearchConfig

    return SearchConfig(
        timeout=args.timeout,
        threads=args.threads,
        seed=args.seed,
        symmetry_breaking=not args.no_symmetry_breaking,
        first_factor_canonical=not args.no_first_factor,
    )


# ---------------------------------------------------------------------------
# commands


def _solve_spec(args, host: HostGraph) -> FactorSpec:
    if args.spec:
        try:
            text = Path(args.spec).read_text(encoding="ascii").strip()
        except OSError as exc:
            raise UsageError(f"cannot read spec file: {exc.strerror}") from None
        return FactorSpec.parse(text.removeprefix("spec="))
    if not args.cycles:
        raise UsageError("give --cycles or --spec")
    ctype = CycleType.parse(args.cycles)
    m = args.multiplicity
    if m is None:
        if ctype.order != host.n or host.n == 0:
            raise UsageError(f"cycle lengths sum to {ctype.order}, host has {host.n} vertices")
        m = len(host.edges) // host.n
    return FactorSpec.single(ctype, m)


def cmd_solve(args, ledger: RunLedger) -> int:
    from .solver import InfeasibleSpecError, Verdict, check_feasible, solve_factorization

    if args.host_file:
        try:
            g = read_graph(Path(args.host_file).read_text(encoding="ascii"))
        except (OSError, FormatError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EX_DATAERR
        host, host_ref = HostGraph.custom(g.n, g.edges), "file:" + os.path.relpath(
            args.host_file, Path(args.out).parent if args.out else "."
        )
    else:
        if args.n is None:
            raise UsageError("give --n or --host-file")
        if args.minus_pm:
            if args.n % 2:
                raise UsageError("--minus-pm needs an even order")
            host, host_ref = HostGraph.complete_minus_pm(args.n), "complete-minus-pm"
        else:
            host, host_ref = HostGraph.complete(args.n), "complete"
    try:
        spec = _solve_spec(args, host)
        check_feasible(host, spec)
    except (InfeasibleSpecError, ValueError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        ledger.verdict = "Infeasible"
        return EX_USAGE
    out = solve_factorization(host, spec, _search_config(args))
    ledger.verdict = str(out.verdict)
    ledger.stats.update(nodes=out.nodes, search_time=f"{out.wall_time:.3f}", n=host.n, spec=spec)
    print(f"{out.verdict}: {spec} on {host_ref} (n={host.n}), {out.nodes} nodes, {out.wall_time:.2f}s")
    if out.verdict is Verdict.FOUND:
        cert = Certificate(host.n, host_ref, spec, tuple(tuple(f.cycles) for f in out.certificate))
        text = write_cert(cert)
        if args.out:
            _write_text(args.out, text)
        else:
            sys.stdout.write(text)
        return EX_OK
    return EX_FAIL if out.verdict is Verdict.EXHAUSTED else EX_TIMEOUT


def cmd_verify(args, ledger: RunLedger) -> int:
    path = Path(args.path)
    try:
        cert = read_cert(path.read_text(encoding="ascii"))
        host = cert.host(path.parent)
    except (OSError, UnicodeDecodeError) as exc:
        print(f"unreadable: {getattr(exc, 'strerror', None) or exc}", file=sys.stderr)
        return EX_DATAERR
    except FormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EX_DATAERR
    report = verify_decomposition(host, [list(f) for f in cert.factors], cert.spec)
    ledger.verdict = "Valid" if report else "Invalid"
    if report:
        print(f"valid: {len(cert.factors)} factors of {cert.spec} decompose {cert.host_ref} (n={cert.n})")
        return EX_OK
    print(f"invalid: {report.reason} {report.witness}")
    return EX_FAIL


def cmd_check(args, ledger: RunLedger) -> int:
    from .checks import SUITES

    fn = SUITES[args.lemma]
    kwargs = {"seed": args.seed}
    if args.n is not None:
        kwargs["n"] = args.n
    if args.instances is not None:
        kwargs["instances"] = args.instances
    res = fn(**kwargs)
    for msg in res.failures:
        print(f"FAIL {res.name}: {msg}")
    status = "PASS" if res.ok else "FAIL"
    print(f"{status} {res.name}: {res.checked} checks, {len(res.failures)} failures")
    ledger.verdict = status
    ledger.stats.update(lemma=res.name, checks=res.checked, failures=len(res.failures))
    return EX_OK if res.ok else EX_FAIL


def cmd_partition(args, ledger: RunLedger) -> int:
    from .partitions import admissible_partition, is_admissible, pair_counts, partition_counts, rich_six_counts

    if args.length < 3:
        raise UsageError("length must be at least 3")
    p = admissible_partition(args.length)
    counts = partition_counts(p)
    ledger.verdict = "OK"
    if args.json:
        doc = {
            "length": args.length,
            "parts": list(p.parts),
            "admissible": is_admissible(p),
            **counts.as_dict(),
            "rich_six": {f"{a},{b}": c for (a, b), c in rich_six_counts(p).items()},
        }
        print(json.dumps(doc, sort_keys=True))
    else:
        print(f"partition: {p}")
        print(f"admissible: {is_admissible(p)}")
        print("singles: " + " ".join(f"{a}:{c}" for a, c in counts.singles.items()))
        print("pairs: " + " ".join(f"({a},{b}):{c}" for (a, b), c in pair_counts(p).items()))
    return EX_OK


def cmd_gadget_build(args, ledger: RunLedger) -> int:
    from .gadget import AbsorberConfig, build_absorber, build_f_partition

    try:
        ff = read_factor(Path(args.factor).read_text(encoding="ascii"))
    except (OSError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_DATAERR
    try:
        p = build_f_partition(ff.factor, family=ff.overrides or None)
        ab = build_absorber(ff.factor, p, AbsorberConfig(args.r, args.mode, args.seed))
    except ValueError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        ledger.verdict = "Infeasible"
        return EX_USAGE
    save_gadget(args.out, ab, ff)
    ledger.verdict = "Built"
    ledger.stats.update(n=p.n, r=args.r, mode=args.mode, edges=len(ab.graph.edges))
    print(f"built {args.mode} absorber: n={p.n}, r={args.r}, {len(ab.graph.edges)} edges -> {args.out}")
    return EX_OK


def cmd_gadget_absorb(args, ledger: RunLedger) -> int:
    from .gadget import absorb_balanced_leftover
    from .solver import Verdict

    try:
        ab, ff = load_gadget(args.gadget)
        leftover = read_graph(Path(args.leftover).read_text(encoding="ascii"))
    except (OSError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_DATAERR
    try:
        out = absorb_balanced_leftover(ab, leftover, ff.factor, _search_config(args))
    except ValueError as exc:
        print(f"rejected leftover: {exc}", file=sys.stderr)
        ledger.verdict = "Rejected"
        return EX_DATAERR
    ledger.verdict = str(out.verdict)
    ledger.stats.update(nodes=out.nodes, search_time=f"{out.wall_time:.3f}")
    if out.verdict is not Verdict.FOUND:
        print(f"{out.verdict}: no decomposition of G - L found")
        return EX_FAIL if out.verdict is Verdict.EXHAUSTED else EX_TIMEOUT
    rest = ab.graph.minus(leftover)
    print(f"Found: {len(out.certificate)} copies of F decompose G - L")
    spec = FactorSpec.single(ff.factor.cycle_type(), len(out.certificate))
    if args.out:
        host_path = Path(str(args.out) + ".host.owp")
        _write_text(str(host_path), write_graph(rest))
        cert = Certificate(rest.n, "file:" + host_path.name, spec, tuple(tuple(f.cycles) for f in out.certificate))
        _write_text(args.out, write_cert(cert))
    return EX_OK


# ---------------------------------------------------------------------------
# parser


def _add_search_args(p: argparse.ArgumentParser) -> None:
    from .solver.search import default_threads

    p.add_argument("--timeout", type=float, default=600.0, help="seconds before giving up (default 600)")
    p.add_argument("--threads", type=int, default=default_threads(), help="worker threads (default $OWP_THREADS or 1)")
    p.add_argument("--no-symmetry-breaking", action="store_true", help="disable pool ordering and cycle canonical forms")
    p.add_argument("--no-first-factor", action="store_true", help="do not fix the first factor on complete hosts")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="owp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"owp {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("solve", help="search for a decomposition into cycle factors")
    p.add_argument("--n", type=int)
    p.add_argument("--minus-pm", action="store_true", help="host is K_n minus a perfect matching")
    p.add_argument("--host-file", help="custom host in the OWP/1 graph format")
    p.add_argument("--cycles", help="cycle lengths of one factor, e.g. 4,5")
    p.add_argument("--multiplicity", type=int, help="number of factors (default: all edges)")
    p.add_argument("--spec", help="file holding a spec such as 3,4x2;7x1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="certificate path (default stdout)")
    p.add_argument("--ledger", help="run ledger path (default <out>.ledger or stderr)")
    _add_search_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a certificate")
    p.add_argument("path")
    p.add_argument("--ledger")
    p.set_defaults(func=cmd_verify, seed=0)

    from .checks import SUITES

    p = sub.add_parser("check", help="run the property suite of a lemma")
    p.add_argument("lemma", choices=sorted(SUITES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int)
    p.add_argument("--instances", type=int)
    p.add_argument("--ledger")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("partition", help="show the admissible partition of a cycle length")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--ledger")
    p.set_defaults(func=cmd_partition, seed=0)

    g = sub.add_parser("gadget", help="build absorbers and absorb leftovers")
    gsub = g.add_subparsers(dest="gadget_command", parser_class=_Parser)
    p = gsub.add_parser("build")
    p.add_argument("--factor", required=True, help="OWP/1 factor file")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--mode", choices=["matching-activation", "planted-resolvable"], default="planted-resolvable")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--ledger")
    p.set_defaults(func=cmd_gadget_build)
    p = gsub.add_parser("absorb")
    p.add_argument("--gadget", required=True, help="directory written by 'gadget build'")
    p.add_argument("--leftover", required=True, help="OWP/1 graph file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="certificate path for the decomposition of G - L")
    p.add_argument("--ledger")
    _add_search_args(p)
    p.set_defaults(func=cmd_gadget_absorb)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        RunLedger(" ".join(argv if argv is not None else sys.argv[1:2]), verdict="UsageError").emit(EX_USAGE, None)
        return EX_USAGE
    if not getattr(args, "func", None):
        ap.print_usage(sys.stderr)
        return EX_USAGE
    name = args.command + (f" {args.gadget_command}" if args.command == "gadget" else "")
    ledger = RunLedger(name, getattr(args, "seed", 0))
    code = EX_USAGE
    try:
        code = args.func(args, ledger)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        ledger.verdict = "UsageError"
        code = EX_USAGE
    finally:
        ledger.emit(code, _ledger_path(args))
    return code


if __name__ == "__main__":
    sys.exit(main())
