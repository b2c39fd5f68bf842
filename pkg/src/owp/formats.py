"""Line-oriented text formats: graphs, certificates, factors and gadgets.

All files are ASCII with LF line endings. The first line names the format.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .gadget import (
    Absorber,
    AbsorberConfig,
    FPartition,
    Rewiring,
    class_sizes,
)
from .graph_core import CycleFactor, FactorSpec, Graph, HostGraph
from .partitions import CyclicPartition, factor_counts, family_lookup


class FormatError(ValueError):
    pass


_CYCLE = re.compile(r"\(([^()]*)\)")


def _lines(text: str) -> list[str]:
    if "\r" in text:
        raise FormatError("CR line endings are not allowed")
    return [ln for ln in text.split("\n") if ln.strip() and not ln.startswith("#")]


def _expect(lines: list[str], k: int, key: str) -> str:
    if k >= len(lines) or not lines[k].startswith(key + "="):
        raise FormatError(f"line {k + 1}: expected {key}=...")
    return lines[k][len(key) + 1 :].strip()


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise FormatError(f"{what} is not an integer: {text!r}") from None


def format_cycles(cycles: Sequence[Sequence[int]]) -> str:
    return "".join("(" + " ".join(map(str, c)) + ")" for c in cycles)


def parse_cycles(text: str) -> list[tuple[int, ...]]:
    text = text.strip()
    found = _CYCLE.findall(text)
    if not found or _CYCLE.sub("", text).strip():
        raise FormatError(f"malformed cycle list: {text[:40]!r}")
    try:
        return [tuple(int(tok) for tok in body.split()) for body in found]
    except ValueError:
        raise FormatError(f"non-integer vertex in {text[:40]!r}") from None


# ---------------------------------------------------------------------------
# graphs


def write_graph(g: Graph) -> str:
    return "OWP/1 graph\n" + f"n={g.n}\n" + "".join(f"{u} {v}\n" for u, v in sorted(g.edges))


def read_graph(text: str) -> Graph:
    lines = _lines(text)
    if not lines or lines[0].strip() != "OWP/1 graph":
        raise FormatError("missing 'OWP/1 graph' header")
    n = _int(_expect(lines, 1, "n"), "n")
    edges = []
    for k, ln in enumerate(lines[2:], start=3):
        parts = ln.split()
        if len(parts) != 2:
            raise FormatError(f"line {k}: expected 'u v'")
        u, v = _int(parts[0], "vertex"), _int(parts[1], "vertex")
        if not 0 <= u < v < n:
            raise FormatError(f"line {k}: edge {u} {v} must satisfy 0 <= u < v < n")
        edges.append((u, v))
    return Graph.from_edges(n, edges)


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class Certificate:
    n: int
    host_ref: str  # complete | complete-minus-pm | file:<path>
    spec: FactorSpec
    factors: tuple[tuple[tuple[int, ...], ...], ...]

    def host(self, base: str | os.PathLike | None = None) -> HostGraph:
        if self.host_ref == "complete":
            return HostGraph.complete(self.n)
        if self.host_ref == "complete-minus-pm":
            return HostGraph.complete_minus_pm(self.n)
        if self.host_ref.startswith("file:"):
            path = Path(self.host_ref[5:])
            if base is not None and not path.is_absolute():
                path = Path(base) / path
            try:
                g = read_graph(path.read_text(encoding="ascii"))
            except OSError as exc:
                raise FormatError(f"cannot read host file {path}: {exc.strerror}") from None
            if g.n != self.n:
                raise FormatError(f"host file has n={g.n}, certificate has n={self.n}")
            return HostGraph.custom(g.n, g.edges)
        raise FormatError(f"unknown host {self.host_ref!r}")


def write_cert(cert: Certificate) -> str:
    out = ["OWP/1 cert", f"n={cert.n}", f"host={cert.host_ref}", f"spec={cert.spec}"]
    out.extend(format_cycles(f) for f in cert.factors)
    return "\n".join(out) + "\n"


def read_cert(text: str) -> Certificate:
    lines = _lines(text)
    if not lines or lines[0].strip() != "OWP/1 cert":
        raise FormatError("missing 'OWP/1 cert' header")
    n = _int(_expect(lines, 1, "n"), "n")
    host = _expect(lines, 2, "host")
    if host not in ("complete", "complete-minus-pm") and not host.startswith("file:"):
        raise FormatError(f"unknown host {host!r}")
    try:
        spec = FactorSpec.parse(_expect(lines, 3, "spec"))
    except ValueError as exc:
        raise FormatError(f"bad spec: {exc}") from None
    factors = tuple(tuple(parse_cycles(ln)) for ln in lines[4:])
    if len(factors) != spec.total:
        raise FormatError(f"spec asks for {spec.total} factors, file has {len(factors)}")
    return Certificate(n, host, spec, factors)


# ---------------------------------------------------------------------------
# factor files


@dataclass(frozen=True)
class FactorFile:
    factor: CycleFactor
    overrides: dict[int, CyclicPartition]


def write_factor(ff: FactorFile) -> str:
    out = ["OWP/1 factor", f"n={ff.factor.n}", "cycles=" + format_cycles(ff.factor.cycles)]
    out.extend(f"partition {ell}: {','.join(map(str, p.parts))}" for ell, p in sorted(ff.overrides.items()))
    return "\n".join(out) + "\n"


def read_factor(text: str) -> FactorFile:
    lines = _lines(text)
    if not lines or lines[0].strip() != "OWP/1 factor":
        raise FormatError("missing 'OWP/1 factor' header")
    n = _int(_expect(lines, 1, "n"), "n")
    cycles = parse_cycles(_expect(lines, 2, "cycles"))
    try:
        f = CycleFactor(n, cycles)
    except ValueError as exc:
        raise FormatError(f"bad factor: {exc}") from None
    overrides = {}
    for ln in lines[3:]:
        m = re.fullmatch(r"partition (\d+):\s*([\d,\s]+)", ln.strip())
        if not m:
            raise FormatError(f"unrecognised line {ln!r}")
        overrides[int(m.group(1))] = CyclicPartition.parse(m.group(2))
    return FactorFile(f, overrides)


# ---------------------------------------------------------------------------
# gadgets: graph file plus sidecar


GRAPH_NAME = "graph.owp"
SIDECAR_NAME = "gadget.owp"


def write_gadget_sidecar(ab: Absorber, ff: FactorFile) -> str:
    p = ab.partition
    out = [
        "OWP/1 gadget",
        f"n={p.n}",
        f"r={ab.config.r}",
        f"mode={ab.config.mode}",
        f"seed={ab.config.seed}",
        "factor=" + format_cycles(ff.factor.cycles),
    ]
    out.extend(f"partition {ell}: {','.join(map(str, q.parts))}" for ell, q in sorted(ff.overrides.items()))
    out.extend(f"class {lab}: " + " ".join(map(str, vs)) for lab, vs in p.classes.items())
    out.append("pi: " + format_cycles(ab.rewiring.blocks))
    return "\n".join(out) + "\n"


def save_gadget(directory: str | os.PathLike, ab: Absorber, ff: FactorFile) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / GRAPH_NAME).write_text(write_graph(ab.graph), encoding="ascii", newline="\n")
    (d / SIDECAR_NAME).write_text(write_gadget_sidecar(ab, ff), encoding="ascii", newline="\n")


def read_gadget_sidecar(text: str, graph: Graph) -> tuple[Absorber, FactorFile]:
    lines = _lines(text)
    if not lines or lines[0].strip() != "OWP/1 gadget":
        raise FormatError("missing 'OWP/1 gadget' header")
    n = _int(_expect(lines, 1, "n"), "n")
    r = _int(_expect(lines, 2, "r"), "r")
    mode = _expect(lines, 3, "mode")
    seed = _int(_expect(lines, 4, "seed"), "seed")
    f = CycleFactor(n, parse_cycles(_expect(lines, 5, "factor")))
    overrides, classes, blocks = {}, {}, None
    for ln in lines[6:]:
        if ln.startswith("partition "):
            m = re.fullmatch(r"partition (\d+):\s*([\d,\s]+)", ln.strip())
            if not m:
                raise FormatError(f"bad partition line {ln!r}")
            overrides[int(m.group(1))] = CyclicPartition.parse(m.group(2))
        elif ln.startswith("class "):
            lab, _, rest = ln[6:].partition(":")
            classes[lab.strip()] = tuple(int(tok) for tok in rest.split())
        elif ln.startswith("pi:"):
            blocks = tuple(parse_cycles(ln[3:])) if ln[3:].strip() else ()
        else:
            raise FormatError(f"unrecognised line {ln!r}")
    if blocks is None:
        raise FormatError("missing pi line")
    lookup = family_lookup(overrides or None)
    counts = factor_counts(f, lookup)
    sizes = class_sizes(counts)
    if set(classes) != set(sizes) or any(len(classes[k]) != sizes[k] for k in sizes):
        raise FormatError("class sizes do not match the factor")
    p = FPartition(n, classes, counts, lookup)
    pi = {b[i]: b[(i + 1) % len(b)] for b in blocks for i in range(len(b))}
    if set(pi) != set(p.Y):
        raise FormatError("pi does not permute Y")
    rw = Rewiring(p, pi, blocks)
    if graph.n != n:
        raise FormatError(f"graph has n={graph.n}, gadget has n={n}")
    ab = Absorber(graph, rw, AbsorberConfig(r, mode, seed), {})
    return ab, FactorFile(f, overrides)


def load_gadget(directory: str | os.PathLike) -> tuple[Absorber, FactorFile]:
    d = Path(directory)
    try:
        g = read_graph((d / GRAPH_NAME).read_text(encoding="ascii"))
        side = (d / SIDECAR_NAME).read_text(encoding="ascii")
    except OSError as exc:
        raise FormatError(f"cannot read gadget in {d}: {exc.strerror}") from None
    return read_gadget_sidecar(side, g)
