"""Reliability block diagrams as s-t graphs, and their survival signatures.

A system is an undirected graph with a source ``s``, a sink ``t`` and
numbered component nodes, each carrying a type label. The system works when
``s`` and ``t`` are joined by a path whose interior nodes are all working
components.

The survival signature is computed exactly by enumerating every state vector
and tallying working states per cell of per-type functioning counts.
"""

from __future__ import annotations

import csv
import io
import math
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Union

import numpy as np

from .errors import InputError

SOURCE = "s"
SINK = "t"
DEFAULT_MAX_COMPONENTS = 24

# Enumeration works on blocks of this many state vectors at a time.
_CHUNK_BITS = 18

NodeId = Union[int, str]


@dataclass(frozen=True)
class Node:
    id: NodeId
    kind: str  # "source", "sink" or "component"
    type_label: str | None = None


@dataclass(frozen=True)
class SystemGraph:
    """Typed s-t graph.

    ``component_types`` maps each component id (a positive integer) to its
    type label; ``edges`` holds unordered pairs stored with the smaller node
    first (terminals sort before components).
    """

    component_types: Mapping[int, str]
    edges: tuple[tuple[NodeId, NodeId], ...]
    _adjacency: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        comp = dict(sorted(self.component_types.items()))
        if not comp:
            raise InputError("system has no components")
        for cid, label in comp.items():
            if not isinstance(cid, int) or isinstance(cid, bool) or cid <= 0:
                raise InputError(f"component id {cid!r} is not a positive integer")
            if not label:
                raise InputError(f"component {cid} has an empty type label")

        seen: set[tuple[NodeId, NodeId]] = set()
        norm = []
        for a, b in self.edges:
            for v in (a, b):
                if v not in (SOURCE, SINK) and v not in comp:
                    raise InputError(f"edge endpoint {v!r} is not a declared node")
            if a == b:
                raise InputError(f"self-loop on node {a!r}")
            if {a, b} == {SOURCE, SINK}:
                raise InputError("direct s-t edge: system would work with no components")
            e = tuple(sorted((a, b), key=_node_key))
            if e in seen:
                raise InputError(f"duplicate edge {e[0]}-{e[1]}")
            seen.add(e)
            norm.append(e)
        touched = {v for e in norm for v in e}
        if SOURCE not in touched:
            raise InputError("no source: node 's' has no edges")
        if SINK not in touched:
            raise InputError("no sink: node 't' has no edges")

        adj: dict[NodeId, set[NodeId]] = {SOURCE: set(), SINK: set()}
        adj.update({c: set() for c in comp})
        for a, b in norm:
            adj[a].add(b)
            adj[b].add(a)

        object.__setattr__(self, "component_types", comp)
        object.__setattr__(self, "edges", tuple(sorted(norm, key=lambda e: tuple(map(_node_key, e)))))
        object.__setattr__(self, "_adjacency", {k: frozenset(v) for k, v in adj.items()})

    @property
    def components(self) -> tuple[int, ...]:
        return tuple(self.component_types)

    @property
    def nodes(self) -> tuple[Node, ...]:
        return (
            Node(SOURCE, "source"),
            Node(SINK, "sink"),
            *(Node(c, "component", lab) for c, lab in self.component_types.items()),
        )

    @property
    def type_labels(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.component_types.values())))

    def components_of_type(self, label: str) -> tuple[int, ...]:
        return tuple(c for c, lab in self.component_types.items() if lab == label)

    @property
    def type_counts(self) -> tuple[int, ...]:
        return tuple(len(self.components_of_type(lab)) for lab in self.type_labels)

    def neighbours(self, node: NodeId) -> frozenset:
        return self._adjacency[node]


def _node_key(v: NodeId) -> tuple[int, int]:
    if v == SOURCE:
        return (0, 0)
    if v == SINK:
        return (1, 0)
    return (2, int(v))


_EDGE_RE = re.compile(r"^edge:\s*(\S+)\s+(\S+)\s*$")
_TYPE_RE = re.compile(r"^type:\s*([^=\s]+)\s*=\s*(.+?)\s*$")


def _parse_id(token: str, source: str, lineno: int) -> NodeId:
    if token in (SOURCE, SINK):
        return token
    if token.isdigit() and int(token) > 0:
        return int(token)
    raise InputError(f"bad node id {token!r} (expected 's', 't' or a positive integer)", source, lineno)


def parse_system(text: str, source: str = "<system>") -> SystemGraph:
    """Parse the edge-list system definition format.

    Lines are ``edge: <id> <id>`` or ``type: <label> = <id>[,<id>...]``;
    ``#`` starts a comment and blank lines are ignored.
    """
    edges: list[tuple[NodeId, NodeId]] = []
    edge_lines: list[int] = []
    types: dict[int, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _EDGE_RE.match(line):
            edges.append((_parse_id(m.group(1), source, lineno), _parse_id(m.group(2), source, lineno)))
            edge_lines.append(lineno)
        elif m := _TYPE_RE.match(line):
            label = m.group(1)
            for tok in m.group(2).split(","):
                cid = _parse_id(tok.strip(), source, lineno)
                if not isinstance(cid, int):
                    raise InputError(f"terminal {cid!r} cannot be given a type", source, lineno)
                if cid in types:
                    raise InputError(f"duplicate component id {cid} (already type {types[cid]!r})", source, lineno)
                types[cid] = label
        else:
            raise InputError(f"unrecognised line {raw.strip()!r}", source, lineno)

    # Attribute edge-level problems to their line before whole-graph checks.
    seen: set = set()
    for (a, b), lineno in zip(edges, edge_lines):
        for v in (a, b):
            if isinstance(v, int) and v not in types:
                raise InputError(f"dangling edge endpoint {v}: not listed in any type line", source, lineno)
        key = frozenset((a, b))
        if key in seen:
            raise InputError(f"duplicate edge {a}-{b}", source, lineno)
        seen.add(key)
    try:
        return SystemGraph(types, tuple(edges))
    except InputError as exc:
        raise InputError(exc.message, source) from None


def format_system(graph: SystemGraph) -> str:
    """Inverse of :func:`parse_system` (canonical ordering)."""
    lines = [f"edge: {a} {b}" for a, b in graph.edges]
    for lab in graph.type_labels:
        lines.append(f"type: {lab} = " + ",".join(map(str, graph.components_of_type(lab))))
    return "\n".join(lines) + "\n"


def structure_function(graph: SystemGraph, state: Mapping[int, int]) -> int:
    """1 if s reaches t through working components, else 0."""
    missing = [c for c in graph.components if c not in state]
    if missing:
        raise InputError(f"state vector missing components {missing}")
    seen = {SOURCE}
    queue = deque([SOURCE])
    while queue:
        v = queue.popleft()
        for w in graph.neighbours(v):
            if w == SINK:
                return 1
            if w in seen or w == SOURCE or not state[w]:
                continue
            seen.add(w)
            queue.append(w)
    return 0


@dataclass(frozen=True)
class SurvivalSignature:
    """Survival signature table indexed by per-type functioning counts.

    ``table[l_1, ..., l_K]`` holds an exact :class:`~fractions.Fraction`;
    :attr:`values` is the float view.
    """

    type_labels: tuple[str, ...]
    counts: tuple[int, ...]
    table: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "type_labels", tuple(self.type_labels))
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if len(self.type_labels) != len(self.counts):
            raise InputError("number of type labels and counts differ")
        want = tuple(c + 1 for c in self.counts)
        if np.shape(self.table) != want:
            raise InputError(f"signature table has shape {np.shape(self.table)}, expected {want}")

    @property
    def values(self) -> np.ndarray:
        return np.vectorize(float, otypes=[float])(self.table)

    def __getitem__(self, cell) -> Fraction:
        return self.table[tuple(cell)]

    def cells(self) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        for idx in np.ndindex(*self.table.shape):
            yield idx, self.table[idx]


def _state_chunk_reliability(lo: int, hi: int, adj: list[int], src: int, snk: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.arange(lo, hi, dtype=np.uint64)
    reach = x & np.uint64(src)
    while True:
        prev = reach
        for i in range(m):
            has = (reach >> np.uint64(i)) & np.uint64(1)
            reach = reach | ((has * np.uint64(adj[i])) & x)
        if np.array_equal(prev, reach):
            break
    return x, (reach & np.uint64(snk)) != 0


def compute_survival_signature(graph: SystemGraph, max_components: int = DEFAULT_MAX_COMPONENTS) -> SurvivalSignature:
    """Exact survival signature by enumerating all 2^m state vectors."""
    comps = graph.components
    m = len(comps)
    if m > max_components:
        raise InputError(
            f"system has {m} components; exhaustive enumeration is capped at {max_components}"
        )
    bit = {c: i for i, c in enumerate(comps)}
    adj = [sum(1 << bit[w] for w in graph.neighbours(c) if isinstance(w, int)) for c in comps]
    src = sum(1 << bit[w] for w in graph.neighbours(SOURCE) if isinstance(w, int))
    snk = sum(1 << bit[w] for w in graph.neighbours(SINK) if isinstance(w, int))

    labels = graph.type_labels
    counts = graph.type_counts
    type_masks = [sum(1 << bit[c] for c in graph.components_of_type(lab)) for lab in labels]
    shape = tuple(c + 1 for c in counts)
    strides = [int(np.prod(shape[k + 1:], dtype=np.int64)) for k in range(len(shape))]
    ncells = int(np.prod(shape))

    working = np.zeros(ncells, dtype=np.int64)
    total = 1 << m
    step = 1 << _CHUNK_BITS
    for lo in range(0, total, step):
        x, ok = _state_chunk_reliability(lo, min(total, lo + step), adj, src, snk, m)
        cell = np.zeros(x.shape, dtype=np.int64)
        for mask, stride in zip(type_masks, strides):
            cell += np.bitwise_count(x & np.uint64(mask)).astype(np.int64) * stride
        working += np.bincount(cell[ok], minlength=ncells)

    table = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        denom = math.prod(math.comb(mk, lk) for mk, lk in zip(counts, idx))
        table[idx] = Fraction(int(working[np.ravel_multi_index(idx, shape)]), denom)
    return SurvivalSignature(labels, counts, table)


def validate_signature(sig: SurvivalSignature) -> list[str]:
    """Coherence violations of a signature table; an empty list means valid."""
    want = tuple(c + 1 for c in sig.counts)
    if sig.table.shape != want:
        raise InputError(f"signature table has shape {sig.table.shape}, expected {want}")
    problems: list[str] = []
    zero = (0,) * len(sig.counts)
    full = tuple(sig.counts)
    for idx, v in sig.cells():
        if not 0 <= v <= 1:
            problems.append(f"Phi{idx} = {v} outside [0, 1]")
    if sig.table[zero] != 0:
        problems.append(f"Phi at no functioning components = {sig.table[zero]} != 0")
    if sig.table[full] != 1:
        problems.append(f"Phi at full functioning = {sig.table[full]} != 1")
    for idx, v in sig.cells():
        for k in range(len(idx)):
            if idx[k] < full[k]:
                nxt = idx[:k] + (idx[k] + 1,) + idx[k + 1:]
                if sig.table[nxt] < v:
                    problems.append(
                        f"monotonicity violated in coordinate {k + 1} ({sig.type_labels[k]}): "
                        f"Phi{idx} = {v} > Phi{nxt} = {sig.table[nxt]}"
                    )
    return problems


def signature_to_csv(sig: SurvivalSignature) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*sig.type_labels, "phi_num", "phi_den", "phi"])
    for idx, v in sig.cells():
        w.writerow([*idx, v.numerator, v.denominator, f"{float(v):.15g}"])
    return buf.getvalue()


def signature_from_csv(text: str, source: str = "<signature>") -> SurvivalSignature:
    """Read a signature table written by :func:`signature_to_csv`.

    The ``phi_num``/``phi_den`` columns are preferred; a table carrying only
    ``phi`` is read as exact decimals.
    """
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise InputError("empty signature file", source)
    header = [h.strip() for h in rows[0]]
    value_cols = [h for h in header if h in ("phi_num", "phi_den", "phi")]
    labels = header[: len(header) - len(value_cols)]
    if not labels or "phi" not in value_cols and not {"phi_num", "phi_den"} <= set(value_cols):
        raise InputError("signature header must be <types...>,phi_num,phi_den,phi", source, 1)
    col = {h: i for i, h in enumerate(header)}
    entries: dict[tuple[int, ...], Fraction] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise InputError(f"expected {len(header)} fields, got {len(row)}", source, lineno)
        try:
            idx = tuple(int(row[i]) for i in range(len(labels)))
            if "phi_num" in col and "phi_den" in col:
                val = Fraction(int(row[col["phi_num"]]), int(row[col["phi_den"]]))
            else:
                val = Fraction(row[col["phi"]].strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad signature row: {exc}", source, lineno) from None
        if idx in entries:
            raise InputError(f"duplicate cell {idx}", source, lineno)
        entries[idx] = val
    if not entries:
        raise InputError("signature file has no rows", source)
    counts = tuple(max(idx[k] for idx in entries) for k in range(len(labels)))
    shape = tuple(c + 1 for c in counts)
    if len(entries) != math.prod(shape) or any(min(idx) < 0 for idx in entries):
        raise InputError(f"signature rows do not cover the full {shape} grid", source)
    table = np.empty(shape, dtype=object)
    for idx, v in entries.items():
        table[idx] = v
    order = sorted(range(len(labels)), key=lambda k: labels[k])
    if order != list(range(len(labels))):
        table = np.transpose(table, order)
        labels = [labels[k] for k in order]
        counts = tuple(counts[k] for k in order)
    return SurvivalSignature(tuple(labels), counts, table)
