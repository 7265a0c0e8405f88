"""Text formats for instances and solutions, and a random instance generator.

Instance format (one record per line, ``#`` starts a comment)::

    nllmp-instance 1
    nodes <n>
    labels <L>
    base_edges <|E|>
    lifted_arcs <|A|>
    edge <v> <w>                               |E| lines
    arc <v> <w> join <L*L costs> cut <L*L costs>   |A| lines
    node <v> <L costs>                         n lines

Cost matrices are row-major with the row indexed by the label of ``v`` (the
tail).  ``lifted_arcs`` counts every arc of the cost graph, base edges
included.  See ``docs/formats.md`` for the grammar.
"""
from __future__ import annotations

import dataclasses
import json

import numpy as np

from .model import InstanceError, ProblemInstance, Solution
from .reductions import LmpSpec, PoseSpec, TrackingSpec, UiqpSpec

INSTANCE_MAGIC = "nllmp-instance"
SOLUTION_MAGIC = "nllmp-solution"
VERSION = "1"


class ParseError(ValueError):
    """A document could not be parsed; carries the 1-based line number."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


def format_number(x):
    x = float(x)
    if x.is_integer() and not (x == 0 and np.signbit(x)):
        return str(int(x))
    return repr(x)


def _lines(text):
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line.split()


def _int(tok, line, what):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected integer {what}, got {tok!r}", line) from None


def _float(tok, line):
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"expected number, got {tok!r}", line) from None


def _header(records, magic):
    try:
        line, toks = next(records)
    except StopIteration:
        raise ParseError("empty document", 1) from None
    if toks != [magic, VERSION]:
        raise ParseError(f"expected header '{magic} {VERSION}'", line, 1)
    return line


def _expect(records, key, last_line):
    try:
        line, toks = next(records)
    except StopIteration:
        raise ParseError(f"missing '{key}' line", last_line + 1) from None
    if len(toks) != 2 or toks[0] != key:
        raise ParseError(f"expected '{key} <count>'", line, 1)
    value = _int(toks[1], line, key)
    if value < 0:
        raise ParseError(f"{key} must be nonnegative", line)
    return line, value


def parse_instance(text):
    """Parse an instance document; raises ParseError with the offending line."""
    records = _lines(text)
    line = _header(records, INSTANCE_MAGIC)
    line, n = _expect(records, "nodes", line)
    line, L = _expect(records, "labels", line)
    if n < 1 or L < 1:
        raise ParseError("nodes and labels must be positive", line)
    line, num_edges = _expect(records, "base_edges", line)
    line, num_arcs = _expect(records, "lifted_arcs", line)

    edges, edge_lines = [], {}
    arcs, arc_lines, join, cut = [], {}, [], []
    node_costs = [None] * n
    for line, toks in records:
        kind = toks[0]
        if kind == "edge":
            if len(toks) != 3:
                raise ParseError("expected 'edge <v> <w>'", line)
            v, w = (_int(t, line, "node") for t in toks[1:])
            _check_pair(v, w, n, line)
            key = (min(v, w), max(v, w))
            if key in edge_lines:
                raise ParseError(f"duplicate base edge {key} (first on line {edge_lines[key]})",
                                 line)
            edge_lines[key] = line
            edges.append(key)
        elif kind == "arc":
            if len(toks) != 5 + 2 * L * L or toks[3] != "join" or toks[4 + L * L] != "cut":
                raise ParseError(f"expected 'arc <v> <w> join <{L * L} costs> cut "
                                 f"<{L * L} costs>'", line)
            v, w = (_int(t, line, "node") for t in toks[1:3])
            _check_pair(v, w, n, line)
            key = (min(v, w), max(v, w))
            if key in arc_lines:
                prev, first = arc_lines[key]
                if prev == (v, w):
                    raise ParseError(f"duplicate arc ({v}, {w}) (first on line {first})", line)
                raise ParseError(f"orientation conflict: ({v}, {w}) and {prev} "
                                 f"(line {first}) both present", line)
            arc_lines[key] = ((v, w), line)
            arcs.append((v, w))
            join.append([_float(t, line) for t in toks[4:4 + L * L]])
            cut.append([_float(t, line) for t in toks[5 + L * L:]])
        elif kind == "node":
            if len(toks) != 2 + L:
                raise ParseError(f"expected 'node <v> <{L} costs>'", line)
            v = _int(toks[1], line, "node")
            if not 0 <= v < n:
                raise ParseError(f"node {v} out of range", line)
            if node_costs[v] is not None:
                raise ParseError(f"duplicate node {v}", line)
            node_costs[v] = [_float(t, line) for t in toks[2:]]
        else:
            raise ParseError(f"unknown record {kind!r}", line, 1)

    if len(edges) != num_edges:
        raise ParseError(f"header announces {num_edges} base edges, found {len(edges)}", line)
    if len(arcs) != num_arcs:
        raise ParseError(f"header announces {num_arcs} arcs, found {len(arcs)}", line)
    missing = [v for v in range(n) if node_costs[v] is None]
    if missing:
        raise ParseError(f"missing node cost line for node {missing[0]}", line)
    for key in edges:
        if key not in arc_lines:
            raise ParseError(f"base edge {key} has no arc", edge_lines[key])
    try:
        return ProblemInstance(n, edges, arcs, node_costs,
                               np.array(join).reshape(-1, L, L),
                               np.array(cut).reshape(-1, L, L))
    except InstanceError as exc:
        raise ParseError(str(exc), line) from None


def _check_pair(v, w, n, line):
    if not (0 <= v < n and 0 <= w < n):
        raise ParseError(f"node index out of range in ({v}, {w})", line)
    if v == w:
        raise ParseError(f"self-loop ({v}, {v})", line)


def serialize_instance(instance):
    L = instance.num_labels
    out = [f"{INSTANCE_MAGIC} {VERSION}",
           f"nodes {instance.num_nodes}",
           f"labels {L}",
           f"base_edges {len(instance.base_edges)}",
           f"lifted_arcs {instance.num_arcs}"]
    for v, w in instance.base_edges.tolist():
        out.append(f"edge {v} {w}")
    for (v, w), j, c in zip(instance.arcs.tolist(), instance.join_costs, instance.cut_costs):
        out.append(f"arc {v} {w} join " + " ".join(map(format_number, j.ravel()))
                   + " cut " + " ".join(map(format_number, c.ravel())))
    for v, row in enumerate(instance.node_costs):
        out.append(f"node {v} " + " ".join(map(format_number, row)))
    return "\n".join(out) + "\n"


def serialize_solution(solution):
    """Solution document: header, objective, feasibility, metadata, node lines."""
    out = [f"{SOLUTION_MAGIC} {VERSION}",
           f"nodes {len(solution.labels)}",
           f"objective {format_number(solution.objective)}",
           f"feasible {'true' if solution.feasible else 'false'}"]
    for key in sorted(solution.metadata):
        value = solution.metadata[key]
        if isinstance(value, float):
            value = format_number(value)
        out.append(f"meta {key} {value}")
    for v, (l, m) in enumerate(zip(solution.labels.tolist(), solution.components.tolist())):
        out.append(f"node {v} {l} {m}")
    return "\n".join(out) + "\n"


def parse_solution(text):
    records = _lines(text)
    line = _header(records, SOLUTION_MAGIC)
    line, n = _expect(records, "nodes", line)
    objective = feasible = None
    metadata = {}
    labels = [None] * n
    components = [None] * n
    for line, toks in records:
        kind = toks[0]
        if kind == "objective" and len(toks) == 2:
            objective = _float(toks[1], line)
        elif kind == "feasible" and len(toks) == 2:
            if toks[1] not in ("true", "false"):
                raise ParseError("feasible must be 'true' or 'false'", line, 2)
            feasible = toks[1] == "true"
        elif kind == "meta" and len(toks) == 3:
            metadata[toks[1]] = _meta_value(toks[2])
        elif kind == "node" and len(toks) == 4:
            v, l, m = (_int(t, line, "field") for t in toks[1:])
            if not 0 <= v < n:
                raise ParseError(f"node {v} out of range", line)
            if labels[v] is not None:
                raise ParseError(f"duplicate node {v}", line)
            if l < 0:
                raise ParseError("labels must be nonnegative", line)
            labels[v], components[v] = l, m
        else:
            raise ParseError(f"malformed record {toks[0]!r}", line, 1)
    if objective is None:
        raise ParseError("missing 'objective' line", line)
    if feasible is None:
        raise ParseError("missing 'feasible' line", line)
    missing = [v for v in range(n) if labels[v] is None]
    if missing:
        raise ParseError(f"missing line for node {missing[0]}", line)
    return Solution(np.array(labels, dtype=np.int64), np.array(components, dtype=np.int64),
                    objective, feasible, metadata)


def _meta_value(tok):
    for conv in (int, float):
        try:
            return conv(tok)
        except ValueError:
            pass
    return tok


def generate_random(seed, n, edge_density=0.3, lift_density=0.2, num_labels=2,
                    cost_range=(-10, 10)):
    """Random connected instance with integer costs uniform in ``cost_range`` (inclusive).

    A random spanning tree is laid first; every other node pair becomes a
    base edge with probability ``edge_density`` and otherwise a lifted arc
    with probability ``lift_density``.  Arc orientations are random.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if num_labels < 1:
        raise ValueError("num_labels must be positive")
    if not (0 <= edge_density <= 1 and 0 <= lift_density <= 1):
        raise ValueError("densities must lie in [0, 1]")
    lo, hi = cost_range
    if lo > hi:
        raise ValueError("empty cost range")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    edges = set()
    for i in range(1, n):
        j = int(rng.integers(i))
        a, b = int(order[i]), int(order[j])
        edges.add((min(a, b), max(a, b)))
    pairs = [(v, w) for v in range(n) for w in range(v + 1, n) if (v, w) not in edges]
    u_edge = rng.random(len(pairs))
    u_lift = rng.random(len(pairs))
    lifted = []
    for (v, w), ue, ul in zip(pairs, u_edge, u_lift):
        if ue < edge_density:
            edges.add((v, w))
        elif ul < lift_density:
            lifted.append((v, w))
    keys = sorted(edges) + lifted
    flip = rng.random(len(keys)) < 0.5
    arcs = [(w, v) if f else (v, w) for (v, w), f in zip(keys, flip)]
    L = num_labels
    node_costs = rng.integers(lo, hi + 1, size=(n, L))
    join = rng.integers(lo, hi + 1, size=(len(arcs), L, L))
    cut = rng.integers(lo, hi + 1, size=(len(arcs), L, L))
    return ProblemInstance(n, sorted(edges), arcs, node_costs, join, cut)


SPEC_TYPES = {"uiqp": UiqpSpec, "lmp": LmpSpec, "pose": PoseSpec, "tracking": TrackingSpec}

# expected trailing shape of every array field, as a function of the other fields
_SPEC_SHAPES = {
    "uiqp": lambda d: {"arcs": (None, 2), "node_costs": (d["num_nodes"], None),
                       "pair_costs": (len(d["arcs"]), None, None)},
    "lmp": lambda d: {"base_edges": (None, 2), "lifted_edges": (None, 2),
                      "edge_costs": (len(d["base_edges"]) + len(d["lifted_edges"]),)},
    "pose": lambda d: {"unary": (d["num_detections"], d["num_classes"]),
                       "pairwise": (d["num_detections"] * (d["num_detections"] - 1) // 2,
                                    d["num_classes"], d["num_classes"])},
    "tracking": lambda d: {"edges": (None, 2), "unary": (d["num_nodes"],),
                           "pairwise": (len(d["edges"]),)},
}


def parse_spec(kind, text):
    """Parse a JSON special-case specification (``uiqp``, ``lmp``, ``pose``, ``tracking``).

    The JSON object has exactly the fields of the matching spec dataclass.
    """
    if kind not in SPEC_TYPES:
        raise ValueError(f"unknown spec kind {kind!r}")
    cls = SPEC_TYPES[kind]
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ParseError(f"{kind} spec must be a JSON object", 1)
    names = [f.name for f in dataclasses.fields(cls)]
    missing = [k for k in names if k not in data]
    extra = sorted(set(data) - set(names))
    if missing or extra:
        raise ParseError(f"{kind} spec fields: missing {missing}, unexpected {extra}", 1)
    for k in names:
        if k.startswith("num_") and (not isinstance(data[k], int) or data[k] < 1):
            raise ParseError(f"{k} must be a positive integer", 1)
    for k, shape in _SPEC_SHAPES[kind](data).items():
        arr = np.asarray(data[k], dtype=float)
        if arr.size == 0:
            arr = arr.reshape([0 if s is None else s for s in shape])
        if arr.ndim != len(shape) or any(s is not None and s != a
                                         for s, a in zip(shape, arr.shape)):
            raise ParseError(f"{k} has shape {arr.shape}, expected "
                             f"{tuple('*' if s is None else s for s in shape)}", 1)
        if not np.all(np.isfinite(arr)):
            raise ParseError(f"{k} must be finite", 1)
        if k in ("arcs", "base_edges", "lifted_edges", "edges"):
            if np.any(arr != np.round(arr)):
                raise ParseError(f"{k} must hold integer node indices", 1)
            data[k] = [tuple(map(int, e)) for e in arr]
        else:
            data[k] = arr
    if kind == "uiqp" and len(data["arcs"]):
        L = data["node_costs"].shape[1]
        if data["pair_costs"].shape[1:] != (L, L):
            raise ParseError(f"pair_costs must be {L}x{L} per arc", 1)
    return cls(**data)


def serialize_spec(spec):
    def plain(x):
        if isinstance(x, np.ndarray):
            return x.tolist()
        if isinstance(x, list):
            return [list(e) if isinstance(e, tuple) else e for e in x]
        return x
    return json.dumps({k: plain(v) for k, v in dataclasses.asdict(spec).items()}) + "\n"
