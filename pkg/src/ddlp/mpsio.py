"""File formats: MPS input, JSON instances and matrices, dataset directories.

Dataset directory layout::

    manifest.json              DatasetManifest as JSON
    instances/<id>.json        one LP instance per id
"""
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, ShapeError
from .lp import LpInstance
from .projection import METHOD_TAGS, ProjectionMatrix
from .reform import GeneralLp

# ---------------------------------------------------------------------------
# MPS

_SECTIONS = {"NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"}
_UNSUPPORTED = {"RANGES", "OBJSENSE", "OBJSENSE MAX", "OBJSENSE MIN", "SOS", "QUADOBJ", "QMATRIX"}
# 1-based inclusive column ranges of the six fixed-format fields
_FIXED_FIELDS = ((2, 3), (5, 12), (15, 22), (25, 36), (40, 47), (50, 61))


def _fixed_fields(line):
    out = []
    for lo, hi in _FIXED_FIELDS:
        out.append(line[lo - 1:hi].strip())
    while out and not out[-1]:
        out.pop()
    return out


def _number(tok, lineno):
    try:
        val = float(tok)
    except ValueError:
        raise ParseError(f"expected a number, got {tok!r}", lineno) from None
    if not math.isfinite(val):
        raise ParseError(f"non-finite value {tok!r}", lineno)
    return val


def parse_mps(text, minimize=True, name=None):
    """Parse fixed- or free-format MPS text into a GeneralLp.

    The N row is the objective. With ``minimize`` (the MPS convention) it is
    negated so the result maximizes ``w @ z``; ``objective_constant`` holds
    the matching constant, so the MPS objective value at ``z`` is
    ``-(w @ z + objective_constant)``. L rows become inequalities, G rows are
    negated into inequalities, E rows become equalities. Variables default to
    ``0 <= z < inf``.
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8", errors="replace")
    lines = text.splitlines()
    section = None
    prob_name = name or ""
    row_type, row_order = {}, []
    objective = None
    col_index, col_names = {}, []
    entries = []                      # (row, col, value)
    rhs = {}
    bounds = {}                       # col -> [lower, upper]
    finished = False

    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n\r")
        if not line.strip() or line.lstrip().startswith("*"):
            continue
        tokens = line.split()
        if not line[0].isspace():
            head = tokens[0].upper()
            if head in _UNSUPPORTED or " ".join(tokens).upper() in _UNSUPPORTED:
                raise ParseError(f"section {head} is not supported", lineno)
            if head not in _SECTIONS:
                raise ParseError(f"unknown section {tokens[0]!r}", lineno)
            section = head
            if head == "NAME":
                if name is None and len(tokens) > 1:
                    prob_name = " ".join(tokens[1:])
            elif head == "ENDATA":
                finished = True
                break
            elif len(tokens) > 1 and head not in ("RHS", "BOUNDS"):
                raise ParseError(f"unexpected tokens after {head}", lineno)
            continue

        if section == "ROWS":
            if len(tokens) != 2:
                raise ParseError("ROWS entries need a type and a name", lineno)
            kind, rname = tokens[0].upper(), tokens[1]
            if kind not in ("N", "L", "G", "E"):
                raise ParseError(f"unknown row type {kind!r}", lineno)
            if rname in row_type:
                raise ParseError(f"duplicate row name {rname!r}", lineno)
            row_type[rname] = kind
            if kind == "N":
                if objective is None:
                    objective = rname
            else:
                row_order.append(rname)
        elif section == "COLUMNS":
            if "'MARKER'" in tokens:
                raise ParseError("integer markers are not supported", lineno)
            if len(tokens) not in (3, 5):
                tokens = _fixed_fields(line)[1:]
                if len(tokens) not in (3, 5):
                    raise ParseError("malformed COLUMNS entry", lineno)
            cname = tokens[0]
            if cname not in col_index:
                col_index[cname] = len(col_names)
                col_names.append(cname)
            for rname, val in zip(tokens[1::2], tokens[2::2]):
                if rname not in row_type:
                    raise ParseError(f"unknown row {rname!r}", lineno)
                entries.append((rname, col_index[cname], _number(val, lineno)))
        elif section == "RHS":
            if len(tokens) % 2 == 1:
                tokens = tokens[1:]           # drop the RHS set name
            if len(tokens) not in (2, 4):
                raise ParseError("malformed RHS entry", lineno)
            for rname, val in zip(tokens[0::2], tokens[1::2]):
                if rname not in row_type:
                    raise ParseError(f"unknown row {rname!r}", lineno)
                rhs[rname] = _number(val, lineno)
        elif section == "BOUNDS":
            kind = tokens[0].upper()
            if kind in ("FR", "MI", "PL"):
                if len(tokens) not in (2, 3):
                    raise ParseError(f"malformed {kind} bound", lineno)
                cname, val = tokens[-1], None
            elif kind in ("LO", "UP", "FX"):
                if len(tokens) not in (3, 4):
                    raise ParseError(f"malformed {kind} bound", lineno)
                cname, val = tokens[-2], _number(tokens[-1], lineno)
            else:
                raise ParseError(f"unsupported bound type {kind!r}", lineno)
            if cname not in col_index:
                raise ParseError(f"bound on unknown column {cname!r}", lineno)
            lo_up = bounds.setdefault(cname, [0.0, math.inf])
            if kind == "FR":
                lo_up[:] = [-math.inf, math.inf]
            elif kind == "MI":
                lo_up[0] = -math.inf
            elif kind == "PL":
                lo_up[1] = math.inf
            elif kind == "LO":
                lo_up[0] = val
            elif kind == "UP":
                lo_up[1] = val
            else:
                lo_up[:] = [val, val]
        elif section is None:
            raise ParseError("data before any section header", lineno)
        else:
            raise ParseError(f"unexpected data in section {section}", lineno)

    if not finished:
        raise ParseError("missing ENDATA", len(lines) + 1)
    if objective is None:
        raise ParseError("no objective (N) row", None)

    n = len(col_names)
    cost = np.zeros(n)
    row_pos = {r: i for i, r in enumerate(row_order)}
    dense = np.zeros((len(row_order), n))
    for rname, j, val in entries:
        if rname == objective:
            cost[j] += val
        elif rname in row_pos:
            dense[row_pos[rname], j] += val
    rvec = np.array([rhs.get(r, 0.0) for r in row_order])
    kinds = np.array([row_type[r] for r in row_order])
    le, ge, eq = kinds == "L", kinds == "G", kinds == "E"
    a_ineq = np.vstack([dense[le], -dense[ge]]) if n else np.zeros((0, 0))
    b_ineq = np.concatenate([rvec[le], -rvec[ge]])
    lower = np.zeros(n)
    upper = np.full(n, math.inf)
    for cname, (lo, up) in bounds.items():
        lower[col_index[cname]] = lo
        upper[col_index[cname]] = up
    # MPS objective row RHS is the negated objective constant
    obj_const = -rhs.get(objective, 0.0)
    if minimize:
        w, const = -cost, -obj_const
    else:
        w, const = cost, obj_const
    return GeneralLp(w, a_ineq.reshape(-1, n), b_ineq, dense[eq].reshape(-1, n), rvec[eq],
                     lower, upper, id=prob_name, var_names=tuple(col_names),
                     objective_constant=const)


def read_mps(path, minimize=True):
    with open(path, "rb") as fh:
        return parse_mps(fh.read(), minimize=minimize, name=None)


# ---------------------------------------------------------------------------
# JSON instances and matrices

def _dumps(obj):
    try:
        return json.dumps(obj, allow_nan=False).encode("utf-8")
    except ValueError as exc:
        raise ParseError(f"cannot serialize: {exc}") from exc


def _loads(data):
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from exc


def write_instance_json(inst):
    """Serialize an LP instance; floats use the shortest exact round-trip repr."""
    return _dumps({
        "id": inst.id,
        "n": inst.n,
        "m": inst.m,
        "c": inst.c.tolist(),
        "A": inst.a.tolist(),
        "b": inst.b.tolist(),
    })


def _require(obj, keys):
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise ParseError(f"missing keys: {', '.join(missing)}")


def read_instance_json(data):
    obj = _loads(data)
    _require(obj, ("id", "n", "m", "c", "A", "b"))
    n, m = obj["n"], obj["m"]
    if not (isinstance(n, int) and isinstance(m, int)) or n < 0 or m < 0:
        raise ParseError("n and m must be non-negative integers")
    try:
        c = np.array(obj["c"], dtype=float)
        b = np.array(obj["b"], dtype=float)
        a = np.array(obj["A"], dtype=float).reshape(m, n)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad array data: {exc}") from exc
    if c.shape != (n,) or b.shape != (m,):
        raise ParseError("array lengths disagree with n and m")
    try:
        return LpInstance(c, a, b, id=str(obj["id"]))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def write_matrix(pm):
    return _dumps({"n": pm.n, "k": pm.k, "method_tag": pm.method_tag, "P": pm.p.tolist()})


def read_matrix(data):
    obj = _loads(data)
    _require(obj, ("n", "k", "method_tag", "P"))
    n, k = obj["n"], obj["k"]
    if not (isinstance(n, int) and isinstance(k, int)):
        raise ParseError("n and k must be integers")
    if k >= n:
        raise ShapeError(f"projection must reduce dimension, got n={n}, k={k}")
    if obj["method_tag"] not in METHOD_TAGS:
        raise ParseError(f"unknown method tag {obj['method_tag']!r}")
    try:
        p = np.array(obj["P"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad matrix data: {exc}") from exc
    if p.shape != (n, k):
        raise ParseError(f"P has shape {p.shape}, expected ({n}, {k})")
    if not np.all(np.isfinite(p)):
        raise ParseError("P has non-finite entries")
    return ProjectionMatrix(p, obj["method_tag"])


# ---------------------------------------------------------------------------
# dataset directories

@dataclass
class DatasetManifest:
    name: str
    n: int
    m: int
    train_ids: list
    test_ids: list
    identical_a: bool = False
    files: dict = field(default_factory=dict)

    def __post_init__(self):
        overlap = set(self.train_ids) & set(self.test_ids)
        if overlap:
            raise ValueError(f"train and test ids overlap: {sorted(overlap)[:5]}")


@dataclass
class Dataset:
    manifest: DatasetManifest
    instances: dict               # id -> LpInstance

    def train(self):
        return [self.instances[i] for i in self.manifest.train_ids]

    def test(self):
        return [self.instances[i] for i in self.manifest.test_ids]

    def all(self):
        return [self.instances[i] for i in self.manifest.train_ids + self.manifest.test_ids]


def _safe_name(inst_id):
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in inst_id)


def save_dataset(ds, directory):
    directory = Path(directory)
    (directory / "instances").mkdir(parents=True, exist_ok=True)
    files = {}
    for inst_id in ds.manifest.train_ids + ds.manifest.test_ids:
        rel = f"instances/{_safe_name(inst_id)}.json"
        (directory / rel).write_bytes(write_instance_json(ds.instances[inst_id]))
        files[inst_id] = rel
    ds.manifest.files = files
    (directory / "manifest.json").write_text(json.dumps(asdict(ds.manifest), indent=1))
    return directory


def load_dataset(directory):
    directory = Path(directory)
    path = directory / "manifest.json"
    if not path.exists():
        raise ParseError(f"no manifest.json in {directory}")
    obj = _loads(path.read_bytes())
    _require(obj, ("name", "n", "m", "train_ids", "test_ids", "identical_a", "files"))
    manifest = DatasetManifest(**obj)
    instances = {}
    for inst_id in manifest.train_ids + manifest.test_ids:
        rel = manifest.files.get(inst_id)
        if rel is None or not (directory / rel).exists():
            raise ParseError(f"missing instance file for {inst_id!r}")
        inst = read_instance_json((directory / rel).read_bytes())
        if inst.n != manifest.n:
            raise ParseError(f"instance {inst_id!r} has n={inst.n}, manifest says {manifest.n}")
        instances[inst_id] = inst
    return Dataset(manifest, instances)
