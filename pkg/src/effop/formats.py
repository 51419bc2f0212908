"""Input documents and JSON output.

Three JSON document kinds are understood:

network
    ``{"nodes": [...], "edges": [{"tail": .., "head": ..}, ...],
    "sigma": {...}, "boundary": [...]}``; ``boundary`` is optional.
lattice
    ``{"d": 2, "tau": [2, 2], "sigma": {...}}``.
zproblem
    ``{"sigma": {...}, "decomposition": {"U": part, "E": part, "J": part}}``
    where a part is a list of coordinate indices or ``{"basis": [[...], ...]}``
    (a list of ambient vectors, orthonormalized on load).

A ``sigma`` entry is ``{"diag": [...]}`` or ``{"dense": [[...], ...]}``,
with an optional ``"imag"`` entry of the same shape for complex operators.

Output uses :func:`dumps`, which writes floats with 17 significant digits,
infinities as the strings ``"inf"``/``"-inf"`` and complex numbers as
``{"real": .., "imag": ..}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .blockop import OrthoDecomp
from .errors import InputError, ParseError
from .lattice import Lattice, LatticeNetwork
from .network import BoundaryPartition, Digraph, ElectricalNetwork
from .numkit import DEFAULT_TOLERANCES, Subspace, Tolerances
from .zproblem import ZProblem

__all__ = [
    "dumps",
    "to_jsonable",
    "SigmaSpec",
    "NetworkDoc",
    "LatticeDoc",
    "ZProblemDoc",
    "parse_network",
    "parse_lattice",
    "parse_zproblem",
    "parse_vector",
    "load_json",
]

PART_NAMES = ("U", "E", "J")


# output ---------------------------------------------------------------------------------

def _format_float(x: float) -> Any:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return _RawNumber(text)


class _RawNumber(str):
    """A pre-formatted number emitted without quotes."""


def to_jsonable(obj: Any) -> Any:
    """Convert numpy data, complex numbers and infinities to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return {"real": _format_float(obj.real), "imag": _format_float(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write(obj: Any, indent: int, level: int, out: list[str]):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, _RawNumber):
        out.append(str(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(k)}: ")
            _write(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not any(isinstance(v, (dict, list)) for v in obj):
            out.append("[" + ", ".join(_scalar(v) for v in obj) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _write(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        out.append(_scalar(obj))


def _scalar(v: Any) -> str:
    return str(v) if isinstance(v, _RawNumber) else json.dumps(v)


def dumps(obj: Any, indent: int = 2) -> str:
    """Serialize to JSON with 17 significant digits for every float."""
    out: list[str] = []
    _write(to_jsonable(obj), indent, 0, out)
    return "".join(out)


# input helpers --------------------------------------------------------------------------

def load_json(text: str) -> Any:
    """Parse JSON, reporting syntax errors with their line number."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None


def _line_of(text: str | None, key: str) -> int | None:
    if text is None:
        return None
    needle = json.dumps(key)
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


class _Reader:
    """Field access with error messages that name the field and its line."""

    def __init__(self, text: str | None):
        self.text = text

    def fail(self, message: str, field: str) -> ParseError:
        return ParseError(message, field=field, line=_line_of(self.text, field.split(".")[-1].split("[")[0]))

    def require(self, doc: Any, key: str, field: str | None = None) -> Any:
        if not isinstance(doc, dict):
            raise self.fail("expected an object", field or key)
        if key not in doc:
            raise ParseError(f"missing required field '{key}'", field=field or key)
        return doc[key]

    def number(self, value: Any, field: str) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise self.fail("expected a number", field)
        if isinstance(value, str):
            if value not in ("inf", "-inf", "nan"):
                raise self.fail("expected a number", field)
            return float(value)
        return float(value)

    def integer(self, value: Any, field: str) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.fail("expected an integer", field)
        return value

    def number_list(self, value: Any, field: str) -> list[float]:
        if not isinstance(value, list):
            raise self.fail("expected a list of numbers", field)
        return [self.number(v, f"{field}[{i}]") for i, v in enumerate(value)]

    def number_matrix(self, value: Any, field: str) -> list[list[float]]:
        if not isinstance(value, list):
            raise self.fail("expected a list of rows", field)
        rows = [self.number_list(r, f"{field}[{i}]") for i, r in enumerate(value)]
        if rows and len({len(r) for r in rows}) != 1:
            raise self.fail("rows have different lengths", field)
        return rows


@dataclass(frozen=True)
class SigmaSpec:
    """A conductivity as written in a document.

    ``form`` is ``"diag"`` or ``"dense"``; ``real`` and ``imag`` hold the
    entries (``imag`` is ``None`` for real operators).
    """

    form: str
    real: tuple
    imag: tuple | None = None

    def matrix(self, size: int | None = None) -> np.ndarray:
        re = np.array(self.real, dtype=float)
        im = None if self.imag is None else np.array(self.imag, dtype=float)
        values = re if im is None else re + 1j * im
        if self.form == "diag":
            values = np.diag(values) if values.size else np.zeros((0, 0))
        elif values.size == 0:
            values = np.zeros((0, 0))
        if size is not None and values.shape != (size, size):
            raise ParseError(f"sigma has shape {values.shape}, expected {(size, size)}", field="sigma")
        return values

    def as_dict(self) -> dict:
        out: dict = {self.form: _nested(self.real)}
        if self.imag is not None:
            out["imag"] = _nested(self.imag)
        return out

    @classmethod
    def from_matrix(cls, sigma: np.ndarray, form: str = "dense") -> "SigmaSpec":
        sigma = np.asarray(sigma)
        if form == "diag":
            values = np.diag(sigma)
        elif form == "dense":
            values = sigma
        else:
            raise InputError(f"unknown sigma form {form!r}")
        imag = _freeze(values.imag) if np.iscomplexobj(values) else None
        return cls(form, _freeze(np.real(values)), imag)


def _freeze(a) -> tuple:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        return tuple(float(x) for x in a)
    return tuple(tuple(float(x) for x in row) for row in a)


def _nested(t: tuple) -> list:
    return [list(r) if isinstance(r, tuple) else r for r in t]


def _parse_sigma(reader: _Reader, doc: Any) -> SigmaSpec:
    if not isinstance(doc, dict):
        raise reader.fail("expected an object with 'diag' or 'dense'", "sigma")
    forms = [k for k in ("diag", "dense") if k in doc]
    if len(forms) != 1:
        raise reader.fail("give exactly one of 'diag' or 'dense'", "sigma")
    extra = set(doc) - {"diag", "dense", "imag"}
    if extra:
        raise reader.fail(f"unknown keys {sorted(extra)}", "sigma")
    form = forms[0]
    read = reader.number_list if form == "diag" else reader.number_matrix
    real = read(doc[form], f"sigma.{form}")
    imag = None
    if "imag" in doc:
        imag = read(doc["imag"], "sigma.imag")
        if np.shape(imag) != np.shape(real):
            raise reader.fail("imag must have the same shape as the real part", "sigma.imag")
    if form == "dense" and real and len(real) != len(real[0]):
        raise reader.fail("dense sigma must be square", "sigma.dense")
    return SigmaSpec(form, _freeze(real) if real else (), None if imag is None else (_freeze(imag) if imag else ()))


# network --------------------------------------------------------------------------------

@dataclass(frozen=True)
class NetworkDoc:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    sigma: SigmaSpec
    boundary: tuple[str, ...] | None = None

    def as_dict(self) -> dict:
        out = {
            "nodes": list(self.nodes),
            "edges": [{"tail": t, "head": h} for t, h in self.edges],
            "sigma": self.sigma.as_dict(),
        }
        if self.boundary is not None:
            out["boundary"] = list(self.boundary)
        return out

    def dumps(self) -> str:
        return dumps(self.as_dict())

    def graph(self) -> Digraph:
        index = {name: i for i, name in enumerate(self.nodes)}
        return Digraph(len(self.nodes), tuple((index[t], index[h]) for t, h in self.edges), self.nodes)

    def network(self, tol: Tolerances = DEFAULT_TOLERANCES) -> ElectricalNetwork:
        graph = self.graph()
        return ElectricalNetwork(graph, self.sigma.matrix(graph.edge_count), tol)

    def partition(self) -> BoundaryPartition:
        if self.boundary is None:
            raise ParseError("this operation needs a 'boundary' field", field="boundary")
        return BoundaryPartition.from_boundary(self.graph(), self.boundary)


def parse_network(source: str | dict) -> NetworkDoc:
    """Parse a network document from JSON text or an already loaded object."""
    text = source if isinstance(source, str) else None
    doc = load_json(source) if isinstance(source, str) else source
    r = _Reader(text)
    nodes_raw = r.require(doc, "nodes")
    if not isinstance(nodes_raw, list) or not all(isinstance(n, str) for n in nodes_raw):
        raise r.fail("expected a list of node names", "nodes")
    if len(set(nodes_raw)) != len(nodes_raw):
        raise r.fail("node names must be distinct", "nodes")
    known = set(nodes_raw)
    edges_raw = r.require(doc, "edges")
    if not isinstance(edges_raw, list):
        raise r.fail("expected a list of edges", "edges")
    edges = []
    for k, e in enumerate(edges_raw):
        ends = []
        for end in ("tail", "head"):
            field = f"edges[{k}].{end}"
            name = r.require(e, end, field)
            if name not in known:
                raise ParseError(f"unknown node {name!r}", field=field, line=_line_of(text, end))
            ends.append(name)
        if ends[0] == ends[1]:
            raise ParseError(f"self-loop at node {ends[0]!r}", field=f"edges[{k}]")
        edges.append((ends[0], ends[1]))
    sigma = _parse_sigma(r, r.require(doc, "sigma"))
    size = len(sigma.real)
    if size != len(edges):
        raise r.fail(f"sigma describes {size} edges but {len(edges)} are listed", "sigma")
    boundary = None
    if "boundary" in doc:
        b = doc["boundary"]
        if not isinstance(b, list) or not all(isinstance(n, str) and n in known for n in b):
            raise r.fail("expected a list of known node names", "boundary")
        if len(set(b)) != len(b):
            raise r.fail("boundary nodes must be distinct", "boundary")
        boundary = tuple(b)
    extra = set(doc) - {"nodes", "edges", "sigma", "boundary"}
    if extra:
        raise ParseError(f"unknown keys {sorted(extra)}", field=sorted(extra)[0])
    return NetworkDoc(tuple(nodes_raw), tuple(edges), sigma, boundary)


# lattice --------------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeDoc:
    d: int
    tau: tuple[int, ...]
    sigma: SigmaSpec

    def as_dict(self) -> dict:
        return {"d": self.d, "tau": list(self.tau), "sigma": self.sigma.as_dict()}

    def dumps(self) -> str:
        return dumps(self.as_dict())

    def lattice(self) -> Lattice:
        return Lattice(self.d, self.tau)

    def network(self, tol: Tolerances = DEFAULT_TOLERANCES) -> LatticeNetwork:
        lat = self.lattice()
        return LatticeNetwork(lat, self.sigma.matrix(lat.edge_count), tol)


def parse_lattice(source: str | dict) -> LatticeDoc:
    text = source if isinstance(source, str) else None
    doc = load_json(source) if isinstance(source, str) else source
    r = _Reader(text)
    d = r.integer(r.require(doc, "d"), "d")
    tau_raw = r.require(doc, "tau")
    if not isinstance(tau_raw, list):
        raise r.fail("expected a list of periods", "tau")
    tau = tuple(r.integer(t, f"tau[{i}]") for i, t in enumerate(tau_raw))
    sigma = _parse_sigma(r, r.require(doc, "sigma"))
    try:
        lat = Lattice(d, tau)
    except InputError as exc:
        raise r.fail(str(exc), "tau") from None
    if len(sigma.real) != lat.edge_count:
        raise r.fail(f"sigma describes {len(sigma.real)} edges, the cell has {lat.edge_count}", "sigma")
    extra = set(doc) - {"d", "tau", "sigma"}
    if extra:
        raise ParseError(f"unknown keys {sorted(extra)}", field=sorted(extra)[0])
    return LatticeDoc(d, tau, sigma)


# zproblem -------------------------------------------------------------------------------

@dataclass(frozen=True)
class ZProblemDoc:
    """A Z-problem document; each part is index tuple or vector tuple."""

    sigma: SigmaSpec
    parts: tuple[tuple[str, tuple], ...]

    def as_dict(self) -> dict:
        decomposition = {}
        for name, (kind, data) in zip(PART_NAMES, self.parts):
            decomposition[name] = list(data) if kind == "indices" else {"basis": _nested(data)}
        return {"sigma": self.sigma.as_dict(), "decomposition": decomposition}

    def dumps(self) -> str:
        return dumps(self.as_dict())

    def zproblem(self, tol: Tolerances = DEFAULT_TOLERANCES) -> ZProblem:
        sigma = self.sigma.matrix()
        n = sigma.shape[0]
        subspaces = []
        for name, (kind, data) in zip(PART_NAMES, self.parts):
            if kind == "indices":
                subspaces.append(Subspace.coordinate(n, data))
            else:
                vectors = np.array(data, dtype=float).reshape(len(data), n).T if data else np.zeros((n, 0))
                sub = Subspace.span(vectors, n, tol)
                if sub.dim != len(data):
                    raise ParseError("basis vectors are linearly dependent", field=f"decomposition.{name}")
                subspaces.append(sub)
        try:
            decomp = OrthoDecomp(subspaces, tol)
        except InputError as exc:
            raise ParseError(str(exc), field="decomposition") from None
        return ZProblem(sigma, decomp, tol)


def parse_zproblem(source: str | dict) -> ZProblemDoc:
    text = source if isinstance(source, str) else None
    doc = load_json(source) if isinstance(source, str) else source
    r = _Reader(text)
    sigma = _parse_sigma(r, r.require(doc, "sigma"))
    if sigma.form == "dense" and sigma.real and len(sigma.real) != len(sigma.real[0]):
        raise r.fail("sigma must be square", "sigma")
    n = len(sigma.real)
    dec = r.require(doc, "decomposition")
    if not isinstance(dec, dict):
        raise r.fail("expected an object with U, E, J", "decomposition")
    parts = []
    for name in PART_NAMES:
        field = f"decomposition.{name}"
        raw = r.require(dec, name, field)
        if isinstance(raw, list):
            idx = tuple(r.integer(v, f"{field}[{i}]") for i, v in enumerate(raw))
            if any(i < 0 or i >= n for i in idx):
                raise r.fail(f"indices must lie in [0, {n})", field)
            parts.append(("indices", idx))
        elif isinstance(raw, dict) and set(raw) == {"basis"}:
            vecs = r.number_matrix(raw["basis"], f"{field}.basis")
            if any(len(v) != n for v in vecs):
                raise r.fail(f"basis vectors must have {n} entries", f"{field}.basis")
            parts.append(("basis", _freeze(vecs) if vecs else ()))
        else:
            raise r.fail("expected an index list or {\"basis\": [...]}", field)
    extra = set(doc) - {"sigma", "decomposition"}
    if extra:
        raise ParseError(f"unknown keys {sorted(extra)}", field=sorted(extra)[0])
    return ZProblemDoc(sigma, tuple(parts))


def parse_vector(text: str, name: str = "vector") -> np.ndarray:
    """Parse ``"1,0,-2.5"`` into a float vector."""
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ParseError(f"expected comma-separated numbers, got {text!r}", field=name) from None
    if not values:
        raise ParseError("empty vector", field=name)
    return np.array(values)
