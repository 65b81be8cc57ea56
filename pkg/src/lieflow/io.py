"""Reading input documents (JSON) and the bundled model corpus."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import LieAlgebra, StructureError
from .cocycle import CocycleSpec
from .group_models import EuclideanAbelian, GroupModel, HeisenbergExp, ModelError, SemidirectRxR2, Torus2
from .linalg import Subspace, parse_scalar, to_float


class DocumentError(ValueError):
    """Malformed input document; ``location`` is a JSON-pointer-like path."""

    def __init__(self, message: str, location: str = ""):
        self.location = location or "/"
        super().__init__(f"{self.location}: {message}")


@dataclass
class Document:
    """A parsed input with whatever parts it provides."""

    raw: dict
    digest: str
    source: str = ""
    kind: str = ""
    matrix: np.ndarray | None = None
    algebra: LieAlgebra | None = None
    derivation: np.ndarray | None = None
    delta: Subspace | None = None
    theta: np.ndarray | None = None
    model: GroupModel | None = None
    cocycle: CocycleSpec | None = None


def digest_of(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _scalar(x, where: str, exact: bool):
    try:
        v = parse_scalar(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise DocumentError(f"bad scalar {x!r} ({exc})", where) from None
    return v if exact else float(v)


def _mode(doc: dict, where: str, override: str | None) -> bool:
    mode = override or doc.get("mode", "exact")
    if mode not in ("exact", "float"):
        raise DocumentError(f"mode must be 'exact' or 'float', got {mode!r}", where + "/mode")
    return mode == "exact"


def parse_vector(vals, where: str, exact: bool = True, dim: int | None = None) -> np.ndarray:
    if not isinstance(vals, list):
        raise DocumentError("expected a list of scalars", where)
    if dim is not None and len(vals) != dim:
        raise DocumentError(f"expected {dim} entries, got {len(vals)}", where)
    out = [_scalar(v, f"{where}/{i}", exact) for i, v in enumerate(vals)]
    return np.array(out, dtype=object if exact else float)


def parse_matrix_doc(doc: Any, where: str = "", mode: str | None = None) -> np.ndarray:
    """``{"dim": n, "entries": [[...], ...], "mode": "exact"}`` -> square matrix."""
    if not isinstance(doc, dict):
        raise DocumentError("matrix document must be an object", where)
    if "entries" not in doc:
        raise DocumentError("missing 'entries'", where)
    exact = _mode(doc, where, mode)
    rows = doc["entries"]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise DocumentError("entries must be a non-empty list of rows", where + "/entries")
    n = doc.get("dim", len(rows))
    if not isinstance(n, int) or n < 1:
        raise DocumentError(f"dim must be a positive integer, got {n!r}", where + "/dim")
    if len(rows) != n:
        raise DocumentError(f"expected {n} rows, got {len(rows)}", where + "/entries")
    for i, r in enumerate(rows):
        if len(r) != n:
            raise DocumentError(f"row has {len(r)} entries, expected {n} (matrix must be square)",
                                f"{where}/entries/{i}")
    return np.array([[_scalar(v, f"{where}/entries/{i}/{j}", exact) for j, v in enumerate(r)]
                     for i, r in enumerate(rows)], dtype=object if exact else float)


def parse_algebra_doc(doc: Any, where: str = "", mode: str | None = None) -> LieAlgebra:
    """``{"dim": 3, "labels": [...], "structure": [[i, j, k, "c"], ...], "mode": ...}``."""
    if not isinstance(doc, dict):
        raise DocumentError("algebra document must be an object", where)
    n = doc.get("dim")
    if not isinstance(n, int) or n < 1:
        raise DocumentError(f"dim must be a positive integer, got {n!r}", where + "/dim")
    structure = doc.get("structure", [])
    if not isinstance(structure, list):
        raise DocumentError("structure must be a list", where + "/structure")
    entries = []
    for idx, e in enumerate(structure):
        if not (isinstance(e, list) and len(e) == 4 and all(isinstance(v, int) for v in e[:3])):
            raise DocumentError("structure entries are [i, j, k, c] with integer i, j, k",
                                f"{where}/structure/{idx}")
        entries.append((e[0], e[1], e[2], _scalar(e[3], f"{where}/structure/{idx}/3", True)))
    exact = _mode(doc, where, mode)
    try:
        return LieAlgebra.from_structure(n, entries, doc.get("labels"), "exact" if exact else "float")
    except StructureError as exc:
        raise DocumentError(str(exc), where + "/structure") from None


def parse_model_doc(doc: dict, where: str = "") -> GroupModel:
    name = doc.get("model")
    try:
        if name == "heisenberg":
            return HeisenbergExp()
        if name == "abelian":
            return EuclideanAbelian(int(doc.get("n", 2)))
        if name == "semidirect":
            for key in ("lambda", "mu", "xi"):
                if key not in doc:
                    raise DocumentError(f"missing '{key}'", where)
            xi = parse_vector(doc["xi"], where + "/xi", True, 2)
            return SemidirectRxR2(_scalar(doc["lambda"], where + "/lambda", True),
                                  _scalar(doc["mu"], where + "/mu", True), tuple(xi))
        if name == "torus2":
            M = doc.get("M", [[1, 1], [1, 2]])
            return Torus2(tuple(tuple(r) for r in M))
    except ModelError as exc:
        raise DocumentError(str(exc), where) from None
    raise DocumentError(f"unknown model {name!r}", where + "/model")


def parse_document(text: str, source: str = "", mode: str | None = None) -> Document:
    """Parse any supported document; the kind is inferred from its keys."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None
    if not isinstance(raw, dict):
        raise DocumentError("top-level document must be an object")
    doc = Document(raw, digest_of(text), source)
    if "model" in raw:
        doc.kind = "model"
        doc.model = parse_model_doc(raw)
        doc.algebra = doc.model.algebra
        if "derivation" in raw:
            doc.derivation = parse_matrix_doc(raw["derivation"], "/derivation", mode)
        elif isinstance(doc.model, SemidirectRxR2):
            doc.derivation = doc.model.derivation()
        if doc.derivation is not None and doc.derivation.shape[0] != doc.model.dim:
            raise DocumentError(f"derivation must be {doc.model.dim}x{doc.model.dim}", "/derivation")
    elif "A" in raw:
        doc.kind = "cocycle"
        A = parse_matrix_doc(raw["A"], "/A", mode)
        exact = A.dtype == object
        b = parse_vector(raw.get("b"), "/b", exact, A.shape[0])
        doc.cocycle = CocycleSpec(A, b)
        doc.matrix = A
    elif "structure" in raw or "algebra" in raw:
        doc.kind = "algebra"
        alg_doc = raw.get("algebra", raw)
        where = "/algebra" if "algebra" in raw else ""
        doc.algebra = parse_algebra_doc(alg_doc, where, mode)
        n = doc.algebra.dim
        if "derivation" in raw:
            doc.derivation = parse_matrix_doc(raw["derivation"], "/derivation", mode)
            if doc.derivation.shape[0] != n:
                raise DocumentError(f"derivation must be {n}x{n}", "/derivation")
        if "theta" in raw:
            doc.theta = parse_matrix_doc(raw["theta"], "/theta", mode)
            if doc.theta.shape[0] != n:
                raise DocumentError(f"theta must be {n}x{n}", "/theta")
        if "delta" in raw:
            vecs = raw["delta"]
            if not isinstance(vecs, list) or not vecs:
                raise DocumentError("delta must be a non-empty list of vectors", "/delta")
            cols = [parse_vector(v, f"/delta/{i}", doc.algebra.exact, n) for i, v in enumerate(vecs)]
            doc.delta = Subspace.span(np.stack(cols, axis=1), n)
    elif "entries" in raw:
        doc.kind = "matrix"
        doc.matrix = parse_matrix_doc(raw, "", mode)
    else:
        raise DocumentError("cannot tell the document kind (expected model, A, structure or entries)")
    return doc


# --------------------------------------------------------------------------
# bundled corpus
# --------------------------------------------------------------------------

def bundled_names() -> list[str]:
    root = resources.files("lieflow") / "models"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_text(name: str) -> str:
    path = resources.files("lieflow") / "models" / f"{name}.json"
    if not path.is_file():
        raise DocumentError(f"no bundled model named {name!r}; have {', '.join(bundled_names())}")
    return path.read_text()


def load_document(path_or_name: str, mode: str | None = None) -> Document:
    """Read a file, or a bundled model when no such file exists."""
    p = Path(path_or_name)
    if p.is_file():
        try:
            text = p.read_text()
        except OSError as exc:
            raise DocumentError(f"cannot read {p}: {exc}") from None
        return parse_document(text, str(p), mode)
    name = path_or_name.removeprefix("models:").removesuffix(".json")
    if name in bundled_names():
        return parse_document(bundled_text(name), f"models:{name}", mode)
    raise DocumentError(f"no such file or bundled model: {path_or_name}")


def matrix_doc(M, mode: str | None = None) -> dict:
    """Inverse of :func:`parse_matrix_doc`."""
    exact = mode == "exact" if mode else M.dtype == object
    if exact:
        entries = [[str(Fraction(v)) for v in row] for row in M]
    else:
        entries = [[repr(float(v)) for v in row] for row in to_float(M)]
    return {"dim": int(M.shape[0]), "entries": entries, "mode": "exact" if exact else "float"}
