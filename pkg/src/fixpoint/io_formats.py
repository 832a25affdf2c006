"""Matrix Market and vector file parsing, plus certificate JSON.

All parse errors carry 1-based line numbers.  Serialization is
deterministic: alphabetical JSON keys, 17-significant-digit floats in
matrix files, no timestamps.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, UnsupportedFormatError
from .metric import FixedPointResult
from .sparse import ContractionCertificate, SparseMatrixCOO

MM_HEADER = "%%MatrixMarket matrix coordinate real general"
CERTIFICATE_SCHEMA_VERSION = "1"


def _read_text(source) -> str:
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("ascii") if isinstance(data, bytes) else data
    return Path(source).read_text(encoding="ascii")


def _write_text(text: str, dest) -> None:
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text, encoding="ascii")


def read_matrix_market(source) -> SparseMatrixCOO:
    """Parse coordinate Matrix Market input into a canonical 0-indexed COO.

    ``source`` is a path or a file-like object (text or bytes).  Duplicate
    coordinates are summed and explicit zeros dropped.  Symmetric files are
    expanded to general storage; complex and pattern files are rejected.
    """
    lines = _read_text(source).splitlines()
    if not lines:
        raise ParseError(1, "empty file, expected Matrix Market header")

    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket":
        raise ParseError(1, f"missing Matrix Market header, got {lines[0]!r}")
    obj, fmt, field, symmetry = (w.lower() for w in header[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise UnsupportedFormatError(
            f"only 'matrix coordinate' input is supported, got '{obj} {fmt}'"
        )
    if field not in ("real", "integer"):
        raise UnsupportedFormatError(f"unsupported field type '{field}'")
    if symmetry not in ("general", "symmetric"):
        raise UnsupportedFormatError(f"unsupported symmetry '{symmetry}'")

    n_rows = n_cols = nnz = None
    n_file_entries = 0
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        parts = line.split()
        if n_rows is None:
            if len(parts) != 3:
                raise ParseError(lineno, f"expected 'rows cols nnz', got {raw!r}")
            try:
                n_rows, n_cols, nnz = (int(p) for p in parts)
            except ValueError:
                raise ParseError(lineno, f"non-integer size line {raw!r}") from None
            if n_rows < 0 or n_cols < 0 or nnz < 0:
                raise ParseError(lineno, "size values must be non-negative")
            continue
        if n_file_entries >= nnz:
            raise ParseError(lineno, f"more than the declared {nnz} entries")
        if len(parts) != 3:
            raise ParseError(lineno, f"expected 'row col value', got {raw!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            v = float(parts[2])
        except ValueError:
            raise ParseError(lineno, f"malformed entry {raw!r}") from None
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise ParseError(
                lineno, f"entry ({i}, {j}) outside a {n_rows}x{n_cols} matrix"
            )
        if not math.isfinite(v):
            raise ParseError(lineno, f"non-finite value {parts[2]!r}")
        n_file_entries += 1
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
        if symmetry == "symmetric" and i != j:
            rows.append(j - 1)
            cols.append(i - 1)
            vals.append(v)

    if n_rows is None:
        raise ParseError(len(lines), "missing size line")
    if n_file_entries != nnz:
        raise ParseError(
            len(lines), f"declared {nnz} entries but found {n_file_entries}"
        )

    coo = SparseMatrixCOO(
        n_rows, n_cols,
        np.array(rows, dtype=np.int64),
        np.array(cols, dtype=np.int64),
        np.array(vals, dtype=np.float64),
    )
    return coo.canonicalize()


def write_matrix_market(A: SparseMatrixCOO, dest=None) -> str:
    """Render a COO matrix as Matrix Market text (17 significant digits).

    Canonicalizes first so output is unique; read(write(A)) == A exactly.
    """
    canon = A if A.is_canonical() else A.canonicalize()
    lines = [MM_HEADER, f"{canon.n_rows} {canon.n_cols} {canon.nnz}"]
    for i, j, v in zip(canon.rows, canon.cols, canon.values):
        lines.append(f"{i + 1} {j + 1} {v:.17g}")
    text = "\n".join(lines) + "\n"
    if dest is not None:
        _write_text(text, dest)
    return text


def read_vector(source) -> np.ndarray:
    """One decimal number per line; blank lines and '%' comments ignored."""
    values = []
    for lineno, raw in enumerate(_read_text(source).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        try:
            v = float(line)
        except ValueError:
            raise ParseError(lineno, f"not a number: {raw!r}") from None
        if not math.isfinite(v):
            raise ParseError(lineno, f"non-finite value {raw!r}")
        values.append(v)
    return np.array(values, dtype=np.float64)


def write_vector(v, dest=None) -> str:
    text = "".join(f"{float(x):.17g}\n" for x in np.asarray(v).reshape(-1))
    if dest is not None:
        _write_text(text, dest)
    return text


@dataclass
class CertificateDocument:
    """Machine-readable convergence certificate (schema version "1")."""

    problem: dict
    norms: dict
    verdict: str
    determinant_diagnostic: float | None = None
    solve: dict | None = None
    schema_version: str = CERTIFICATE_SCHEMA_VERSION


def _drop_non_finite(value):
    if isinstance(value, dict):
        cleaned = {k: _drop_non_finite(v) for k, v in value.items()}
        return {k: v for k, v in cleaned.items() if v is not None}
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def certificate_to_json(doc: CertificateDocument) -> str:
    """Deterministic JSON: alphabetical keys, omitted rather than null/NaN."""
    payload = {
        "schema_version": doc.schema_version,
        "problem": doc.problem,
        "norms": doc.norms,
        "verdict": doc.verdict,
        "determinant_diagnostic": doc.determinant_diagnostic,
        "solve": doc.solve,
    }
    payload = _drop_non_finite(payload)
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def certificate_from_json(text: str) -> CertificateDocument:
    raw = json.loads(text)
    return CertificateDocument(
        problem=raw["problem"],
        norms=raw["norms"],
        verdict=raw["verdict"],
        determinant_diagnostic=raw.get("determinant_diagnostic"),
        solve=raw.get("solve"),
        schema_version=raw["schema_version"],
    )


def solve_summary(result: FixedPointResult, residual: float) -> dict:
    """The optional 'solve' block of a certificate document."""
    return {
        "iterations": result.iterations,
        "residual": residual,
        "a_priori_bound": result.a_priori_bound,
        "a_posteriori_bound": result.a_posteriori_bound,
        "status": result.status.value,
    }


def matrix_certificate_document(
    n_rows: int,
    n_cols: int,
    nnz: int,
    certificate: ContractionCertificate,
    solve: dict | None = None,
) -> CertificateDocument:
    return CertificateDocument(
        problem={"rows": n_rows, "cols": n_cols, "nnz": nnz},
        norms=dict(certificate.per_norm_values),
        verdict=certificate.verdict,
        determinant_diagnostic=certificate.determinant_diagnostic,
        solve=solve,
    )
