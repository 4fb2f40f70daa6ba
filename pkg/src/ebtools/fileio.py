"""Reading and writing the toolkit's tab-separated files and JSON documents.

Numeric output uses Python's shortest round-trip float formatting, so files
written here read back without loss.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DataError
from .zvalues import ExpressionMatrix, ZVector


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _data_lines(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line


def _parse_float(path: Path, lineno: int, column: int, token: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DataError(
            f"{path}: line {lineno}, column {column}: cannot parse {token!r} as a number"
        ) from None
    if not np.isfinite(value):
        raise DataError(f"{path}: line {lineno}, column {column}: non-finite value {token!r}")
    return value


def read_zvector(path) -> ZVector:
    """Read a tab-separated (label, z[, covariate]) file with '#' comments."""
    path = Path(path)
    labels: list[str] = []
    zs: list[float] = []
    covariates: list[float] = []
    n_columns = None
    for lineno, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise DataError(
                f"{path}: line {lineno}: expected 2 or 3 tab-separated columns, "
                f"got {len(fields)}"
            )
        if n_columns is None:
            n_columns = len(fields)
        elif len(fields) != n_columns:
            raise DataError(f"{path}: line {lineno}: inconsistent column count")
        labels.append(fields[0].strip())
        zs.append(_parse_float(path, lineno, 2, fields[1].strip()))
        if n_columns == 3:
            covariates.append(_parse_float(path, lineno, 3, fields[2].strip()))
    if not zs:
        raise DataError(f"{path}: no data rows found")
    return ZVector(
        z=np.asarray(zs),
        labels=labels,
        covariate=np.asarray(covariates) if covariates else None,
    )


def write_zvector(path, z: ZVector, comment: str | None = None):
    path = Path(path)
    lines = []
    if comment:
        lines.append(f"# {comment}")
    for i in range(len(z)):
        fields = [z.label_of(i), _fmt(z.z[i])]
        if z.covariate is not None:
            fields.append(_fmt(z.covariate[i]))
        lines.append("\t".join(fields))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_values(path) -> tuple[list[str], np.ndarray]:
    """Read a one-column value file (optionally labeled: label<TAB>value)."""
    path = Path(path)
    labels: list[str] = []
    values: list[float] = []
    for lineno, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) == 1:
            labels.append(str(len(values) + 1))
            values.append(_parse_float(path, lineno, 1, fields[0].strip()))
        elif len(fields) == 2:
            labels.append(fields[0].strip())
            values.append(_parse_float(path, lineno, 2, fields[1].strip()))
        else:
            raise DataError(
                f"{path}: line {lineno}: expected 1 or 2 tab-separated columns, "
                f"got {len(fields)}"
            )
    if not values:
        raise DataError(f"{path}: no data rows found")
    return labels, np.asarray(values)


def read_group_file(path) -> dict[str, str]:
    """Read (subject ID, group label) pairs, tab-separated."""
    path = Path(path)
    groups: dict[str, str] = {}
    for lineno, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) != 2:
            raise DataError(
                f"{path}: line {lineno}: expected 2 tab-separated columns, got {len(fields)}"
            )
        subject, group = fields[0].strip(), fields[1].strip()
        if subject in groups:
            raise DataError(f"{path}: line {lineno}: duplicate subject {subject!r}")
        groups[subject] = group
    if not groups:
        raise DataError(f"{path}: no data rows found")
    return groups


def read_matrix(matrix_path, group_path, treatment: str | None = None) -> ExpressionMatrix:
    """Read a tab-separated expression matrix plus its subject-group file.

    The matrix has one header row of subject IDs (an optional leading corner
    cell is tolerated) and one row per case: label followed by values. The
    group file assigns each subject one of exactly two labels; `treatment`
    names the treatment-side label and may be omitted when one label is
    literally 'control'.
    """
    matrix_path = Path(matrix_path)
    groups = read_group_file(group_path)

    rows = list(_data_lines(matrix_path))
    if len(rows) < 2:
        raise DataError(f"{matrix_path}: need a header row and at least one data row")
    header_lineno, header = rows[0]
    subject_ids = [f.strip() for f in header.split("\t")]

    first_data = rows[1][1].split("\t")
    if len(subject_ids) == len(first_data):
        subject_ids = subject_ids[1:]  # leading corner cell above the label column
    elif len(subject_ids) != len(first_data) - 1:
        raise DataError(
            f"{matrix_path}: line {header_lineno}: header has {len(subject_ids)} subject IDs "
            f"but data rows have {len(first_data) - 1} value columns"
        )
    if not subject_ids:
        raise DataError(f"{matrix_path}: header row has no subject IDs")

    labels: list[str] = []
    values: list[list[float]] = []
    for lineno, line in rows[1:]:
        fields = line.split("\t")
        if len(fields) != len(subject_ids) + 1:
            raise DataError(
                f"{matrix_path}: line {lineno}: expected {len(subject_ids) + 1} columns, "
                f"got {len(fields)}"
            )
        labels.append(fields[0].strip())
        values.append(
            [_parse_float(matrix_path, lineno, c + 2, f.strip()) for c, f in enumerate(fields[1:])]
        )

    missing = [s for s in subject_ids if s not in groups]
    if missing:
        raise DataError(f"group file lacks subject(s): {', '.join(missing[:5])}")
    group_labels = [groups[s] for s in subject_ids]
    distinct = sorted(set(group_labels))
    if len(distinct) != 2:
        raise DataError(f"need exactly 2 group labels, got {distinct}")
    if treatment is None:
        lowered = [d.lower() for d in distinct]
        if "control" in lowered:
            treatment = distinct[1 - lowered.index("control")]
        else:
            raise DataError(
                f"ambiguous group labels {distinct}; name the treatment group explicitly"
            )
    if treatment not in distinct:
        raise DataError(f"treatment label {treatment!r} not among group labels {distinct}")

    return ExpressionMatrix(
        values=np.asarray(values),
        row_labels=labels,
        is_treatment=np.asarray([g == treatment for g in group_labels]),
    )


def write_table(path, header: list[str], rows):
    """Write a tab-separated table with a header row."""
    path = Path(path)
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path, payload: dict):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
