"""Dataset container, CSV ingestion, and design-matrix validation.

CSV format: header row, comma delimiter, UTF-8, LF or CRLF line endings.
The response column must be coded 0/1; predictor cells must parse as
finite reals. Missing or malformed cells are errors, never imputed. The
writer emits LF line endings and 17-significant-digit decimals, so a
written dataset re-reads bit-identically.
"""

import csv
import io
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from .errors import ParseError, SchemaError, ValidationError

INTERCEPT_NAME = "(Intercept)"

# Relative pivot threshold for the rank check.
_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class ColumnSpec:
    """Maps CSV columns onto a response vector and design matrix."""

    response: str
    predictors: tuple
    intercept: bool = True

    def __post_init__(self):
        preds = tuple(self.predictors)
        if self.response in preds:
            raise ValidationError(
                f"response column {self.response!r} also listed as a predictor"
            )
        if len(set(preds)) != len(preds):
            raise ValidationError("predictor names must be unique")
        object.__setattr__(self, "predictors", preds)


@dataclass(frozen=True)
class Dataset:
    """Binary response vector plus design matrix, the unit of fitting.

    ``X`` has one column per coefficient; when ``has_intercept`` the first
    column is all ones. Instances are immutable and safe to share.
    """

    y: np.ndarray
    X: np.ndarray
    column_names: tuple
    has_intercept: bool = True

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=np.int64)
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        if y.ndim != 1 or X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValidationError("y must be (n,), X must be (n, p)")
        if y.shape[0] < 1:
            raise ValidationError("dataset must contain at least one row")
        if not np.all((y == 0) | (y == 1)):
            raise ValidationError("response values must be 0 or 1")
        if not np.all(np.isfinite(X)):
            raise ValidationError("design matrix entries must be finite")
        names = tuple(self.column_names)
        if len(names) != X.shape[1]:
            raise ValidationError("one column name per design-matrix column")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "column_names", names)

    @property
    def n_obs(self):
        return self.y.shape[0]

    @property
    def n_params(self):
        return self.X.shape[1]

    def with_response(self, y):
        """Copy of this dataset with a replacement response vector."""
        return replace(self, y=np.asarray(y))

    def validate_for_fit(self, check_rank=True):
        """Checks required before maximum-likelihood fitting.

        Raises ValidationError when the response is single-class, n < p,
        or (optionally) the design matrix is column-rank deficient.
        """
        n, p = self.X.shape
        if n < p:
            raise ValidationError(f"need at least as many rows ({n}) as columns ({p})")
        ones = int(self.y.sum())
        if ones == 0 or ones == n:
            raise ValidationError(
                "response takes a single value; both classes are required for fitting"
            )
        if check_rank:
            _check_full_rank(self.X, self.column_names)


def _check_full_rank(X, names):
    _, R, piv = linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = diag[0] * max(X.shape) * _RANK_RTOL if diag.size and diag[0] > 0 else 0.0
    rank = int(np.sum(diag > tol))
    if rank < X.shape[1]:
        dependent = sorted(names[j] for j in piv[rank:])
        raise ValidationError(
            "design matrix is rank deficient; collinear columns: "
            + ", ".join(repr(c) for c in dependent)
        )


def read_csv(path, spec):
    """Reads a delimited-text file into a Dataset per the column spec.

    Row numbers in error messages are 1-based over the data rows (the
    header is row 0).
    """
    with open(path, "r", newline="", encoding="utf-8-sig") as fh:
        return _read_csv_stream(fh, spec)


def _read_csv_stream(fh, spec):
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None:
        raise SchemaError("empty file: no header row")
    header = [h.strip() for h in header]
    positions = {}
    for name in (spec.response, *spec.predictors):
        try:
            positions[name] = header.index(name)
        except ValueError:
            raise SchemaError(f"column {name!r} not found in header {header}") from None

    y_rows = []
    x_rows = []
    for i, row in enumerate(reader, start=1):
        if len(row) != len(header):
            raise ParseError(
                f"row {i}: expected {len(header)} fields, got {len(row)}"
            )
        cell = row[positions[spec.response]].strip()
        if cell == "0":
            y_rows.append(0)
        elif cell == "1":
            y_rows.append(1)
        else:
            raise ParseError(
                f"row {i}: response value {cell!r} is not 0 or 1"
            )
        vals = []
        for name in spec.predictors:
            cell = row[positions[name]].strip()
            if cell == "":
                raise ParseError(f"row {i}, column {name!r}: empty cell")
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(
                    f"row {i}, column {name!r}: cannot parse {cell!r} as a number"
                ) from None
            if not np.isfinite(v):
                raise ParseError(f"row {i}, column {name!r}: value is not finite")
            vals.append(v)
        x_rows.append(vals)

    if not y_rows:
        raise SchemaError("no data rows after the header")

    y = np.array(y_rows, dtype=np.int64)
    X = np.array(x_rows, dtype=np.float64).reshape(len(y_rows), len(spec.predictors))
    names = list(spec.predictors)
    if spec.intercept:
        X = np.column_stack([np.ones(len(y_rows)), X]) if X.size else np.ones((len(y_rows), 1))
        names = [INTERCEPT_NAME] + names
    if X.shape[1] == 0:
        raise ValidationError("no predictors and no intercept requested")
    return Dataset(y=y, X=X, column_names=tuple(names), has_intercept=spec.intercept)


def write_csv(data, destination, response_name="y"):
    """Writes the dataset as CSV: response column first, then predictors.

    The intercept column is not written (it is re-created on read when the
    column spec requests one). Floats are rendered with 17 significant
    digits so the round trip is bit-exact.
    """
    start = 1 if data.has_intercept else 0
    names = data.column_names[start:]
    cols = data.X[:, start:]

    def _emit(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([response_name, *names])
        for i in range(data.n_obs):
            writer.writerow(
                [int(data.y[i])] + [format(v, ".17g") for v in cols[i]]
            )

    if isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__"):
        with open(destination, "w", newline="", encoding="utf-8") as fh:
            _emit(fh)
    else:
        _emit(destination)


def to_csv_text(data, response_name="y"):
    """CSV rendering of the dataset as a string (writer format)."""
    buf = io.StringIO()
    write_csv(data, buf, response_name=response_name)
    return buf.getvalue()
