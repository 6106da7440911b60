"""Matrix files: a raw little-endian float64 format and a text format.

Both store the elements column-major. See docs/FORMATS.md for the layouts.
"""

from __future__ import annotations

import os

import numpy as np

from .lasso import LassoError, LassoInstance

MAGIC = b"DSMAT\x00\x00\x01"
HEADER = np.dtype([("magic", "S8"), ("rows", "<u8"), ("cols", "<u8")])


class MatrixFileError(Exception):
    code = "io"


class MissingFileError(MatrixFileError):
    code = "missing_file"


class ParseError(MatrixFileError):
    code = "parse"


class ShapeMismatchError(MatrixFileError):
    code = "shape_mismatch"


class NonFiniteError(MatrixFileError):
    code = "non_finite"


class ZeroColumnError(MatrixFileError):
    code = "zero_column"


def save_matrix(path, M, fmt=None):
    """Write ``M`` (a 2-D array, or a 1-D array stored as one column).

    ``fmt`` is ``"raw"`` or ``"text"``; by default ``.txt`` and ``.csv``
    paths get text and everything else raw.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if M.ndim != 2:
        raise ValueError("only vectors and matrices can be saved")
    if fmt is None:
        fmt = "text" if str(path).endswith((".txt", ".csv")) else "raw"
    rows, cols = M.shape
    if fmt == "raw":
        header = np.array([(MAGIC, rows, cols)], dtype=HEADER)
        with open(path, "wb") as fh:
            fh.write(header.tobytes())
            fh.write(M.astype("<f8").tobytes(order="F"))
    elif fmt == "text":
        with open(path, "w") as fh:
            fh.write(f"{rows} {cols}\n")
            for v in M.ravel(order="F"):
                fh.write(f"{float(v)!r}\n")
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")


def _read_raw(data, path):
    if len(data) < HEADER.itemsize:
        raise ParseError(f"{path}: truncated header")
    header = np.frombuffer(data[:HEADER.itemsize], dtype=HEADER)[0]
    rows, cols = int(header["rows"]), int(header["cols"])
    body = data[HEADER.itemsize:]
    if len(body) != 8 * rows * cols:
        raise ShapeMismatchError(
            f"{path}: header declares {rows}x{cols} but holds {len(body) / 8:g} values")
    return np.frombuffer(body, dtype="<f8").reshape((rows, cols), order="F").astype(float)


def _read_text(data, path):
    tokens = [tok for line in data.decode("utf-8", errors="replace").splitlines()
              for tok in line.split("#", 1)[0].split()]
    if len(tokens) < 2:
        raise ParseError(f"{path}: missing 'rows cols' header")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
        values = np.array([float(tok) for tok in tokens[2:]])
    except ValueError as err:
        raise ParseError(f"{path}: {err}") from None
    if rows < 0 or cols < 0:
        raise ParseError(f"{path}: negative dimension")
    if values.size != rows * cols:
        raise ShapeMismatchError(
            f"{path}: header declares {rows}x{cols} but holds {values.size} values")
    return values.reshape((rows, cols), order="F")


def load_matrix(path):
    """Read either format, detected by the magic bytes."""
    if not os.path.isfile(path):
        raise MissingFileError(f"{path}: no such file")
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] == MAGIC:
        M = _read_raw(data, path)
    else:
        M = _read_text(data, path)
    bad = np.argwhere(~np.isfinite(M))
    if bad.size:
        i, j = bad[0]
        raise NonFiniteError(f"{path}: non-finite value at row {i}, column {j}")
    return M


def load_vector(path):
    M = load_matrix(path)
    if 1 not in M.shape:
        raise ShapeMismatchError(f"{path}: expected a vector, got shape {M.shape}")
    return M.ravel()


def load_instance(dict_path, target_path, lambda_ratio) -> LassoInstance:
    B = load_matrix(dict_path)
    x = load_vector(target_path)
    if B.shape[0] != x.size:
        raise ShapeMismatchError(
            f"dictionary has {B.shape[0]} rows but target has length {x.size}")
    zero = np.flatnonzero(~np.any(B != 0, axis=0))
    if zero.size:
        raise ZeroColumnError(f"{dict_path}: column {zero[0]} is zero")
    try:
        return LassoInstance.from_data(B, x, lambda_ratio=lambda_ratio)
    except LassoError as err:
        raise ParseError(str(err)) from None
