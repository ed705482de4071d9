#!/usr/bin/env python3
"""
Matrix, mask and image file handling.
Reads and writes dense matrices as CSV (empty or NaN fields mark missing
entries), observation masks as "i,j" CSV, grayscale images as PGM, and
singular-value spectra; also generates seeded square-block corruption masks.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from PIL import Image

from .core import ObservationSet, apply_mask, as_matrix, check_shape, singular_values

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
FORMATS = ("csv", "pgm")
PGM_MAGIC = (b"P2", b"P5")
MASK_SUFFIX = ".mask.csv"


class MatrixFormatError(ValueError):
    """Malformed file contents; line and column are 1-based when known."""

    def __init__(self, message: str, path: Optional[PathLike] = None,
                 line: Optional[int] = None, column: Optional[int] = None):
        self.path = None if path is None else str(path)
        self.line = line
        self.column = column
        where = []
        if self.path:
            where.append(self.path)
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass(frozen=True, eq=False)
class MaskedMatrixFile:
    """A matrix with its observed entries; unobserved positions hold 0."""
    matrix: np.ndarray
    omega: ObservationSet

    def __post_init__(self):
        check_shape(self.matrix.shape, self.omega.shape, "matrix and observation set")


def _check_path(path: PathLike) -> Path:
    if path is None or str(path) == "":
        raise ValueError("Output path must not be empty")
    return Path(path)


def _format_value(value: float) -> str:
    return format(float(value), ".17g")


def _parse_field(text: str, path, line: int, column: int) -> Optional[float]:
    token = text.strip()
    if token == "" or token.lower() == "nan":
        return None
    try:
        value = float(token)
    except ValueError:
        raise MatrixFormatError(f"cannot parse '{token}' as a number", path, line, column) from None
    if not np.isfinite(value):
        raise MatrixFormatError(f"non-finite value '{token}'", path, line, column)
    return value


def read_matrix_csv(path: PathLike) -> MaskedMatrixFile:
    """Read a comma-separated grid; empty fields and NaN become unobserved entries."""
    rows: List[List[Optional[float]]] = []
    width = None
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        for fields in reader:
            if not fields:
                continue
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise MatrixFormatError(f"expected {width} fields, found {len(fields)}", path, reader.line_num)
            rows.append([_parse_field(text, path, reader.line_num, col)
                         for col, text in enumerate(fields, start=1)])
    if not rows:
        raise MatrixFormatError("file contains no rows", path)

    mask = np.array([[value is not None for value in row] for row in rows], dtype=bool)
    matrix = np.array([[0.0 if value is None else value for value in row] for row in rows], dtype=np.float64)
    omega = ObservationSet(matrix.shape[0], matrix.shape[1], mask)
    logger.debug(f"[IO] Read {matrix.shape[0]}x{matrix.shape[1]} matrix from {path}, {len(omega)} observed")
    return MaskedMatrixFile(matrix=matrix, omega=omega)


def write_matrix_csv(path: PathLike, m, omega: Optional[ObservationSet] = None) -> None:
    """Write m with 17 significant digits; entries outside omega become empty fields."""
    target = _check_path(path)
    m = as_matrix(m)
    if omega is not None:
        check_shape(m.shape, omega.shape, "matrix and observation set")
    with open(target, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        for i, row in enumerate(m):
            writer.writerow(["" if omega is not None and not omega.mask[i, j] else _format_value(v)
                             for j, v in enumerate(row)])
    logger.debug(f"[IO] Wrote {m.shape[0]}x{m.shape[1]} matrix to {target}")


def read_mask_csv(path: PathLike, rows: int, cols: int) -> ObservationSet:
    """Read 0-based "i,j" pairs, one per line."""
    mask = np.zeros((rows, cols), dtype=bool)
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        for fields in reader:
            if not fields or all(not text.strip() for text in fields):
                continue
            line = reader.line_num
            if len(fields) != 2:
                raise MatrixFormatError(f"expected 'i,j', found {len(fields)} fields", path, line)
            try:
                i, j = (int(text.strip()) for text in fields)
            except ValueError:
                raise MatrixFormatError(f"cannot parse index pair '{','.join(fields)}'", path, line) from None
            if not (0 <= i < rows and 0 <= j < cols):
                raise MatrixFormatError(f"index ({i}, {j}) outside {rows}x{cols} matrix", path, line)
            if mask[i, j]:
                raise MatrixFormatError(f"duplicate index ({i}, {j})", path, line)
            mask[i, j] = True
    return ObservationSet(rows, cols, mask)


def write_mask_csv(path: PathLike, omega: ObservationSet) -> None:
    target = _check_path(path)
    with open(target, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerows(omega.indices())


def is_pgm(path: PathLike) -> bool:
    """Sniff the PGM magic number."""
    with open(path, "rb") as f:
        return f.read(2) in PGM_MAGIC


def read_pgm(path: PathLike) -> np.ndarray:
    """Read an 8-bit P2 or P5 image; pixel (i, j) becomes entry (i, j) in [0, 255]."""
    with open(path, "rb") as f:
        magic = f.read(2)
    if magic not in PGM_MAGIC:
        raise MatrixFormatError(f"not a PGM file (magic {magic!r})", path)
    try:
        with Image.open(path) as img:
            if img.mode != "L":
                raise MatrixFormatError(f"unsupported PGM depth (mode {img.mode}), only maxval <= 255", path)
            img.load()
            pixels = np.asarray(img, dtype=np.float64)
    except MatrixFormatError:
        raise
    except (OSError, ValueError, SyntaxError) as e:
        raise MatrixFormatError(f"truncated or corrupt PGM payload ({e})", path) from e
    logger.debug(f"[IO] Read {pixels.shape[0]}x{pixels.shape[1]} PGM from {path}")
    return pixels


def write_pgm(path: PathLike, m, clamp: bool = True) -> None:
    """Write a binary P5 image, rounding entries and clamping them to [0, 255]."""
    target = _check_path(path)
    m = as_matrix(m)
    pixels = np.rint(m)
    if clamp:
        pixels = np.clip(pixels, 0, 255)
    elif pixels.min() < 0 or pixels.max() > 255:
        raise ValueError(f"Pixel values outside [0, 255]: range [{m.min():.6g}, {m.max():.6g}]")
    Image.fromarray(pixels.astype(np.uint8)).save(target, format="PPM")
    logger.debug(f"[IO] Wrote {m.shape[0]}x{m.shape[1]} PGM to {target}")


def corrupt_squares(m, square: int, fraction: float, seed: int) -> ObservationSet:
    """Remove square x square blocks at uniform random corners until `fraction` is missing.

    Blocks may overlap. Corners come from numpy's default_rng(seed), row then
    column per block, so the result depends only on shape, square, fraction and seed.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    if isinstance(square, bool) or not isinstance(square, (int, np.integer)) or square < 1:
        raise ValueError(f"Square side must be a positive integer, got {square!r}")
    if square > rows or square > cols:
        raise ValueError(f"Square side {square} exceeds matrix dimensions {rows}x{cols}")
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"Corruption fraction must lie in (0, 1), got {fraction!r}")

    rng = np.random.default_rng(seed)
    mask = np.ones((rows, cols), dtype=bool)
    target = fraction * rows * cols
    missing = 0
    while missing < target:
        i = int(rng.integers(0, rows - square + 1))
        j = int(rng.integers(0, cols - square + 1))
        mask[i:i + square, j:j + square] = False
        missing = rows * cols - int(mask.sum())
    logger.debug(f"[IO] Removed {missing} of {rows * cols} entries with {square}x{square} squares (seed={seed})")
    return ObservationSet(rows, cols, mask)


def write_spectrum_csv(path: PathLike, m) -> int:
    """Write "index,value" per singular value, nonincreasing; returns the count."""
    target = _check_path(path)
    sigma = singular_values(m)
    with open(target, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerows((i, _format_value(value)) for i, value in enumerate(sigma))
    return int(sigma.size)


def load_input(path: PathLike, fmt: Optional[str] = None, mask: Optional[PathLike] = None) -> MaskedMatrixFile:
    """Load a CSV or PGM input, detected by magic number unless fmt is given.

    A mask file further restricts the observed set to its intersection with
    the entries present in the input.
    """
    if fmt is not None and fmt not in FORMATS:
        raise ValueError(f"Unknown format '{fmt}', expected one of {', '.join(FORMATS)}")
    if fmt is None:
        fmt = "pgm" if is_pgm(path) else "csv"
    if fmt == "pgm":
        pixels = read_pgm(path)
        loaded = MaskedMatrixFile(matrix=pixels, omega=ObservationSet.full(*pixels.shape))
    else:
        loaded = read_matrix_csv(path)

    if mask is None:
        return loaded
    omega = loaded.omega.intersect(read_mask_csv(mask, *loaded.matrix.shape))
    logger.debug(f"[IO] Mask {mask} leaves {len(omega)} observed entries")
    return MaskedMatrixFile(matrix=apply_mask(loaded.matrix, omega), omega=omega)


def output_format(path: PathLike, fmt: Optional[str] = None) -> str:
    """Explicit fmt wins, then a .pgm suffix, else csv."""
    if fmt is not None:
        if fmt not in FORMATS:
            raise ValueError(f"Unknown format '{fmt}', expected one of {', '.join(FORMATS)}")
        return fmt
    return "pgm" if Path(path).suffix.lower() == ".pgm" else "csv"


def mask_sidecar_path(path: PathLike) -> Path:
    return Path(f"{path}{MASK_SUFFIX}")


def write_matrix(path: PathLike, m, fmt: str, omega: Optional[ObservationSet] = None) -> List[Path]:
    """Write m as CSV (holes as empty fields) or PGM (holes zeroed, mask in a sidecar file)."""
    target = _check_path(path)
    if fmt == "csv":
        write_matrix_csv(target, m, omega)
        return [target]
    if fmt != "pgm":
        raise ValueError(f"Unknown format '{fmt}', expected one of {', '.join(FORMATS)}")
    if omega is None:
        write_pgm(target, m)
        return [target]
    write_pgm(target, apply_mask(m, omega))
    sidecar = mask_sidecar_path(target)
    write_mask_csv(sidecar, omega)
    return [target, sidecar]
