"""Artifact output: CSV/JSON writers, portable graymaps, atomic staging.

All files of one run are staged in a hidden directory and moved into the
output directory only after every artifact has been produced, so a failed run
leaves nothing behind in the output root.

Graymap convention (documented interface): 8-bit binary PGM, pixel value
``255 - round(255 * clip(v, 0, 1))`` so that a matrix entry of 1.0 renders
black and 0.0 renders white; each matrix cell is upscaled to a square block.
"""
from __future__ import annotations

import csv
import json
import os
import shutil
import uuid
from pathlib import Path

import numpy as np

__all__ = ["ArtifactWriter", "write_csv", "write_json", "pgm_bytes",
           "write_pgm", "montage_matrix"]


class ArtifactWriter:
    """Stage files under ``<out_dir>/.staging-*`` and commit atomically."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.staging = self.out_dir / f".staging-{uuid.uuid4().hex[:12]}"
        self.staging.mkdir()
        self._names: list[str] = []

    def path(self, name: str) -> Path:
        self._names.append(name)
        return self.staging / name

    def commit(self) -> list[Path]:
        final = []
        for name in self._names:
            src = self.staging / name
            dst = self.out_dir / name
            os.replace(src, dst)
            final.append(dst)
        shutil.rmtree(self.staging, ignore_errors=True)
        return final

    def abort(self) -> None:
        shutil.rmtree(self.staging, ignore_errors=True)

    def __enter__(self) -> "ArtifactWriter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is None:
            self.commit()
        else:
            self.abort()


def write_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow(row)


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def pgm_bytes(matrix: np.ndarray, cell: int = 48, pad: int = 0,
              pad_value: int = 255) -> bytes:
    """Render a value matrix (0..1) to binary PGM with block upscaling."""
    m = np.clip(np.asarray(matrix, dtype=float), 0.0, 1.0)
    pix = (255 - np.round(255 * m)).astype(np.uint8)
    pix = np.kron(pix, np.ones((cell, cell), dtype=np.uint8))
    if pad:
        pix = np.pad(pix, pad, constant_values=np.uint8(pad_value))
    header = f"P5\n{pix.shape[1]} {pix.shape[0]}\n255\n".encode()
    return header + pix.tobytes()


def write_pgm(path, matrix: np.ndarray, cell: int = 48) -> None:
    Path(path).write_bytes(pgm_bytes(matrix, cell=cell))


def montage_matrix(matrices, columns: int = 6, pad_cells: int = 1) -> np.ndarray:
    """Tile value matrices into one grid matrix (white padding between tiles)."""
    mats = [np.clip(np.asarray(m, dtype=float), 0.0, 1.0) for m in matrices]
    if not mats:
        raise ValueError("nothing to tile")
    n = mats[0].shape[0]
    rows = (len(mats) + columns - 1) // columns
    height = rows * n + (rows + 1) * pad_cells
    width = columns * n + (columns + 1) * pad_cells
    grid = np.zeros((height, width))
    for i, m in enumerate(mats):
        r, c = divmod(i, columns)
        y = pad_cells + r * (n + pad_cells)
        x = pad_cells + c * (n + pad_cells)
        grid[y:y + n, x:x + n] = m
    return grid
