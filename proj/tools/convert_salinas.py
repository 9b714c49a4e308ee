#!/usr/bin/env python3
"""Convert the Salinas-A .mat files to the flat-binary layout read by `advis`.

    python3 tools/convert_salinas.py SalinasA_corrected.mat SalinasA_gt.mat OUT_DIR

Writes OUT_DIR/salinasA.bin (+ .meta) and OUT_DIR/salinasA_gt.bin (+ .meta).
Ground-truth ids {1, 10, 11, 12, 13, 14} become 1..6 in that order; 0 stays background.
"""
import argparse
import pathlib

import numpy as np
from scipy.io import loadmat


def only_array(path):
    arrays = {k: v for k, v in loadmat(path).items() if not k.startswith("__")}
    if len(arrays) != 1:
        raise SystemExit(f"{path}: expected one variable, found {sorted(arrays)}")
    return next(iter(arrays.values()))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("cube")
    ap.add_argument("gt")
    ap.add_argument("out")
    args = ap.parse_args()

    cube = only_array(args.cube).astype("<f4")  # rows x cols x bands
    gt = only_array(args.gt).astype(np.int64)
    if cube.ndim != 3 or gt.shape != cube.shape[:2]:
        raise SystemExit(f"shape mismatch: cube {cube.shape}, gt {gt.shape}")
    rows, cols, bands = cube.shape

    ids = sorted(int(v) for v in np.unique(gt) if v != 0)
    remap = np.zeros(gt.max() + 1, dtype="<i4")
    for new, old in enumerate(ids, start=1):
        remap[old] = new
    labels = remap[gt]

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    # band-sequential payload
    np.ascontiguousarray(cube.transpose(2, 0, 1)).tofile(out / "salinasA.bin")
    (out / "salinasA.bin.meta").write_text(f"rows: {rows}\ncols: {cols}\nbands: {bands}\ndtype: float32\n")
    labels.astype("<i4").tofile(out / "salinasA_gt.bin")
    (out / "salinasA_gt.bin.meta").write_text(
        f"rows: {rows}\ncols: {cols}\nbands: 1\ndtype: int32\nclasses: {len(ids)}\n"
        f"# original ids: {' '.join(map(str, ids))}\n")
    print(f"{rows}x{cols}x{bands}, {int((labels != 0).sum())} labeled pixels, classes {ids} -> 1..{len(ids)}")


if __name__ == "__main__":
    main()
