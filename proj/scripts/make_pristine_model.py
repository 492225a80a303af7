#!/usr/bin/env python3
# Copyright 2026 The twostepqa Authors
# SPDX-License-Identifier: Apache-2.0
"""Builds data/niqe_pristine.model from the photographs in tests/data.

Each photograph except the held-out ones is cut into 256x256 crops on a
3x3 grid (start, middle and end offsets per axis) plus their mirror images.
The crops are written to a scratch directory and passed to `twostepqa
train-niqe`.
"""

import argparse
import pathlib
import subprocess
import sys
import tempfile

from PIL import Image

HELD_OUT = {"coffee"}
SIDE = 256


def offsets(extent: int) -> list[int]:
    step = (extent - SIDE) // 2
    if step == 0:
        return [0]
    return list(range(0, extent - SIDE + 1, step))


def write_crops(photo_dir: pathlib.Path, out_dir: pathlib.Path) -> int:
    count = 0
    for photo in sorted(photo_dir.glob("*.png")):
        if photo.stem in HELD_OUT:
            continue
        img = Image.open(photo).convert("L")
        for y in offsets(img.height):
            for x in offsets(img.width):
                crop = img.crop((x, y, x + SIDE, y + SIDE))
                stem = f"{photo.stem}_{y:03d}_{x:03d}"
                crop.save(out_dir / f"{stem}.png")
                crop.transpose(Image.Transpose.FLIP_LEFT_RIGHT).save(out_dir / f"{stem}_m.png")
                count += 2
    return count


def main() -> int:
    root = pathlib.Path(__file__).resolve().parent.parent
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--tool", default=str(root / "build" / "tools" / "twostepqa"))
    parser.add_argument("--photos", default=str(root / "tests" / "data"))
    parser.add_argument("--out", default=str(root / "data" / "niqe_pristine.model"))
    args = parser.parse_args()
    with tempfile.TemporaryDirectory() as scratch:
        n = write_crops(pathlib.Path(args.photos), pathlib.Path(scratch))
        print(f"{n} crops", file=sys.stderr)
        return subprocess.call([args.tool, "train-niqe", scratch, args.out])


if __name__ == "__main__":
    sys.exit(main())
