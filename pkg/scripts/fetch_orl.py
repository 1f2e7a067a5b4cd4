#!/usr/bin/env python3
"""Fetch the ORL (AT&T) face database into a local directory.

The 400 PGM images ship inside the ``nimfa`` wheel on PyPI, which is the
only route that needs nothing beyond a package index. The wheel is
downloaded with pip (no install) and the ``s1``..``s40`` tree extracted.

About 150 of the bundled files went through an LF -> CRLF text conversion
that also hit the binary raster. Those are repaired by undoing the
conversion; where the raster held a genuine CR LF pixel pair the undo is
one byte short, and the CR is restored at whichever candidate position
gives the smoothest image (a misplaced byte shears every row after it).

Usage:
    python scripts/fetch_orl.py [--dest data/orl]
"""

import argparse
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

import numpy as np

WHEEL_SPEC = "nimfa==1.4.0"
PREFIX = "nimfa/datasets/ORL_faces/"
WIDTH, HEIGHT = 92, 112
CLEAN_HEADER = b"P5\n92 112\n255\n"
CRLF_HEADER = b"P5\r\n92 112\r\n255\r\n"


def _roughness(raster: bytes) -> float:
    img = np.frombuffer(raster, dtype=np.uint8).astype(float).reshape(HEIGHT, WIDTH)
    return float(np.abs(np.diff(img, axis=0)).sum())


def repair(data: bytes) -> bytes:
    """Undo CRLF damage on a 92x112 P5 file; clean files pass through."""
    if data.startswith(CLEAN_HEADER):
        return data
    if not data.startswith(CRLF_HEADER):
        raise ValueError("unrecognized ORL header")
    body = data[len(CRLF_HEADER):]
    undone = body.replace(b"\r\n", b"\n")
    missing = WIDTH * HEIGHT - len(undone)
    if missing == 0:
        return CLEAN_HEADER + undone
    if missing != 1:
        raise ValueError(f"cannot repair raster short by {missing} bytes")
    best = None
    pos = body.find(b"\r\n")
    while pos >= 0:
        cand = (body[:pos].replace(b"\r\n", b"\n") + b"\r"
                + body[pos + 1:].replace(b"\r\n", b"\n"))
        score = _roughness(cand)
        if best is None or score < best[0]:
            best = (score, cand)
        pos = body.find(b"\r\n", pos + 1)
    return CLEAN_HEADER + best[1]


def fetch(dest: Path) -> int:
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q",
             "-d", tmp, WHEEL_SPEC],
            check=True,
        )
        wheel = next(Path(tmp).glob("nimfa-*.whl"))
        count = 0
        with zipfile.ZipFile(wheel) as zf:
            for name in zf.namelist():
                if not (name.startswith(PREFIX) and name.endswith(".pgm")):
                    continue
                target = dest / name[len(PREFIX):]
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_bytes(repair(zf.read(name)))
                count += 1
    return count


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default = Path(__file__).resolve().parent.parent / "data" / "orl"
    parser.add_argument("--dest", type=Path, default=default)
    args = parser.parse_args()
    n = fetch(args.dest)
    print(f"extracted {n} images to {args.dest}")
    if n != 400:
        sys.exit(f"expected 400 images, got {n}")


if __name__ == "__main__":
    main()
