"""Rebuild data/fashion-mnist/fashion3-*.gz from the ``fashion-mnist`` npm package.

The npm tarball ships every fashion-MNIST image (train and test, 7000 per
class) as JSON under ``src/clothes/<class>.json``. This script downloads it
with ``npm pack``, keeps the dress (3), sneaker (7) and bag (8) classes in
that order and writes a gzip-compressed IDX pair with a zero mtime, so the
output is byte-reproducible.

Usage: python scripts/fetch_fashion_mnist.py [--out data/fashion-mnist]
"""
from __future__ import annotations

import argparse
import json
import subprocess
import tarfile
import tempfile
from pathlib import Path

import numpy as np

from mpsgrok.datasets import RawImageSet, write_idx

PACKAGE = "fashion-mnist@1.1.0"
CLASSES = (3, 7, 8)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data" / "fashion-mnist"))
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(["npm", "pack", PACKAGE], cwd=tmp, check=True, capture_output=True)
        tarball = next(Path(tmp).glob("fashion-mnist-*.tgz"))
        images, labels = [], []
        with tarfile.open(tarball) as tar:
            for code in CLASSES:
                member = tar.extractfile(f"package/src/clothes/{code}.json")
                data = np.asarray(json.load(member)["data"], dtype=np.uint8)
                images.append(data.reshape(-1, 28, 28))
                labels.append(np.full(len(data), code, dtype=np.uint8))
    raw = RawImageSet(np.concatenate(images), np.concatenate(labels))
    write_idx(raw, out / "fashion3-images-idx3-ubyte.gz", out / "fashion3-labels-idx1-ubyte.gz")
    print(f"wrote {len(raw.labels)} images to {out}")


if __name__ == "__main__":
    main()
