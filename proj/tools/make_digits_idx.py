"""Regenerates data/digits-*.idx from scikit-learn's bundled 8x8 digits set.

Pixel intensities 0..16 are rescaled to 0..255. The train/test split is a
fixed permutation (numpy seed 0): the first 300 shuffled examples are the
test set.
"""
import pathlib
import struct

import numpy as np
from sklearn.datasets import load_digits


def write_idx(path, array):
    array = np.ascontiguousarray(array, dtype=np.uint8)
    header = struct.pack(">BBBB", 0, 0, 0x08, array.ndim)
    header += b"".join(struct.pack(">I", d) for d in array.shape)
    path.write_bytes(header + array.tobytes())


def main():
    digits = load_digits()
    images = np.round(digits.images * (255.0 / 16.0)).astype(np.uint8)
    labels = digits.target.astype(np.uint8)
    order = np.random.default_rng(0).permutation(len(labels))
    test, train = order[:300], order[300:]
    out = pathlib.Path(__file__).resolve().parent.parent / "data"
    out.mkdir(exist_ok=True)
    write_idx(out / "digits-train-images.idx3-ubyte", images[train])
    write_idx(out / "digits-train-labels.idx1-ubyte", labels[train])
    write_idx(out / "digits-test-images.idx3-ubyte", images[test])
    write_idx(out / "digits-test-labels.idx1-ubyte", labels[test])


if __name__ == "__main__":
    main()
