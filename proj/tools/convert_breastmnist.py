#!/usr/bin/env python3
# Copyright 2026 The QCBNN Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Converts a BreastMNIST .npz archive into the QBNNDATA binary container.

The archive's train/val/test arrays are concatenated in that order; the
trainer applies its own seeded split. BreastMNIST labels 0 = malignant and
1 = normal/benign, so labels are flipped to make malignant the positive
class (1).
"""

import argparse
import struct
import sys

import numpy as np

MAGIC = b"QBNNDATA"
VERSION = 1


def load_images(npz_path):
    archive = np.load(npz_path)
    images, labels = [], []
    for part in ("train", "val", "test"):
        key_x, key_y = f"{part}_images", f"{part}_labels"
        if key_x not in archive or key_y not in archive:
            raise KeyError(f"{npz_path}: missing arrays {key_x}/{key_y}")
        images.append(np.asarray(archive[key_x]))
        labels.append(np.asarray(archive[key_y]).reshape(-1))
    return np.concatenate(images), np.concatenate(labels)


def write_container(path, images, labels):
    if images.ndim != 3:
        raise ValueError(f"expected grayscale images [n, h, w], got shape {images.shape}")
    if images.dtype != np.uint8:
        if images.min() < 0 or images.max() > 255:
            raise ValueError("pixel values outside [0, 255]")
        images = images.astype(np.uint8)
    n, h, w = images.shape
    if set(np.unique(labels)) - {0, 1}:
        raise ValueError("labels must be binary")
    positive = (1 - labels).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IIII", VERSION, n, h, w))
        f.write(positive.tobytes())
        f.write(np.ascontiguousarray(images).tobytes())
    return n, h, w, float(positive.mean())


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("npz", help="breastmnist.npz")
    parser.add_argument("out", help="output .bin path")
    args = parser.parse_args(argv)
    images, labels = load_images(args.npz)
    n, h, w, frac = write_container(args.out, images, labels)
    print(f"wrote {n} images of {h}x{w} to {args.out}; malignant fraction {frac:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
