#!/usr/bin/env python3
"""Build an MNIST-format subset from the digit files of the npm `mnist` package.

The package ships 10,000 real MNIST digits as src/digits/<d>.json, each a
{"data": [...]} list of 784-value images scaled to [0, 1]. They are shuffled
with a fixed seed, split into train and test parts, and written as standard
IDX files so the library loads them exactly like the original distribution.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/make_mnist_subset.py package data/mnist-subset
"""

import argparse
import json
import random
import struct
from pathlib import Path

PIXELS = 28 * 28


def read_digits(package: Path):
    examples = []
    for digit in range(10):
        path = package / "src" / "digits" / f"{digit}.json"
        flat = json.loads(path.read_text())["data"]
        if len(flat) % PIXELS:
            raise SystemExit(f"{path}: length {len(flat)} is not a multiple of {PIXELS}")
        for k in range(0, len(flat), PIXELS):
            pixels = bytes(min(255, max(0, round(v * 255))) for v in flat[k : k + PIXELS])
            examples.append((pixels, digit))
    return examples


def write_idx(images_path: Path, labels_path: Path, examples):
    with images_path.open("wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(examples), 28, 28))
        for pixels, _ in examples:
            f.write(pixels)
    with labels_path.open("wb") as f:
        f.write(struct.pack(">II", 0x801, len(examples)))
        f.write(bytes(label for _, label in examples))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("package", type=Path, help="unpacked npm mnist package")
    parser.add_argument("out", type=Path, help="output directory")
    parser.add_argument("--train", type=int, default=6000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    examples = read_digits(args.package)
    random.Random(args.seed).shuffle(examples)
    if not 0 < args.train < len(examples):
        raise SystemExit(f"--train must lie in (0, {len(examples)})")
    train, test = examples[: args.train], examples[args.train :]

    args.out.mkdir(parents=True, exist_ok=True)
    write_idx(args.out / "train-images-idx3-ubyte", args.out / "train-labels-idx1-ubyte", train)
    write_idx(args.out / "t10k-images-idx3-ubyte", args.out / "t10k-labels-idx1-ubyte", test)
    print(f"wrote {len(train)} train and {len(test)} test examples to {args.out}")


if __name__ == "__main__":
    main()
