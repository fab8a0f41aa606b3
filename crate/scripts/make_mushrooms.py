#!/usr/bin/env python3
"""Convert the UCI agaricus-lepiota table into LIBSVM "mushrooms" layout.

Each nominal attribute is expanded into one binary feature per observed
value. The stalk-root attribute (column 11) carries missing values and is
dropped, which leaves 112 features over 8124 rows. Labels: edible -> 1,
poisonous -> 2.

usage: make_mushrooms.py agaricus-lepiota.data > data/mushrooms
"""
import sys

STALK_ROOT = 11


def main(path):
    rows = [line.strip().split(",") for line in open(path) if line.strip()]
    columns = [c for c in range(1, len(rows[0])) if c != STALK_ROOT]
    index = {}
    for c in columns:
        for value in sorted({r[c] for r in rows}):
            index[(c, value)] = len(index) + 1
    out = sys.stdout
    for r in rows:
        label = "1" if r[0] == "e" else "2"
        feats = sorted(index[(c, r[c])] for c in columns)
        out.write(label + "".join(" %d:1" % i for i in feats) + "\n")


if __name__ == "__main__":
    main(sys.argv[1])
