#!/usr/bin/env python3
"""Convert the AG News CSV release (class index, title, description) to JSONL.

    make_agnews_sample.py train.csv --out data/agnews_train.jsonl
    make_agnews_sample.py train.csv --sample 500 --out data/agnews_sample.jsonl

Text is "title description"; labels use the four AG News class names. The
sample is stratified (equal share per class) with a fixed seed.
"""

import argparse
import csv
import json
import random
import sys

CLASSES = {"1": "World", "2": "Sports", "3": "Business", "4": "Sci/Tech"}


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.reader(f):
            if len(row) < 3 or row[0] not in CLASSES:
                continue
            text = (row[1].strip() + " " + row[2].strip()).replace("\\", " ").strip()
            if text:
                yield {"text": text, "label": CLASSES[row[0]]}


def stratified(rows, n, seed):
    rng = random.Random(seed)
    by_class = {}
    for r in rows:
        by_class.setdefault(r["label"], []).append(r)
    labels = sorted(by_class)
    share, extra = divmod(n, len(labels))
    out = []
    for i, label in enumerate(labels):
        pool = by_class[label]
        take = share + (1 if i < extra else 0)
        if take > len(pool):
            sys.exit(f"class {label} has only {len(pool)} rows")
        out.extend(rng.sample(pool, take))
    rng.shuffle(out)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("--out", required=True)
    ap.add_argument("--sample", type=int, default=0, help="stratified sample size (0 = all rows)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rows = list(read_rows(args.csv))
    if args.sample:
        rows = stratified(rows, args.sample, args.seed)
    with open(args.out, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
    print(f"wrote {len(rows)} documents to {args.out}")


if __name__ == "__main__":
    main()
