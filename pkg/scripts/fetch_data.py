#!/usr/bin/env python3
"""Check the vendored datasets, or fetch the canonical UCI files.

The files under ``data/`` were converted from copies of the UCI tables
redistributed in PyPI packages (see README). They keep the UCI column
layouts and class counts, but were never byte-compared against the UCI
originals, so the digests below are those of the vendored files.

* ``wdbc.data``: the record-id column holds row numbers 1..569 instead of
  the original patient ids. Loaders ignore that column.
* ``pima-indians-diabetes.csv``: rows of the ARFF copy, without header,
  labels mapped tested_negative -> 0 and tested_positive -> 1.

Usage::

    python scripts/fetch_data.py             # verify vendored digests and counts
    python scripts/fetch_data.py --fetch DIR # download UCI originals into DIR
"""

import argparse
import hashlib
import sys
import urllib.request
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

FILES = {
    "wdbc.data": {
        "url": "https://archive.ics.uci.edu/ml/machine-learning-databases/breast-cancer-wisconsin/wdbc.data",
        "sha256": "a906fc5c0c27c1ff5abb84df814dd29743c24a7eedd6cac902d2b68a171cf41d",
        "rows": 569,
    },
    "pima-indians-diabetes.csv": {
        "url": "https://raw.githubusercontent.com/jbrownlee/Datasets/master/pima-indians-diabetes.data.csv",
        "sha256": "33e704cdafa8769a75728e4658dcce5bc1da1ce36174603687fe545f46e39394",
        "rows": 768,
    },
}


def sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def verify(data_dir):
    ok = True
    for name, meta in FILES.items():
        path = data_dir / name
        digest = sha256(path)
        rows = sum(1 for line in path.read_text().splitlines() if line.strip())
        good = digest == meta["sha256"] and rows == meta["rows"]
        ok &= good
        print(f"{'ok ' if good else 'BAD'} {name} rows={rows} sha256={digest}")
    return ok


def fetch(dest):
    dest.mkdir(parents=True, exist_ok=True)
    for name, meta in FILES.items():
        target = dest / name
        print(f"fetching {meta['url']}")
        urllib.request.urlretrieve(meta["url"], target)
        print(f"  {target} sha256={sha256(target)}")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--fetch", type=Path, metavar="DIR", help="download the UCI originals into DIR")
    args = p.parse_args(argv)
    if args.fetch:
        fetch(args.fetch)
        return 0
    return 0 if verify(ROOT / "data") else 1


if __name__ == "__main__":
    sys.exit(main())
