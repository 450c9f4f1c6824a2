#!/usr/bin/env python3
"""Fetch MovieLens 100k and lay it out as u.data / u.item under data/ml-100k.

Tries the GroupLens archive first. When that is unreachable, falls back to the
copy bundled in the RecBole wheel (atomic-file layout) and converts it.
"""
import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

GROUPLENS_URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
GENRES = [
    "unknown", "Action", "Adventure", "Animation", "Children's", "Comedy", "Crime",
    "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror", "Musical", "Mystery",
    "Romance", "Sci-Fi", "Thriller", "War", "Western",
]


def from_grouplens(out: pathlib.Path) -> bool:
    try:
        blob = urllib.request.urlopen(GROUPLENS_URL, timeout=20).read()
    except Exception as exc:  # noqa: BLE001
        print(f"grouplens unavailable: {exc}", file=sys.stderr)
        return False
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        for name in ("u.data", "u.item"):
            (out / name).write_bytes(zf.read(f"ml-100k/{name}"))
    return True


def convert_atomic(inter: str, item: str, out: pathlib.Path) -> None:
    rows = inter.splitlines()[1:]
    with open(out / "u.data", "w", encoding="latin-1", newline="\n") as f:
        for line in rows:
            if not line.strip():
                continue
            u, i, r, t = line.split("\t")
            f.write(f"{int(u)}\t{int(i)}\t{int(float(r))}\t{int(float(t))}\n")
    items = {}
    for line in item.splitlines()[1:]:
        if not line.strip():
            continue
        cols = line.split("\t")
        iid = int(cols[0])
        title = cols[1] if len(cols) > 1 else ""
        year = cols[2] if len(cols) > 2 else ""
        tags = set(cols[3].split()) if len(cols) > 3 else set()
        items[iid] = (title, year, tags)
    n = max(items)
    with open(out / "u.item", "w", encoding="latin-1", newline="\n") as f:
        for iid in range(1, n + 1):
            title, year, tags = items.get(iid, ("", "", set()))
            flags = "|".join("1" if g in tags else "0" for g in GENRES)
            f.write(f"{iid}|{title.replace('|', ' ')}|{year}|||{flags}\n")


def from_recbole(out: pathlib.Path, wheel: str | None) -> None:
    with tempfile.TemporaryDirectory() as tmp:
        if wheel is None:
            subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-q",
                            "-d", tmp, "RecBole"], check=True)
            wheel = str(next(pathlib.Path(tmp).glob("*.whl")))
        with zipfile.ZipFile(wheel) as zf:
            base = "recbole/dataset_example/ml-100k/"
            inter = zf.read(base + "ml-100k.inter").decode("latin-1")
            item = zf.read(base + "ml-100k.item").decode("latin-1")
    convert_atomic(inter, item, out)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "ml-100k"))
    ap.add_argument("--wheel", help="use a local RecBole wheel instead of downloading")
    ap.add_argument("--no-grouplens", action="store_true")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.no_grouplens or args.wheel or not from_grouplens(out):
        from_recbole(out, args.wheel)
    n = sum(1 for _ in open(out / "u.data", encoding="latin-1"))
    m = sum(1 for _ in open(out / "u.item", encoding="latin-1"))
    print(f"wrote {out}: {n} ratings, {m} items")
    return 0


if __name__ == "__main__":
    sys.exit(main())
