"""Fetch the MSTCC benchmark instances used by the acceptance suite.

Downloads a source archive (or scans a local directory), keeps every file the
instance parser accepts, and stores the ones whose identifiers we need under
``data/instances/<id>.txt``. Identifiers are matched on the file name; the
``z|V|-|E|-|C|`` family is also recognised from the parsed sizes.

    python scripts/fetch_benchmarks.py                  # default archives
    python scripts/fetch_benchmarks.py --from-dir DIR   # local copy
    python scripts/fetch_benchmarks.py --url URL        # any .tar.gz / .zip
"""

from __future__ import annotations

import argparse
import io
import re
import sys
import tarfile
import tempfile
import urllib.request
import zipfile
from pathlib import Path

from ctbound.instance import InstanceError, parse_instance, write_instance

ROOT = Path(__file__).resolve().parents[1]
DEFAULT_URLS = [
    "https://github.com/phillippesamer/stable-trees-ld-davol/archive/refs/heads/main.tar.gz",
    "https://github.com/phillippesamer/stable-trees-ld-davol/archive/refs/heads/master.tar.gz",
]
WANTED = [f"25_60_18_{i}" for i in (1, 7, 13, 19, 25)] + [
    f"z50-200-{c}" for c in (199, 398, 597, 995)
]


def _key(name: str) -> str:
    return re.sub(r"[^0-9a-z]+", "_", name.lower()).strip("_")


def _match_name(stem: str) -> str | None:
    k = _key(stem)
    for want in WANTED:
        wk = _key(want)
        if k == wk or k.endswith("_" + wk) or re.fullmatch(rf"(.*_)?{re.escape(wk)}(_.*)?", k):
            return want
    return None


def _match_sizes(inst) -> str | None:
    name = f"z{inst.n_vertices}-{inst.n_edges}-{len(inst.conflicts)}"
    return name if name in WANTED else None


def _download(url: str, into: Path) -> bool:
    try:
        with urllib.request.urlopen(url, timeout=60) as resp:
            blob = resp.read()
    except OSError as exc:
        print(f"  {url}: {exc}", file=sys.stderr)
        return False
    if url.endswith(".zip"):
        zipfile.ZipFile(io.BytesIO(blob)).extractall(into)
    else:
        with tarfile.open(fileobj=io.BytesIO(blob), mode="r:*") as tar:
            tar.extractall(into, filter="data")
    return True


def harvest(root: Path, dest: Path) -> dict[str, Path]:
    found: dict[str, Path] = {}
    for path in sorted(p for p in root.rglob("*") if p.is_file() and p.stat().st_size < 50_000_000):
        try:
            inst = parse_instance(path.read_text(errors="strict"), "auto", name=path.stem)
        except (InstanceError, UnicodeDecodeError, ValueError):
            continue
        ident = _match_name(path.stem) or _match_sizes(inst)
        if ident is None or ident in found:
            continue
        out = dest / f"{ident}.txt"
        out.write_text(write_instance(inst))
        found[ident] = out
    return found


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dest", type=Path, default=ROOT / "data" / "instances")
    ap.add_argument("--url", action="append", help="archive URL (repeatable)")
    ap.add_argument("--from-dir", type=Path, help="scan a local directory instead of downloading")
    ns = ap.parse_args(argv)
    ns.dest.mkdir(parents=True, exist_ok=True)
    found: dict[str, Path] = {}
    if ns.from_dir:
        found.update(harvest(ns.from_dir, ns.dest))
    else:
        for url in ns.url or DEFAULT_URLS:
            with tempfile.TemporaryDirectory() as tmp:
                if _download(url, Path(tmp)):
                    found.update({k: v for k, v in harvest(Path(tmp), ns.dest).items() if k not in found})
            if len(found) == len(WANTED):
                break
    for ident in WANTED:
        print(f"{ident:14s} {'ok ' + str(found[ident]) if ident in found else 'missing'}")
    return 0 if len(found) == len(WANTED) else 1


if __name__ == "__main__":
    sys.exit(main())
