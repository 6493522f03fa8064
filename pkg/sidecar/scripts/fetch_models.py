#!/usr/bin/env python3
"""Fetch pretrained scorer checkpoints (never vendored into the repo).

Downloads the MOS and speaker-embedding ONNX models from their upstream
sources and pins them: the SHA-256 of each file is recorded in models.lock.json
next to the destination on first fetch and verified on every later fetch, so
a silent upstream change fails loudly. Pass --expected-sha256 to pin ahead of
the first download when you already know the digest.

Default sources (override with --url when upstreams move):

  mos        the DNS-Challenge repository's DNSMOS overall-quality model
  embedding  a wespeaker speaker-verification ONNX export

Usage:
    python scripts/fetch_models.py --dest models/
    python scripts/fetch_models.py --dest models/ --only mos \
        --url https://example.com/mirror/sig_bak_ovr.onnx
"""

import argparse
import hashlib
import json
import os
import sys
import urllib.request

DEFAULT_URLS = {
    "mos": ("https://github.com/microsoft/DNS-Challenge/raw/master/"
            "DNSMOS/DNSMOS/sig_bak_ovr.onnx"),
    "embedding": ("https://wespeaker-1256283475.cos.ap-shanghai.myqcloud.com/"
                  "models/voxceleb/voxceleb_resnet34.onnx"),
}
FILENAMES = {"mos": "mos.onnx", "embedding": "embedding.onnx"}


def sha256_of(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dest", required=True, help="directory for model files")
    ap.add_argument("--only", choices=sorted(DEFAULT_URLS), action="append",
                    help="fetch a subset (repeatable); default: everything")
    ap.add_argument("--url", action="append", default=[],
                    metavar="NAME=URL", help="override a source url")
    ap.add_argument("--expected-sha256", action="append", default=[],
                    metavar="NAME=HEX", help="pin a digest before first fetch")
    args = ap.parse_args(argv)

    urls = dict(DEFAULT_URLS)
    for spec in args.url:
        name, url = spec.split("=", 1)
        urls[name] = url
    expected = {}
    for spec in args.expected_sha256:
        name, digest = spec.split("=", 1)
        expected[name] = digest.lower()

    os.makedirs(args.dest, exist_ok=True)
    lock_path = os.path.join(args.dest, "models.lock.json")
    lock = {}
    if os.path.exists(lock_path):
        with open(lock_path, encoding="utf-8") as fh:
            lock = json.load(fh)

    names = args.only or sorted(DEFAULT_URLS)
    for name in names:
        target = os.path.join(args.dest, FILENAMES[name])
        print(f"fetching {name} from {urls[name]}", file=sys.stderr)
        tmp = target + ".part"
        urllib.request.urlretrieve(urls[name], tmp)
        digest = sha256_of(tmp)

        pinned = expected.get(name) or lock.get(name, {}).get("sha256")
        if pinned and digest != pinned:
            os.remove(tmp)
            raise SystemExit(f"{name}: digest {digest} does not match pinned {pinned}")
        os.replace(tmp, target)
        lock[name] = {"url": urls[name], "sha256": digest}
        print(f"  {target}  sha256={digest}", file=sys.stderr)

    with open(lock_path, "w", encoding="utf-8") as fh:
        json.dump(lock, fh, indent=1)
        fh.write("\n")
    print(f"lock file: {lock_path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
