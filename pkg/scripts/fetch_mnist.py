#!/usr/bin/env python3
"""Download the MNIST training IDX files into data/mnist/.

Needs outbound network access.  Tries the known mirrors in order and
verifies each file parses before keeping it.
"""

import sys
import urllib.request
from pathlib import Path

MIRRORS = [
    "https://ossci-datasets.s3.amazonaws.com/mnist/",
    "https://storage.googleapis.com/cvdf-datasets/mnist/",
]
FILES = ["train-images-idx3-ubyte.gz", "train-labels-idx1-ubyte.gz"]


def main() -> int:
    dest = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "mnist"
    dest.mkdir(parents=True, exist_ok=True)
    sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
    from bettikit.formats import load_idx

    for name in FILES:
        target = dest / name
        if target.exists():
            print(f"already present: {target}")
            continue
        for mirror in MIRRORS:
            url = mirror + name
            try:
                print(f"fetching {url}")
                urllib.request.urlretrieve(url, target)
                break
            except OSError as exc:
                print(f"  failed: {exc}")
        else:
            print(f"could not download {name} from any mirror", file=sys.stderr)
            return 1
    images, labels = load_idx(dest / FILES[0], dest / FILES[1])
    print(f"ok: {images.shape[0]} images of {images.shape[1]}x{images.shape[2]}, labels {sorted(set(labels.tolist()))}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
