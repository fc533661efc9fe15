"""Image and array persistence for the command line tools.

Grayscale PNG (8 or 16 bit) and PGM (ASCII P2 or binary P5) are read into
float64 arrays scaled to [0, 1]. Anything that must survive at full precision
(observations, kernels, scales) is also written as a flat little-endian
float64 ``.bin`` file with a ``.json`` header next to it.

All writers are atomic: data goes to a temporary file in the target
directory which is then renamed over the destination.
"""

import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "SCHEMA_VERSION",
    "atomic_write_bytes",
    "atomic_write_text",
    "write_json",
    "read_image",
    "write_png",
    "write_array",
    "read_array",
    "format_float",
]

SCHEMA_VERSION = 1


def format_float(x):
    """Round-trippable text form of a float (17 significant digits)."""
    return format(float(x), ".17g")


def atomic_write_bytes(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_image(path):
    """Load a grayscale image as float64 in [0, 1], or a raw ``.bin`` array."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".bin":
        return read_array(path)
    # Pillow rescales PGM data of any maxval to 8 or 16 bits
    with Image.open(path) as im:
        if im.mode in ("I;16", "I;16B", "I;16L", "I"):
            arr = np.asarray(im, dtype=np.float64)
            return arr / 65535.0
        if im.mode != "L":
            im = im.convert("L")
        return np.asarray(im, dtype=np.float64) / 255.0


def write_png(path, img, normalize=False):
    """Write a 16-bit grayscale PNG.

    Values are clipped to [0, 1]; with ``normalize`` the image is first
    min-max scaled, which is how kernels and scales are previewed.
    """
    img = np.asarray(img, dtype=np.float64)
    if normalize:
        lo, hi = float(img.min()), float(img.max())
        img = (img - lo) / (hi - lo) if hi > lo else np.zeros_like(img)
    q = np.round(np.clip(img, 0.0, 1.0) * 65535.0).astype(np.uint16)
    buf = io.BytesIO()
    im = Image.fromarray(q)
    im.save(buf, format="PNG")
    atomic_write_bytes(path, buf.getvalue())


def write_array(path, arr):
    """Write ``path`` (.bin, raw float64 LE) and ``path.with_suffix('.json')``."""
    path = Path(path)
    arr = np.ascontiguousarray(arr, dtype="<f8")
    header = {"schema_version": SCHEMA_VERSION, "shape": list(arr.shape), "dtype": "<f8"}
    atomic_write_bytes(path, arr.tobytes())
    write_json(path.with_suffix(".json"), header)


def read_array(path):
    path = Path(path)
    with open(path.with_suffix(".json"), "r", encoding="utf-8") as fh:
        header = json.load(fh)
    data = np.fromfile(path, dtype=header.get("dtype", "<f8"))
    return data.reshape(header["shape"]).astype(np.float64)
