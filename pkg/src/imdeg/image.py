"""Image representation, file I/O and seeded random streams.

Images are ``float64`` arrays of shape (H, W, 3) with samples in [0, 1].
Conversion to 8 bit happens only when reading or writing files.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import PIL
from PIL import Image as PILImage
from PIL import features

__all__ = [
    "ImageFormatError",
    "RngStream",
    "as_image",
    "codec_version",
    "draw_gaussian",
    "image_digest",
    "load_image",
    "quantize8",
    "save_image",
    "stream_key",
]

SUPPORTED_FORMATS = {"PNG": "png", "JPEG": "jpeg"}


class ImageFormatError(ValueError):
    """Raised for files that are not PNG or JPEG, or malformed image arrays."""


def as_image(data, copy=False):
    """Validate ``data`` as an (H, W, 3) image in [0, 1] and return it as float64."""
    arr = np.array(data, dtype=np.float64, copy=copy) if copy else np.asarray(data, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ImageFormatError(f"expected an (H, W, 3) array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ImageFormatError(f"image must be at least 1x1, got {arr.shape[1]}x{arr.shape[0]}")
    return arr


def freeze(arr):
    arr.setflags(write=False)
    return arr


def quantize8(img):
    """Round [0, 1] samples to the nearest 8-bit code (as uint8)."""
    return np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def from_uint8(arr):
    return np.asarray(arr, dtype=np.float64) / 255.0


def load_image(path):
    """Read a PNG or JPEG file into a float image.

    Grayscale inputs are replicated to three channels and alpha is dropped.
    """
    path = Path(path)
    with PILImage.open(path) as im:
        if im.format not in SUPPORTED_FORMATS:
            raise ImageFormatError(f"{path}: unsupported format {im.format!r} (PNG or JPEG only)")
        rgb = im.convert("RGB")
        return freeze(from_uint8(np.asarray(rgb)))


def encode_image(img, fmt="png", quality=95):
    """Encode to PNG or JPEG bytes."""
    img = as_image(img)
    pil = PILImage.fromarray(quantize8(img), mode="RGB")
    buf = io.BytesIO()
    fmt = fmt.lower()
    if fmt == "png":
        pil.save(buf, format="PNG", optimize=False, compress_level=6)
    elif fmt in ("jpeg", "jpg"):
        if not 1 <= int(quality) <= 100:
            raise ValueError(f"JPEG quality must be in 1..100, got {quality}")
        pil.save(buf, format="JPEG", quality=int(quality), subsampling=0 if quality >= 90 else 2)
    else:
        raise ImageFormatError(f"unsupported output format {fmt!r}")
    return buf.getvalue()


def save_image(img, path, fmt="png", quality=95):
    """Write ``img`` as PNG (lossless at 8 bit) or baseline JPEG."""
    data = encode_image(img, fmt=fmt, quality=quality)
    Path(path).write_bytes(data)


def decode_image(data):
    with PILImage.open(io.BytesIO(data)) as im:
        return from_uint8(np.asarray(im.convert("RGB")))


def image_digest(images):
    """SHA-256 over the raw float64 bytes and shapes of an ordered image set."""
    h = hashlib.sha256()
    for img in images:
        arr = np.ascontiguousarray(img, dtype=np.float64)
        h.update(repr(arr.shape).encode())
        h.update(arr.tobytes())
    return h.hexdigest()


def codec_version():
    return f"Pillow {PIL.__version__}; libjpeg {features.version('jpg')}"


def stream_key(image_id):
    """Fold an image identifier (str or int) into a 64-bit integer."""
    if isinstance(image_id, (int, np.integer)):
        return int(image_id) & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.blake2b(str(image_id).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed by (seed, image id, chain position).

    Backed by the Philox4x64 bit generator; the key is derived from the three
    identifiers through ``SeedSequence`` so that streams are independent and
    each call to :meth:`generator` restarts the same sequence.
    """

    seed: int
    image_id: object = 0
    position: int = 0

    def key(self):
        ss = np.random.SeedSequence(
            entropy=int(self.seed) & 0xFFFFFFFFFFFFFFFF,
            spawn_key=(stream_key(self.image_id), int(self.position) & 0xFFFFFFFF),
        )
        return ss.generate_state(2, dtype=np.uint64)

    def generator(self):
        return np.random.Generator(np.random.Philox(key=self.key()))


def draw_gaussian(rng, n):
    """``n`` standard-normal samples from the start of ``rng``'s stream."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return rng.generator().standard_normal(int(n))
