"""Image ingestion, grayscale conversion, block partitioning and 2-D DCT.

Everything downstream consumes :class:`GrayImage`: a validated 2-D array of
luminance values in [0, 255]. Color inputs are reduced with BT.601 weights.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dctn, idctn

__all__ = [
    "GrayImage",
    "BlockGrid",
    "ImageFormatError",
    "load_image",
    "write_pgm",
    "partition_blocks",
    "dct2",
    "idct2",
]

# ITU-R BT.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])


class ImageFormatError(ValueError):
    """Raised for unsupported or malformed image formats."""


@dataclass(frozen=True)
class GrayImage:
    """A single-channel image; values are real-valued luminance in [0, 255]."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("pixel values must be finite")
        if arr.min() < 0.0 or arr.max() > 255.0:
            raise ValueError("pixel values must lie in [0, 255]")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


@dataclass(frozen=True)
class BlockGrid:
    """Non-overlapping b x b tiles anchored at (0, 0), in row-major scan order.

    Trailing rows/columns that do not fill a whole block are discarded.
    """

    block_size: int
    blocks: tuple = field(repr=False)
    origins: tuple

    def __len__(self):
        return len(self.blocks)


def _parse_pgm(data: bytes) -> np.ndarray:
    """Parse P2 (ASCII) or P5 (binary) PGM bytes, maxval up to 255."""

    def tokens(buf):
        # Header tokens are whitespace separated; '#' starts a comment line.
        i = 0
        while i < len(buf):
            c = buf[i : i + 1]
            if c.isspace():
                i += 1
            elif c == b"#":
                j = buf.find(b"\n", i)
                i = len(buf) if j < 0 else j + 1
            else:
                j = i
                while j < len(buf) and not buf[j : j + 1].isspace():
                    j += 1
                yield i, buf[i:j]
                i = j

    it = tokens(data)
    try:
        _, magic = next(it)
    except StopIteration:
        raise ImageFormatError("empty PGM file") from None
    if magic not in (b"P2", b"P5"):
        raise ImageFormatError(f"unsupported PGM magic {magic!r}")
    try:
        _, w = next(it)
        _, h = next(it)
        pos, maxtok = next(it)
        width, height, maxval = int(w), int(h), int(maxtok)
    except (StopIteration, ValueError):
        raise ImageFormatError("malformed PGM header") from None
    if width < 1 or height < 1:
        raise ImageFormatError("non-positive PGM dimensions")
    if not 0 < maxval <= 255:
        raise ImageFormatError(f"unsupported PGM bit depth (maxval={maxval})")

    n = width * height
    if magic == b"P5":
        start = pos + len(maxtok) + 1  # single whitespace byte after maxval
        raster = data[start : start + n]
        if len(raster) < n:
            raise OSError("truncated PGM raster")
        vals = np.frombuffer(raster, dtype=np.uint8, count=n).astype(np.float64)
    else:
        vals = np.empty(n, dtype=np.float64)
        k = 0
        for _, tok in it:
            if k >= n:
                break
            try:
                vals[k] = int(tok)
            except ValueError:
                raise ImageFormatError(f"bad PGM sample {tok!r}") from None
            k += 1
        if k < n:
            raise OSError("truncated PGM raster")
    if vals.max() > maxval:
        raise ImageFormatError("PGM sample exceeds declared maxval")
    return vals.reshape(height, width)


def _load_png(path) -> np.ndarray:
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "P":
                im = im.convert("RGBA" if "transparency" in im.info else "RGB")
                mode = im.mode
            if mode == "1":
                im = im.convert("L")
                mode = "L"
            if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                raise ImageFormatError(f"unsupported bit depth (PNG mode {mode})")
            arr = np.asarray(im, dtype=np.float64)
    except UnidentifiedImageError as exc:
        raise ImageFormatError(str(exc)) from exc
    if mode == "L":
        return arr
    if mode == "LA":
        return arr[:, :, 0]
    if mode in ("RGB", "RGBA"):
        return arr[:, :, :3] @ _LUMA
    raise ImageFormatError(f"unsupported PNG mode {mode}")


def load_image(path) -> GrayImage:
    """Read a PGM (P2/P5) or 8-bit PNG file as a GrayImage.

    Color inputs are converted with BT.601 weights (0.299 R + 0.587 G +
    0.114 B), kept as real numbers without rounding.
    """
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head[:2] in (b"P2", b"P5"):
        with open(path, "rb") as fh:
            return GrayImage(_parse_pgm(fh.read()))
    if head == b"\x89PNG\r\n\x1a\n":
        return GrayImage(_load_png(path))
    raise ImageFormatError(f"unsupported image format in {path}")


def write_pgm(img: GrayImage, path) -> None:
    """Debug dump as binary PGM (values rounded to uint8)."""
    arr = np.clip(np.rint(img.pixels), 0, 255).astype(np.uint8)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.tobytes())


def partition_blocks(img: GrayImage, b: int) -> BlockGrid:
    """Tile the image with b x b blocks; remainder rows/columns are dropped."""
    if b < 2:
        raise ValueError(f"block size must be >= 2, got {b}")
    h, w = img.height, img.width
    if b > min(h, w):
        raise ValueError(f"block size {b} exceeds image dimensions {h}x{w}")
    px = img.pixels
    blocks = []
    origins = []
    for r in range(0, h - b + 1, b):
        for c in range(0, w - b + 1, b):
            blocks.append(px[r : r + b, c : c + b])
            origins.append((r, c))
    return BlockGrid(block_size=b, blocks=tuple(blocks), origins=tuple(origins))


def dct2(block: np.ndarray) -> np.ndarray:
    """Orthonormal type-II 2-D DCT of a square block."""
    block = np.asarray(block, dtype=np.float64)
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise ValueError(f"expected a square block, got shape {block.shape}")
    if not np.all(np.isfinite(block)):
        raise ValueError("block values must be finite")
    return dctn(block, type=2, norm="ortho")


def idct2(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dct2`."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    return idctn(coeffs, type=2, norm="ortho")
