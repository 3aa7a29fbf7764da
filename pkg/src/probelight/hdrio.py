"""HDR and LDR image file I/O.

PFM is the canonical HDR format: identifier ``PF`` (colour) or ``Pf``
(greyscale), dimensions, then a scale line whose sign encodes endianness
(negative = little endian).  Scanlines are stored bottom-up, so arrays are
flipped on read/write; in memory row 0 is always the top row.  Radiance RGBE
(``.hdr``) files are accepted on read only.  LDR images are 8-bit PNG with no
implicit transfer curve (gamma is always handled explicitly by the caller).
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
from PIL import Image

from .envmap import EnvMap
from .errors import InputError


# ---------------------------------------------------------------------------
# PFM
# ---------------------------------------------------------------------------

def _read_pfm_token(f) -> bytes:
    """Read one whitespace-delimited header token."""
    token = b""
    while True:
        c = f.read(1)
        if not c:
            raise InputError("unexpected end of PFM header")
        if c in b" \t\r\n":
            if token:
                return token
            continue
        token += c


def _open_binary(path):
    try:
        return open(path, "rb")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc}") from exc


def read_pfm(path) -> np.ndarray:
    """Load a PFM file as a float64 array of shape (h, w) or (h, w, 3)."""
    path = Path(path)
    with _open_binary(path) as f:
        ident = _read_pfm_token(f)
        if ident == b"PF":
            channels = 3
        elif ident == b"Pf":
            channels = 1
        else:
            raise InputError(f"{path}: not a PFM file (identifier {ident!r})")
        try:
            width = int(_read_pfm_token(f))
            height = int(_read_pfm_token(f))
            scale = float(_read_pfm_token(f))
        except ValueError as exc:
            raise InputError(f"{path}: malformed PFM header") from exc
        if width <= 0 or height <= 0 or scale == 0.0 or not np.isfinite(scale):
            raise InputError(f"{path}: invalid PFM dimensions or scale")
        dtype = "<f4" if scale < 0 else ">f4"
        count = width * height * channels
        raw = np.fromfile(f, dtype=dtype, count=count)
        if raw.size != count:
            raise InputError(f"{path}: truncated PFM payload")
    data = raw.astype(np.float64).reshape(height, width, channels)[::-1]
    if abs(scale) != 1.0:
        data = data * abs(scale)
    return data[:, :, 0] if channels == 1 else data


def write_pfm(path, data: np.ndarray) -> None:
    """Write a (h, w) or (h, w, 3) array as little-endian float32 PFM."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 2:
        ident = b"Pf"
        payload = arr[::-1]
    elif arr.ndim == 3 and arr.shape[2] == 3:
        ident = b"PF"
        payload = arr[::-1]
    else:
        raise InputError(f"cannot write array of shape {arr.shape} as PFM")
    if not np.isfinite(arr).all():
        raise InputError("refusing to write non-finite values to PFM")
    h, w = arr.shape[:2]
    with open(path, "wb") as f:
        f.write(ident + b"\n")
        f.write(f"{w} {h}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(np.ascontiguousarray(payload, dtype="<f4").tobytes())


# ---------------------------------------------------------------------------
# Radiance RGBE (.hdr), read only
# ---------------------------------------------------------------------------

def read_rgbe(path) -> np.ndarray:
    """Load a Radiance RGBE file as linear float64 RGB of shape (h, w, 3)."""
    path = Path(path)
    with _open_binary(path) as f:
        magic = f.readline().strip()
        if not magic.startswith(b"#?"):
            raise InputError(f"{path}: missing Radiance magic line")
        while True:
            line = f.readline()
            if not line:
                raise InputError(f"{path}: unexpected end of RGBE header")
            if line.strip() == b"":
                break
        res = f.readline().decode("ascii", errors="replace").strip()
        match = re.fullmatch(r"-Y (\d+) \+X (\d+)", res)
        if not match:
            raise InputError(f"{path}: unsupported RGBE orientation {res!r}")
        height, width = int(match.group(1)), int(match.group(2))
        rgbe = np.empty((height, width, 4), dtype=np.uint8)
        for y in range(height):
            rgbe[y] = _read_rgbe_scanline(f, width, path)
    return _rgbe_to_float(rgbe)


def _read_rgbe_scanline(f, width: int, path) -> np.ndarray:
    head = f.read(4)
    if len(head) != 4:
        raise InputError(f"{path}: truncated RGBE scanline")
    if head[0] == 2 and head[1] == 2 and (head[2] << 8 | head[3]) == width:
        # adaptive RLE: four separately run-length coded channel planes
        row = np.empty((4, width), dtype=np.uint8)
        for ch in range(4):
            pos = 0
            while pos < width:
                count = f.read(1)
                if not count:
                    raise InputError(f"{path}: truncated RLE data")
                n = count[0]
                if n > 128:
                    run = n - 128
                    value = f.read(1)
                    if not value:
                        raise InputError(f"{path}: truncated RLE run")
                    row[ch, pos:pos + run] = value[0]
                    pos += run
                else:
                    literal = f.read(n)
                    if len(literal) != n:
                        raise InputError(f"{path}: truncated RLE literal")
                    row[ch, pos:pos + n] = np.frombuffer(literal, dtype=np.uint8)
                    pos += n
            if pos != width:
                raise InputError(f"{path}: RLE scanline overrun")
        return row.T
    # flat scanline: the 4 bytes already read are the first pixel
    rest = f.read(4 * (width - 1))
    if len(rest) != 4 * (width - 1):
        raise InputError(f"{path}: truncated flat RGBE scanline")
    return np.frombuffer(head + rest, dtype=np.uint8).reshape(width, 4)


def _rgbe_to_float(rgbe: np.ndarray) -> np.ndarray:
    exponent = rgbe[:, :, 3].astype(np.int32)
    scale = np.where(exponent > 0, np.ldexp(1.0, exponent - 136), 0.0)
    return rgbe[:, :, :3].astype(np.float64) * scale[:, :, None]


# ---------------------------------------------------------------------------
# Environment map helpers
# ---------------------------------------------------------------------------

def read_envmap(path) -> EnvMap:
    """Load a 2:1 HDR panorama from a .pfm or .hdr file.

    Maps containing negative values are flagged as difference images rather
    than rejected.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pfm":
        data = read_pfm(path)
        if data.ndim == 2:
            data = np.repeat(data[:, :, None], 3, axis=2)
    elif suffix == ".hdr":
        data = read_rgbe(path)
    else:
        raise InputError(f"{path}: unsupported environment map format {suffix!r}")
    return EnvMap(data, allow_negative=bool((data < 0).any()))


def write_envmap(path, env: EnvMap) -> None:
    write_pfm(path, env.data)


# ---------------------------------------------------------------------------
# PNG
# ---------------------------------------------------------------------------

def write_png(path, image01: np.ndarray) -> None:
    """Write a [0, 1] image (greyscale or RGB) as an 8-bit PNG."""
    arr = np.asarray(image01, dtype=np.float64)
    if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
        raise InputError(f"cannot write array of shape {arr.shape} as PNG")
    quantised = np.round(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    mode = "L" if arr.ndim == 2 else "RGB"
    Image.fromarray(quantised, mode=mode).save(path, format="PNG")


def read_png(path) -> np.ndarray:
    """Read an 8-bit PNG back to float64 in [0, 1], shape (h, w) or (h, w, 3)."""
    try:
        with Image.open(path) as img:
            if img.mode in ("L", "I;16", "I"):
                converted = img.convert("L")
            else:
                converted = img.convert("RGB")
            arr = np.asarray(converted, dtype=np.float64)
    except (OSError, SyntaxError) as exc:
        raise InputError(f"{path}: cannot read PNG ({exc})") from exc
    return arr / 255.0


def write_mask_png(path, mask: np.ndarray) -> None:
    write_png(path, np.asarray(mask, dtype=bool).astype(np.float64))


def read_mask_png(path) -> np.ndarray:
    arr = read_png(path)
    if arr.ndim == 3:
        arr = arr.mean(axis=2)
    return arr > 0.5
