"""Grayscale PGM (P2 ASCII / P5 binary) reading and writing."""

from __future__ import annotations

import os
import re
import tempfile
from pathlib import Path

import numpy as np

from .kernels import PixelGrid


class PgmError(ValueError):
    pass


_TOKEN = re.compile(rb"#[^\n\r]*|\S+")


def parse_pgm(data: bytes) -> PixelGrid:
    """Decode P2 or P5 bytes; intensities are scaled by maxval into [0, 1]."""
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PgmError(f"unsupported format {magic!r}: only P2 and P5 grayscale PGM")
    header: list[int] = []
    pos = 2
    for m in _TOKEN.finditer(data, 2):
        tok = m.group()
        if tok.startswith(b"#"):
            continue
        try:
            header.append(int(tok))
        except ValueError:
            raise PgmError(f"bad header token {tok!r}") from None
        pos = m.end()
        if len(header) == 3:
            break
    if len(header) < 3:
        raise PgmError("truncated header")
    width, height, maxval = header
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise PgmError(f"bad dimensions or maxval: {width}x{height}, maxval {maxval}")
    n = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        raster = data[pos + 1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        if len(raster) < n * dtype.itemsize:
            raise PgmError(f"raster truncated: need {n * dtype.itemsize} bytes")
        vals = np.frombuffer(raster, dtype=dtype, count=n).astype(np.int64)
    else:
        toks = [t for t in _TOKEN.findall(data[pos:]) if not t.startswith(b"#")]
        if len(toks) < n:
            raise PgmError(f"raster truncated: need {n} samples, got {len(toks)}")
        try:
            vals = np.array([int(t) for t in toks[:n]], dtype=np.int64)
        except ValueError:
            raise PgmError("non-integer sample in raster") from None
    if vals.max() > maxval:
        raise PgmError("sample exceeds maxval")
    return PixelGrid(vals.reshape(height, width) / maxval)


def read_pgm(path: str | os.PathLike) -> PixelGrid:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise PgmError(f"{path}: cannot read image: {e.strerror}") from e
    return parse_pgm(data)


def encode_pgm(img: PixelGrid, binary: bool = True) -> bytes:
    vals = np.rint(img.pixels * 255).astype(np.uint8)
    h, w = vals.shape
    if binary:
        return f"P5\n{w} {h}\n255\n".encode() + vals.tobytes()
    lines = [" ".join(str(v) for v in row) for row in vals]
    return (f"P2\n{w} {h}\n255\n" + "\n".join(lines) + "\n").encode()


def atomic_write(path: str | os.PathLike, data: bytes | str):
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_pgm(path: str | os.PathLike, img: PixelGrid, binary: bool = True):
    atomic_write(path, encode_pgm(img, binary))
