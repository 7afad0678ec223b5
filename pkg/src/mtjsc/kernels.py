"""Unipolar stochastic-computing kernels and a Roberts-cross edge detector.

Streams carry their bits on the last axis, so a ``BitStream`` whose bits have
shape ``(H, W, L)`` is an image of ``H*W`` streams of length ``L`` and every
kernel works on it elementwise.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod


class LengthMismatch(ValueError):
    pass


class UncorrelatedStreams(ValueError):
    pass


@dataclass(frozen=True)
class BitStream:
    bits: np.ndarray
    tag: str | None = None  # shared-source label; equal tags mean correlated encodes

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.dtype != np.bool_:
            if not np.isin(bits, (0, 1)).all():
                raise ValueError("bit streams hold only 0/1 values")
            bits = bits.astype(np.bool_)
        if bits.ndim == 0 or bits.shape[-1] < 1:
            raise ValueError("bit stream length must be >= 1")
        object.__setattr__(self, "bits", bits)

    @property
    def length(self) -> int:
        return self.bits.shape[-1]

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, idx) -> "BitStream":
        """Index the stream axes (not the bit axis)."""
        if not isinstance(idx, tuple):
            idx = (idx,)
        return BitStream(self.bits[idx + (Ellipsis, slice(None))], self.tag)

    def decode(self):
        out = self.bits.mean(axis=-1)
        return float(out) if np.ndim(out) == 0 else out

    def ones(self):
        return self.bits.sum(axis=-1)


@dataclass(frozen=True)
class CorrelationTag:
    """Names a shared uniform source; every encode under it reuses the same draws."""

    name: str
    seed: int = rngmod.DEFAULT_SEED

    def uniforms(self, length: int) -> np.ndarray:
        return rngmod.uniforms(self.seed, "sng", self.name, n=length)


@dataclass(frozen=True)
class PixelGrid:
    pixels: np.ndarray  # (height, width), row-major, values in [0, 1]

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float)
        if px.ndim != 2 or px.size == 0:
            raise ValueError("pixel grid must be a non-empty 2-D array")
        if not np.isfinite(px).all() or px.min() < 0 or px.max() > 1:
            raise ValueError("pixel intensities must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def _check_prob(p, what="probability"):
    p = np.asarray(p, dtype=float)
    if not np.isfinite(p).all() or p.min() < 0 or p.max() > 1:
        raise ValueError(f"{what} must lie in [0, 1]")
    return p


def _same_length(*streams: BitStream):
    lengths = {s.length for s in streams}
    if len(lengths) != 1:
        raise LengthMismatch(f"stream lengths differ: {sorted(lengths)}")


def encode_probability(p, length: int, rng: np.random.Generator | None = None,
                       correlated_with: CorrelationTag | None = None) -> BitStream:
    """Comparator-style encoder: bit_i = 1 iff u_i < p.

    With ``correlated_with`` the uniforms come from the tag's shared source
    and ``rng`` is ignored; otherwise they are drawn from ``rng``. ``p`` may
    be an array, giving one stream per element.
    """
    p = _check_prob(p)
    if length < 1:
        raise ValueError("length must be >= 1")
    if correlated_with is not None:
        u = correlated_with.uniforms(length)
        tag = correlated_with.name
    else:
        if rng is None:
            raise ValueError("an rng is needed for independent encodes")
        u = rng.random(p.shape + (length,))
        tag = None
    return BitStream(u < p[..., None], tag)


def and_multiply(a: BitStream, b: BitStream) -> BitStream:
    _same_length(a, b)
    return BitStream(a.bits & b.bits)


def abs_diff(a: BitStream, b: BitStream) -> BitStream:
    """|p(a) - p(b)| as XOR of maximally correlated streams."""
    _same_length(a, b)
    if a.tag is None or a.tag != b.tag:
        raise UncorrelatedStreams(
            "abs_diff needs streams encoded from the same source "
            f"(tags {a.tag!r} and {b.tag!r}); XOR of independent streams gives p+q-2pq"
        )
    return BitStream(a.bits ^ b.bits)


def scaled_add(a: BitStream, b: BitStream, select: BitStream) -> BitStream:
    """MUX adder: a where select is 1, else b. Decodes to (p(a)+p(b))/2 for p(select)=0.5."""
    _same_length(a, b, select)
    return BitStream(np.where(select.bits, a.bits, b.bits))


def inject_errors_stochastic(stream: BitStream, rate: float,
                             rng: np.random.Generator) -> BitStream:
    """Flip every bit independently with probability ``rate``."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("error rate must lie in [0, 1]")
    if rate == 0.0:
        return stream
    flips = rng.random(stream.bits.shape) < rate
    return BitStream(stream.bits ^ flips, stream.tag)


def _check_grid(img: PixelGrid):
    if img.height < 2 or img.width < 2:
        raise ValueError("edge detection needs at least a 2x2 image")


def _pad_border(edges: np.ndarray) -> np.ndarray:
    # last row/column copy the nearest valid output
    return np.pad(edges, ((0, 1), (0, 1)), mode="edge")


def roberts_cross_exact(img: PixelGrid) -> PixelGrid:
    _check_grid(img)
    x = img.pixels
    s = 0.5 * (np.abs(x[:-1, :-1] - x[1:, 1:]) + np.abs(x[:-1, 1:] - x[1:, :-1]))
    return PixelGrid(_pad_border(s))


def _pixel_noise(seed: int, key: str, shape: tuple[int, int], rows: range,
                 length: int, p: float) -> np.ndarray:
    """Bernoulli(p) bits for pixels in ``rows``, one substream per pixel index."""
    factory = rngmod.StreamFactory(seed)
    w = shape[1]
    out = np.empty((len(rows), w, length), dtype=np.bool_)
    for ri, r in enumerate(rows):
        for c in range(w):
            out[ri, c] = factory.generator(key, index=r * w + c).random(length) < p
    return out


def roberts_cross_stochastic(img: PixelGrid, stream_len: int = 1000,
                             seed: int = rngmod.DEFAULT_SEED,
                             error_rate: float = 0.0, workers: int = 1) -> PixelGrid:
    """Roberts cross computed on bit streams.

    All pixels are encoded against one shared uniform sequence, so any two of
    them are correlated and XOR yields their absolute difference. Bit errors
    (rate ``error_rate``) hit the encoded pixel streams before the kernel,
    and the two diagonal differences are averaged by a MUX with an
    independent select stream. Each pixel's error and select streams are
    addressed by ``(seed, pixel index)``, so ``workers`` only changes speed.
    """
    _check_grid(img)
    if stream_len < 1:
        raise ValueError("stream_len must be >= 1")
    if not 0.0 <= error_rate <= 1.0:
        raise ValueError("error rate must lie in [0, 1]")
    h, w = img.pixels.shape
    tag = CorrelationTag("pixels", seed)
    enc = encode_probability(img.pixels, stream_len, correlated_with=tag)

    def rows_block(rows: range) -> np.ndarray:
        # output rows `rows` need input rows rows.start .. rows.stop
        in_rows = range(rows.start, rows.stop + 1)
        block = BitStream(enc.bits[in_rows.start:in_rows.stop], tag.name)
        if error_rate > 0:
            flips = _pixel_noise(seed, "errors", (h, w), in_rows, stream_len, error_rate)
            block = BitStream(block.bits ^ flips, tag.name)
        x = block.bits
        d1 = abs_diff(BitStream(x[:-1, :-1], tag.name), BitStream(x[1:, 1:], tag.name))
        d2 = abs_diff(BitStream(x[:-1, 1:], tag.name), BitStream(x[1:, :-1], tag.name))
        sel = BitStream(_pixel_noise(seed, "select", (h, w), rows, stream_len, 0.5)[:, :-1])
        return scaled_add(d1, d2, sel).decode()

    n_out = h - 1
    workers = max(1, int(workers))
    step = max(1, -(-n_out // (4 * workers)))
    chunks = [range(r, min(r + step, n_out)) for r in range(0, n_out, step)]
    if workers == 1:
        parts = [rows_block(c) for c in chunks]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(rows_block, chunks))
    return PixelGrid(_pad_border(np.concatenate(parts, axis=0)))


def quantize(img: PixelGrid, bit_width: int) -> np.ndarray:
    full = (1 << bit_width) - 1
    return np.rint(img.pixels * full).astype(np.int64)


def binary_pipeline_with_errors(img: PixelGrid, bit_width: int = 8, rate: float = 0.0,
                                rng: np.random.Generator | None = None) -> PixelGrid:
    """Fixed-point Roberts cross with independent soft errors on every pixel bit."""
    if not 1 <= bit_width <= 16:
        raise ValueError("bit_width must be in [1, 16]")
    if not 0.0 <= rate <= 1.0:
        raise ValueError("error rate must lie in [0, 1]")
    _check_grid(img)
    full = (1 << bit_width) - 1
    q = quantize(img, bit_width)
    if rate > 0:
        if rng is None:
            raise ValueError("an rng is needed when rate > 0")
        flips = rng.random(q.shape + (bit_width,)) < rate
        q = q ^ (flips * (1 << np.arange(bit_width))).sum(axis=-1)
    return roberts_cross_exact(PixelGrid(q / full))


def mean_abs_error(a: PixelGrid, b: PixelGrid) -> float:
    return float(np.mean(np.abs(a.pixels - b.pixels)))
