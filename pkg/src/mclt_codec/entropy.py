"""Adaptive range coder and ideal (sample-entropy) bit accounting.

The coder is the byte-oriented carry-propagating design popularised by
LZMA, generalised to frequency tables. Two byte-level trims keep frame
payloads short: the always-zero leading byte is dropped, and trailing zero
bytes are dropped because the decoder reads zeros past the end.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

TOP = 1 << 24
MASK32 = 0xFFFFFFFF
MAX_UNIFORM_BITS = 16


class EntropyDecodeError(ValueError):
    pass


class AdaptiveModel:
    """Frequency table over ``n_symbols`` symbols that learns as it codes."""

    def __init__(self, n_symbols: int, increment: int = 24, limit: int = 1 << 16):
        if n_symbols < 1:
            raise ValueError("a model needs at least one symbol")
        self.n_symbols = n_symbols
        self.increment = increment
        self.limit = limit
        self.freqs = [1] * n_symbols
        self.total = n_symbols

    def interval(self, symbol: int):
        if not 0 <= symbol < self.n_symbols:
            raise ValueError(f"symbol {symbol} outside alphabet of {self.n_symbols}")
        start = sum(self.freqs[:symbol])
        return start, self.freqs[symbol], self.total

    def find(self, value: int):
        start = 0
        for symbol, freq in enumerate(self.freqs):
            if value < start + freq:
                return symbol, start, freq
            start += freq
        raise EntropyDecodeError("target frequency outside the model")

    def cost(self, symbol: int) -> float:
        """Ideal code length of ``symbol`` in bits under the current counts."""
        return float(np.log2(self.total / self.freqs[symbol]))

    def copy(self) -> "AdaptiveModel":
        other = AdaptiveModel.__new__(AdaptiveModel)
        other.n_symbols, other.increment, other.limit = self.n_symbols, self.increment, self.limit
        other.freqs, other.total = list(self.freqs), self.total
        return other

    def update(self, symbol: int) -> None:
        self.freqs[symbol] += self.increment
        self.total += self.increment
        if self.total > self.limit:
            self.freqs = [(f + 1) // 2 for f in self.freqs]
            self.total = sum(self.freqs)


class RangeEncoder:
    def __init__(self):
        self.low = 0
        self.range = MASK32
        self._cache = 0
        self._cache_size = 1
        self._out = bytearray()
        self.symbols = 0

    def _shift_low(self) -> None:
        if (self.low & MASK32) < 0xFF000000 or self.low > MASK32:
            carry = self.low >> 32
            temp = self._cache
            while True:
                self._out.append((temp + carry) & 0xFF)
                temp = 0xFF
                self._cache_size -= 1
                if self._cache_size == 0:
                    break
            self._cache = (self.low >> 24) & 0xFF
        self._cache_size += 1
        self.low = (self.low << 8) & MASK32

    def encode_interval(self, start: int, size: int, total: int) -> None:
        r = self.range // total
        self.low += start * r
        self.range = size * r
        while self.range < TOP:
            self.range <<= 8
            self._shift_low()
        self.symbols += 1

    def encode(self, model: AdaptiveModel, symbol: int) -> None:
        self.encode_interval(*model.interval(symbol))
        model.update(symbol)

    def encode_uniform(self, value: int, bits: int) -> None:
        while bits > MAX_UNIFORM_BITS:
            bits -= MAX_UNIFORM_BITS
            self.encode_interval((value >> bits) & ((1 << MAX_UNIFORM_BITS) - 1), 1,
                                 1 << MAX_UNIFORM_BITS)
        if bits:
            self.encode_interval(value & ((1 << bits) - 1), 1, 1 << bits)

    def encode_exp_golomb(self, value: int) -> None:
        if value < 0:
            raise ValueError("Exp-Golomb values must be non-negative")
        k = (value + 1).bit_length() - 1
        for _ in range(k):
            self.encode_uniform(0, 1)
        self.encode_uniform(1, 1)
        self.encode_uniform((value + 1) - (1 << k), k)

    def finish(self) -> bytes:
        hi = self.low + self.range
        for shift in (32, 24, 16, 8, 0):
            mask = (1 << shift) - 1
            candidate = (self.low + mask) & ~mask
            if candidate < hi:
                self.low = candidate
                break
        for _ in range(5):
            self._shift_low()
        out = bytes(self._out[1:])
        return out.rstrip(b"\x00")


class RangeDecoder:
    def __init__(self, data: bytes, context: str = ""):
        self._data = data
        self._pos = 0
        self.context = context
        self.range = MASK32
        self.code = 0
        for _ in range(4):
            self.code = (self.code << 8) | self._next_byte()
        self._r = 0

    def _next_byte(self) -> int:
        if self._pos < len(self._data):
            byte = self._data[self._pos]
        else:
            byte = 0
        self._pos += 1
        return byte

    def _target(self, total: int) -> int:
        self._r = self.range // total
        value = self.code // self._r
        if value >= total:
            raise EntropyDecodeError(f"{self.context}corrupt range-coded data")
        return value

    def _consume(self, start: int, size: int) -> None:
        self.code -= start * self._r
        self.range = size * self._r
        while self.range < TOP:
            self.code = ((self.code << 8) | self._next_byte()) & MASK32
            self.range <<= 8

    def decode(self, model: AdaptiveModel) -> int:
        symbol, start, size = model.find(self._target(model.total))
        self._consume(start, size)
        model.update(symbol)
        return symbol

    def decode_uniform(self, bits: int) -> int:
        value = 0
        while bits > 0:
            step = min(bits, MAX_UNIFORM_BITS)
            part = self._target(1 << step)
            self._consume(part, 1)
            value = (value << step) | part
            bits -= step
        return value

    def decode_exp_golomb(self) -> int:
        k = 0
        while self.decode_uniform(1) == 0:
            k += 1
            if k > 40:
                raise EntropyDecodeError(f"{self.context}runaway Exp-Golomb prefix")
        return (1 << k) + self.decode_uniform(k) - 1


def exp_golomb_bits(value: int) -> int:
    return 2 * ((value + 1).bit_length() - 1) + 1


def range_encode(symbols, model: AdaptiveModel) -> bytes:
    enc = RangeEncoder()
    for s in symbols:
        enc.encode(model, int(s))
    return enc.finish()


def range_decode(data: bytes, model: AdaptiveModel, count: int) -> list:
    dec = RangeDecoder(data)
    return [dec.decode(model) for _ in range(count)]


def shannon_bits(symbols) -> float:
    """Empirical entropy of a symbol sequence times its length."""
    counts = np.array(list(Counter(symbols).values()), dtype=np.float64)
    if counts.size == 0:
        return 0.0
    total = counts.sum()
    return float(-np.sum(counts * np.log2(counts / total)))


def entropy_estimate(indices, grouping: int = 4) -> float:
    """Sample entropy, in bits, of the sequence cut into ``grouping``-tuples."""
    indices = np.asarray(indices).ravel()
    pad = (-len(indices)) % grouping
    padded = np.concatenate([indices, np.zeros(pad, dtype=indices.dtype)])
    tuples = [tuple(row) for row in padded.reshape(-1, grouping).tolist()]
    return shannon_bits(tuples)
