"""Packed fingerprint vectors over GF(2^s).

A vector of length ``n`` over an alphabet of size ``q = 2^s`` is stored as a
single Python int: symbol ``i`` occupies bits ``[i*s, (i+1)*s)``.  Because every
alphabet here has characteristic 2, vector addition is a plain XOR of the
packed ints.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence


@lru_cache(maxsize=None)
def symbol_width(q: int) -> int:
    """Bits per symbol for alphabet size ``q``; ``q`` must be a power of two >= 2."""
    if q < 2 or q & (q - 1):
        raise ValueError(f"alphabet size must be a power of two >= 2, got {q}")
    return q.bit_length() - 1


def symbol_mask(n: int, q: int, coords: Iterable[int]) -> int:
    """Packed mask with all bits of the given coordinates set."""
    s = symbol_width(q)
    full = (1 << s) - 1
    mask = 0
    for i in coords:
        if not 0 <= i < n:
            raise IndexError(f"coordinate {i} out of range for length {n}")
        mask |= full << (i * s)
    return mask


@dataclass(frozen=True, order=True)
class SymbolVector:
    n: int
    q: int
    packed: int

    def __post_init__(self) -> None:
        s = symbol_width(self.q)
        if self.n < 0:
            raise ValueError("length must be non-negative")
        if self.packed < 0 or self.packed >> (s * self.n):
            raise ValueError("packed value has bits beyond the vector length")

    @classmethod
    def from_symbols(cls, symbols: Sequence[int], q: int = 2) -> "SymbolVector":
        s = symbol_width(q)
        packed = 0
        for i, a in enumerate(symbols):
            a = int(a)
            if not 0 <= a < q:
                raise ValueError(f"symbol {a} at coordinate {i} outside alphabet of size {q}")
            packed |= a << (i * s)
        return cls(len(symbols), q, packed)

    @classmethod
    def parse(cls, text: str, q: int = 2) -> "SymbolVector":
        """Parse a digit string, coordinate 0 first (``"110"`` or ``"0231"``)."""
        return cls.from_symbols([int(ch, 16) for ch in text.strip()], q)

    @classmethod
    def zeros(cls, n: int, q: int = 2) -> "SymbolVector":
        return cls(n, q, 0)

    @property
    def width(self) -> int:
        return symbol_width(self.q)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self.n
        if not 0 <= i < self.n:
            raise IndexError(i)
        s = self.width
        return (self.packed >> (i * s)) & ((1 << s) - 1)

    def __iter__(self) -> Iterator[int]:
        s = self.width
        low = (1 << s) - 1
        v = self.packed
        for _ in range(self.n):
            yield v & low
            v >>= s

    def symbols(self) -> tuple[int, ...]:
        return tuple(self)

    def _check_compatible(self, other: "SymbolVector") -> None:
        if self.n != other.n or self.q != other.q:
            raise ValueError(
                f"incompatible vectors: length {self.n} over q={self.q} "
                f"vs length {other.n} over q={other.q}"
            )

    def __add__(self, other: "SymbolVector") -> "SymbolVector":
        self._check_compatible(other)
        return SymbolVector(self.n, self.q, self.packed ^ other.packed)

    # characteristic 2: subtraction is addition
    __sub__ = __add__

    def support(self) -> frozenset[int]:
        return frozenset(i for i, a in enumerate(self) if a)

    def weight(self) -> int:
        if self.q == 2:
            return self.packed.bit_count()
        return sum(1 for a in self if a)

    def support_mask(self) -> int:
        """Packed mask covering every nonzero coordinate."""
        if self.q == 2:
            return self.packed
        return symbol_mask(self.n, self.q, self.support())

    def with_symbol(self, i: int, a: int) -> "SymbolVector":
        s = self.width
        cleared = self.packed & ~(((1 << s) - 1) << (i * s))
        return SymbolVector(self.n, self.q, cleared | (a << (i * s)))

    def to_hex(self) -> str:
        """Hex text with the most significant bit holding coordinate 0.

        Each symbol is written MSB-first; the bit string is right-padded with
        zeros to a whole number of hex digits.
        """
        s = self.width
        bits = "".join(format(a, f"0{s}b") for a in self)
        if not bits:
            return ""
        pad = -len(bits) % 4
        return format(int(bits + "0" * pad, 2), f"0{(len(bits) + pad) // 4}x")

    @classmethod
    def from_hex(cls, text: str, n: int, q: int = 2) -> "SymbolVector":
        s = symbol_width(q)
        text = text.strip()
        nbits = n * s
        if len(text) != -(-nbits // 4):
            raise ValueError(f"hex string of length {len(text)} cannot hold {n} symbols over q={q}")
        if not text:
            return cls(0, q, 0)
        bits = format(int(text, 16), f"0{len(text) * 4}b")
        if "1" in bits[nbits:]:
            raise ValueError("nonzero padding bits in hex fingerprint")
        return cls.from_symbols([int(bits[i * s:(i + 1) * s], 2) for i in range(n)], q)

    def __str__(self) -> str:
        if self.q <= 16:
            return "".join(format(a, "x") for a in self)
        return ",".join(str(a) for a in self)
