"""Colored binary tree prefixes and length-2 tree substitutions.

Conventions used throughout the package:

* An address is a string over the alphabet ``ab``.  Reading it left to right
  walks down from the root (the composition convention for iterated shifts:
  the first letter is applied first).  The empty string is the root.
* Level k of a prefix holds 2**k colors left to right, a-child before
  b-child; the node at index i of level k has children at indices 2i and
  2i + 1 of level k + 1.  Equivalently, the index of an address is its
  binary reading with a = 0, b = 1.
* Every level is stored bit-packed (MSB first, zero padding at the end of
  the final byte); see :mod:`jacaranda.kernels` for the packed-line kernels.

A substitution maps each node to a root-plus-children triple, depending only
on the node's color, and hangs the images of the two child subtrees below
the four grandchild slots ``aa ab ba bb`` as dictated by a 4-letter grammar
word over {A, B} (A = image of the a-subtree, B = of the b-subtree).  One
application therefore doubles the depth of a prefix.  The Jacaranda rule is
``0 -> 0(1,0)``, ``1 -> 1(1,0)`` with grammar BBAB; its fixed point with
root 0 is the Jacaranda tree.
"""

from __future__ import annotations

import itertools
import struct
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Iterator, Mapping, Sequence

from jacaranda import kernels

__all__ = [
    "Dyadic",
    "TreePrefix",
    "TreeSubstitution",
    "JACARANDA",
    "check_address",
    "address_index",
    "address_from_index",
    "address_sort_key",
    "addresses_of_length",
    "fixed_point",
    "distance",
    "tree_to_bytes",
    "tree_from_bytes",
    "write_tree",
    "read_tree",
]

_BIT_TO_ASCII = bytes.maketrans(b"\x00\x01", b"01")
_ASCII_TO_BIT = bytes.maketrans(b"01", b"\x00\x01")
_INVERT = bytes(v ^ 0xFF for v in range(256))


# --------------------------------------------------------------------------
# addresses

def check_address(word: str) -> str:
    """Validate an address (letters a/b only); returns it unchanged."""
    if word.strip("ab"):
        raise ValueError(f"address may contain only letters a and b: {word!r}")
    return word


def address_index(word: str) -> int:
    """Index of the address within its level (binary reading, a=0, b=1)."""
    i = 0
    for ch in word:
        i = (i << 1) | (ch == "b")
    return i


def address_from_index(length: int, index: int) -> str:
    """Inverse of :func:`address_index` for a given length."""
    return "".join("b" if (index >> (length - 1 - j)) & 1 else "a"
                   for j in range(length))


def address_sort_key(word: str) -> tuple[int, str]:
    """Total order: by length, then lexicographic (a < b)."""
    return (len(word), word)


def addresses_of_length(length: int) -> Iterator[str]:
    """All addresses of the given length in lexicographic order."""
    for letters in itertools.product("ab", repeat=length):
        yield "".join(letters)


# --------------------------------------------------------------------------
# distances

@total_ordering
@dataclass(frozen=True)
class Dyadic:
    """Tree distance: 2**-exponent, or zero when equal to available depth."""

    exponent: int | None

    def __post_init__(self):
        if self.exponent is not None and self.exponent < 0:
            raise ValueError("exponent must be >= 0")

    @classmethod
    def zero(cls) -> "Dyadic":
        return cls(None)

    @classmethod
    def of(cls, exponent: int) -> "Dyadic":
        return cls(exponent)

    @property
    def is_zero(self) -> bool:
        return self.exponent is None

    def as_float(self) -> float:
        return 0.0 if self.exponent is None else 2.0 ** -self.exponent

    def _key(self) -> float:
        return float("-inf") if self.exponent is None else -float(self.exponent)

    def __lt__(self, other: "Dyadic") -> bool:
        return self._key() < other._key()


# --------------------------------------------------------------------------
# tree prefixes

class TreePrefix:
    """The first `depth` levels of a colored binary tree, immutable.

    Also serves as the patch value type: equality and hashing are by exact
    (depth, bits) content, so instances can be deduplicated in sets/dicts.
    """

    __slots__ = ("depth", "_lines", "_hash")

    def __init__(self, lines: Sequence[bytes]):
        depth = len(lines)
        if depth < 1:
            raise ValueError("a tree prefix has at least one level")
        lines = tuple(bytes(line) for line in lines)
        for k, line in enumerate(lines):
            nbits = 1 << k
            if len(line) != (nbits + 7) >> 3:
                raise ValueError(f"level {k} must pack {nbits} bits")
            if nbits < 8 and line[0] & ((1 << (8 - nbits)) - 1):
                raise ValueError(f"level {k} has nonzero padding bits")
        object.__setattr__(self, "depth", depth)
        object.__setattr__(self, "_lines", lines)
        object.__setattr__(self, "_hash", hash((depth, lines)))

    def __setattr__(self, name, value):
        raise AttributeError("TreePrefix is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def single(cls, color: int) -> "TreePrefix":
        if color not in (0, 1):
            raise ValueError("color must be 0 or 1")
        return cls([bytes([color << 7])])

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "TreePrefix":
        """Build from per-level strings of 0/1 characters."""
        packed = []
        for text in lines:
            packed.append(kernels.pack_bits(text.encode("ascii").translate(_ASCII_TO_BIT)))
        return cls(packed)

    @classmethod
    def from_level_order(cls, payload: bytes, depth: int) -> "TreePrefix":
        """Build from the canonical level-order bit packing (2**depth - 1 bits)."""
        if depth < 1:
            raise ValueError("depth must be >= 1")
        total = (1 << depth) - 1
        if len(payload) != (total + 7) >> 3:
            raise ValueError("payload length does not match depth")
        bits = kernels.unpack_bits(payload, total)
        tail = len(payload) * 8 - total
        if tail and payload[-1] & ((1 << tail) - 1):
            raise ValueError("payload has nonzero padding bits")
        lines = [kernels.pack_bits(bits[(1 << k) - 1 : (1 << (k + 1)) - 1])
                 for k in range(depth)]
        return cls(lines)

    @classmethod
    def random(cls, depth: int, rng) -> "TreePrefix":
        """Uniformly random coloring of the given depth (rng: random.Random)."""
        lines = []
        for k in range(depth):
            nbits = 1 << k
            raw = bytearray(rng.randbytes((nbits + 7) >> 3))
            if nbits < 8:
                raw[0] &= 0xFF ^ ((1 << (8 - nbits)) - 1)
            lines.append(bytes(raw))
        return cls(lines)

    # -- accessors ---------------------------------------------------------

    def line_packed(self, k: int) -> bytes:
        if not 0 <= k < self.depth:
            raise ValueError(f"level {k} out of range for depth {self.depth}")
        return self._lines[k]

    def line_bits(self, k: int) -> bytes:
        """Level k as 0/1 byte values."""
        return kernels.unpack_bits(self.line_packed(k), 1 << k)

    def line(self, k: int) -> str:
        """Level k as a string of 0/1 characters, left to right."""
        return self.line_bits(k).translate(_BIT_TO_ASCII).decode("ascii")

    def node_at(self, word: str) -> int:
        """Color at the given address."""
        check_address(word)
        k = len(word)
        if k >= self.depth:
            raise ValueError(f"address {word!r} needs depth > {k}")
        i = address_index(word)
        return (self._lines[k][i >> 3] >> (7 - (i & 7))) & 1

    def _window(self, k: int, index: int, newdepth: int) -> "TreePrefix":
        # Subtree rooted at node `index` of level k, down to `newdepth` levels.
        # Level j of the window is a contiguous bit range of level k + j.
        lines = []
        for j in range(newdepth):
            src = self._lines[k + j]
            nbits = 1 << j
            if nbits >= 8:
                nb = nbits >> 3
                lines.append(src[index * nb : (index + 1) * nb])
            else:
                off = index * nbits  # aligned: never straddles a byte
                group = (src[off >> 3] >> (8 - (off & 7) - nbits)) & ((1 << nbits) - 1)
                lines.append(bytes([group << (8 - nbits)]))
        return TreePrefix(lines)

    def shift(self, word: str) -> "TreePrefix":
        """Subtree rooted at the given address (remaining depth shrinks)."""
        check_address(word)
        k = len(word)
        if k >= self.depth:
            raise ValueError(f"cannot shift by {word!r}: depth is {self.depth}")
        return self._window(k, address_index(word), self.depth - k)

    def truncate(self, depth: int) -> "TreePrefix":
        if not 1 <= depth <= self.depth:
            raise ValueError(f"cannot truncate depth {self.depth} to {depth}")
        if depth == self.depth:
            return self
        return TreePrefix(self._lines[:depth])

    def level_order_bits(self) -> bytes:
        """Canonical packing: all levels concatenated, 2**depth - 1 bits."""
        bits = b"".join(self.line_bits(k) for k in range(self.depth))
        return kernels.pack_bits(bits)

    def canonical_string(self) -> str:
        """Portable patch encoding: "<depth>:<level-order bits as hex>"."""
        return f"{self.depth}:{self.level_order_bits().hex()}"

    @classmethod
    def from_canonical_string(cls, text: str) -> "TreePrefix":
        depth_text, _, payload = text.partition(":")
        return cls.from_level_order(bytes.fromhex(payload), int(depth_text))

    def render(self, max_levels: int = 4) -> str:
        return "\n".join(self.line(k) for k in range(min(self.depth, max_levels)))

    # -- value semantics ----------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, TreePrefix):
            return NotImplemented
        return self.depth == other.depth and self._lines == other._lines

    def __hash__(self) -> int:
        return self._hash

    def sort_key(self) -> tuple[int, tuple[bytes, ...]]:
        return (self.depth, self._lines)

    def __repr__(self) -> str:
        return f"TreePrefix(depth={self.depth}, root={self._lines[0] >> 7})"


def distance(a: TreePrefix, b: TreePrefix) -> Dyadic:
    """2**-N with N the least level where the prefixes disagree.

    Equal-depth prefixes only; agreeing prefixes get the distinguished
    zero value (equal to available depth).
    """
    if a.depth != b.depth:
        raise ValueError(f"distance needs equal depths, got {a.depth} and {b.depth}")
    for k in range(a.depth):
        if a._lines[k] != b._lines[k]:
            return Dyadic.of(k)
    return Dyadic.zero()


# --------------------------------------------------------------------------
# substitutions

def _gather_bits(bits: bytes, takes: bytes) -> bytes:
    # Reference gather on unpacked values; used for short lines and to build
    # the 8-bit base table consumed by the packed kernels.
    if len(bits) == 1:
        return bits
    half = len(bits) >> 1
    parts: list[bytes | None] = [None, None]
    quarters = []
    for t in takes:
        if parts[t] is None:
            parts[t] = _gather_bits(bits[:half] if t == 0 else bits[half:], takes)
        quarters.append(parts[t])
    return b"".join(quarters)  # type: ignore[arg-type]


class TreeSubstitution:
    """A marked, length-2 substitution on {0,1}-colored binary trees.

    root_image maps a color c to the triple (root, a-child, b-child) of the
    image; the grammar word assigns the child-subtree images to the grandchild
    slots aa, ab, ba, bb.  Marked means c -> root is a bijection of {0,1}.
    """

    def __init__(self, root_image: Mapping[int, tuple[int, int, int]], grammar: str):
        if set(root_image) != {0, 1}:
            raise ValueError("root_image must define colors 0 and 1")
        for c, triple in root_image.items():
            if len(triple) != 3 or any(v not in (0, 1) for v in triple):
                raise ValueError(f"root_image[{c}] must be a triple of colors")
        if len(grammar) != 4 or set(grammar) - {"A", "B"}:
            raise ValueError("grammar must be a 4-letter word over {A, B}")
        marks = (root_image[0][0], root_image[1][0])
        if set(marks) != {0, 1}:
            raise ValueError("substitution is not marked: root map must be a bijection")
        self.root_image = {0: tuple(root_image[0]), 1: tuple(root_image[1])}
        self.grammar = grammar
        self._takes = bytes(0 if ch == "A" else 1 for ch in grammar)
        self._mark_identity = marks == (0, 1)
        self._base = self._build_base()
        self._even_table, self._odd_table = self._build_child_tables()
        self.pair_letters = tuple("a" if ch == "A" else "b" for ch in grammar)

    def _build_base(self) -> bytes:
        base = bytearray()
        for v in range(256):
            bits = bytes((v >> (7 - j)) & 1 for j in range(8))
            base += kernels.pack_bits(_gather_bits(bits, self._takes))
        return bytes(base)

    def _build_child_tables(self) -> tuple[bytes, bytes]:
        even = bytearray(256)
        odd = bytearray(256)
        for v in range(256):
            for table, offset in ((even, 0), (odd, 4)):
                acc = 0
                for j in range(4):
                    c = (v >> (7 - offset - j)) & 1
                    _, xa, xb = self.root_image[c]
                    acc = (acc << 2) | (xa << 1) | xb
                table[v] = acc
        return bytes(even), bytes(odd)

    def fixed_root_colors(self) -> tuple[int, ...]:
        return tuple(c for c in (0, 1) if self.root_image[c][0] == c)

    # -- one application ----------------------------------------------------

    def _expand_raw(self, line: bytes, nbits: int) -> bytes:
        if nbits >= 8:
            return kernels.gather_square(line, nbits, self._takes, self._base)
        return kernels.pack_bits(_gather_bits(kernels.unpack_bits(line, nbits), self._takes))

    def _mark(self, raw: bytes, nbits: int) -> bytes:
        if self._mark_identity:
            return raw
        if nbits >= 8:
            return raw.translate(_INVERT)
        bits = kernels.unpack_bits(raw, nbits)
        return kernels.pack_bits(bytes(1 - b for b in bits))

    def _children(self, raw: bytes, nbits: int) -> bytes:
        if nbits >= 8:
            return kernels.spread_pairs(raw, self._even_table, self._odd_table)
        out = bytearray()
        for c in kernels.unpack_bits(raw, nbits):
            _, xa, xb = self.root_image[c]
            out += bytes((xa, xb))
        return kernels.pack_bits(bytes(out))

    def apply(self, prefix: TreePrefix, max_depth: int | None = None) -> TreePrefix:
        """One substitution step; output depth is min(2 * depth, max_depth)."""
        out_depth = 2 * prefix.depth
        if max_depth is not None:
            if max_depth < 1:
                raise ValueError("max_depth must be >= 1")
            out_depth = min(out_depth, max_depth)
        lines = []
        for k in range(prefix.depth):
            if 2 * k >= out_depth:
                break
            raw = self._expand_raw(prefix.line_packed(k), 1 << k)
            rbits = 1 << (2 * k)
            lines.append(self._mark(raw, rbits))
            if 2 * k + 1 < out_depth:
                lines.append(self._children(raw, rbits))
        return TreePrefix(lines)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TreeSubstitution):
            return NotImplemented
        return self.root_image == other.root_image and self.grammar == other.grammar

    def __hash__(self) -> int:
        return hash((tuple(sorted(self.root_image.items())), self.grammar))

    def __repr__(self) -> str:
        img = ", ".join(f"{c}->{t[0]}({t[1]},{t[2]})" for c, t in sorted(self.root_image.items()))
        return f"TreeSubstitution({img}; grammar={self.grammar})"


JACARANDA = TreeSubstitution({0: (0, 1, 0), 1: (1, 1, 0)}, "BBAB")


def fixed_point(rule: TreeSubstitution, root_color: int, depth: int) -> TreePrefix:
    """Depth-`depth` prefix of the unique fixed tree with the given root.

    Iterates the substitution from a single node, truncating to `depth`
    once exceeded; deterministic and bit-stable for fixed arguments.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if rule.root_image[root_color][0] != root_color:
        raise ValueError(f"color {root_color} is not fixed by the root map; "
                         "no fixed point starts with it")
    t = TreePrefix.single(root_color)
    while t.depth < depth:
        t = rule.apply(t, max_depth=depth)
    return t


# --------------------------------------------------------------------------
# binary cache format (SBTR)

SBTR_MAGIC = b"SBTR"
SBTR_VERSION = 1
_SBTR_HEADER = struct.Struct("<4sBI")


def tree_to_bytes(t: TreePrefix) -> bytes:
    """Serialize: magic "SBTR", version u8, depth u32 LE, level-order bits."""
    return _SBTR_HEADER.pack(SBTR_MAGIC, SBTR_VERSION, t.depth) + t.level_order_bits()


def tree_from_bytes(data: bytes) -> TreePrefix:
    if len(data) < _SBTR_HEADER.size:
        raise ValueError("truncated SBTR data")
    magic, version, depth = _SBTR_HEADER.unpack_from(data)
    if magic != SBTR_MAGIC:
        raise ValueError("not an SBTR file")
    if version != SBTR_VERSION:
        raise ValueError(f"unsupported SBTR version {version}")
    return TreePrefix.from_level_order(data[_SBTR_HEADER.size:], depth)


def write_tree(path, t: TreePrefix) -> None:
    with open(path, "wb") as fh:
        fh.write(tree_to_bytes(t))


def read_tree(path) -> TreePrefix:
    with open(path, "rb") as fh:
        return tree_from_bytes(fh.read())
