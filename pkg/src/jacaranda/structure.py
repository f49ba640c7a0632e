"""Line structure and inverse maps for the Jacaranda substitution.

One application of the rule sends level k of the input to levels 2k and
2k + 1 of the image; on the level words this induces the doubling map

    chi(10) = 0010,  chi(00) = 0000,  chi(CD) = chi(D) chi(D) chi(C) chi(D)

(halves C, D; the word length is squared).  In the fixed point with root 0,
odd levels read (10)*, and the level 2**n * (2m + 1) is a concatenation of
chi**n(10) and chi**n(00) blocks.  Those facts drive the parity classifier:
an image tree always shows line 1 = 10 and line 2 in {0010, 0000}, while a
subtree rooted at an odd level shows line 2 = 1010.

`source` inverts one application (on image prefixes of even depth) and
`source_word` is its companion on addresses: shifting an image tree by a
word of even length equals the image of the shift by the halved word.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from jacaranda import kernels
from jacaranda.core import (
    JACARANDA,
    TreePrefix,
    TreeSubstitution,
    address_from_index,
    check_address,
)

__all__ = [
    "TypeTag",
    "LineViolation",
    "LineStructureReport",
    "SourceMismatch",
    "chi",
    "chi_power",
    "verify_line_structure",
    "classify_parity",
    "patch_type",
    "address_type",
    "source",
    "source_word",
]

_CHI_BASE = {"10": "0010", "00": "0000"}
_ASCII_TO_BIT = bytes.maketrans(b"01", b"\x00\x01")


def chi(word: str) -> str:
    """The line-doubling word map; defined on power-of-two words over 0/1.

    Base images exist for the pairs 10 and 00 only (the pairs occurring in
    fixed-point lines); the output length is the square of the input length.
    """
    n = len(word)
    if n < 2 or n & (n - 1):
        raise ValueError(f"word length must be a power of two >= 2, got {n}")
    if n == 2:
        try:
            return _CHI_BASE[word]
        except KeyError:
            raise ValueError(f"no base image for pair {word!r}") from None
    first, second = word[: n // 2], word[n // 2 :]
    gd = chi(second)
    return gd + gd + chi(first) + gd


def chi_power(word: str, n: int) -> str:
    for _ in range(n):
        word = chi(word)
    return word


@dataclass(frozen=True)
class LineViolation:
    level: int
    block_index: int
    offset_bits: int
    found: str  # offending block, truncated to 32 characters


@dataclass
class LineStructureReport:
    depth: int
    checked_levels: list[int] = field(default_factory=list)
    violations: list[LineViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "depth": self.depth,
            "checked_levels": self.checked_levels,
            "ok": self.ok,
            "violations": [
                {
                    "level": v.level,
                    "block_index": v.block_index,
                    "offset_bits": v.offset_bits,
                    "found": v.found,
                }
                for v in self.violations
            ],
        }


def _valuation2(n: int) -> int:
    return (n & -n).bit_length() - 1


def _scan_blocks(line_bits: bytes, block_bits: int, allowed: set[bytes],
                 level: int, report: LineStructureReport) -> None:
    for idx in range(0, len(line_bits) // block_bits):
        block = line_bits[idx * block_bits : (idx + 1) * block_bits]
        if block not in allowed:
            text = "".join(str(b) for b in block[:32])
            report.violations.append(
                LineViolation(level, idx, idx * block_bits, text))


def verify_line_structure(t: TreePrefix) -> LineStructureReport:
    """Check every level of a prefix against the fixed-point line grammar.

    Odd levels must be (10)*; the level 2**n * (2m + 1) must concatenate
    chi**n(10) / chi**n(00) blocks.  Violations are reported with level and
    block offset; an empty violation list means the prefix passes.
    """
    report = LineStructureReport(depth=t.depth)
    packed_blocks: dict[int, tuple[bytes, bytes, int]] = {}
    for level in range(1, t.depth):
        report.checked_levels.append(level)
        nu = _valuation2(level)
        line = t.line_packed(level)
        nbits = 1 << level
        if nu == 0:
            # (10)* packs to 0xaa bytes (0x80 / 0xa0 for the short lines)
            if nbits >= 8:
                expected = b"\xaa" * (nbits >> 3)
            else:
                expected = bytes([0xAA & (0xFF << (8 - nbits))])
            if line != expected:
                _scan_blocks(t.line_bits(level), 2, {b"\x01\x00"}, level, report)
            continue
        if nu not in packed_blocks:
            one = chi_power("10", nu)
            block_bits = len(one)
            packed_blocks[nu] = (
                kernels.pack_bits(one.encode().translate(_ASCII_TO_BIT)),
                bytes(block_bits >> 3 or 1),
                block_bits,
            )
        block_one, block_zero, block_bits = packed_blocks[nu]
        if block_bits >= 8:
            nb = block_bits >> 3
            mismatch = any(
                line[i : i + nb] != block_one and line[i : i + nb] != block_zero
                for i in range(0, len(line), nb)
            )
        else:
            # nu == 1: blocks of 4 bits; a byte holds two of them
            allowed_bytes = {0x22, 0x20, 0x02, 0x00}
            if nbits >= 8:
                mismatch = any(b not in allowed_bytes for b in line)
            else:
                mismatch = line[0] not in {0x20, 0x00}
        if mismatch:
            bits = t.line_bits(level)
            one_bits = kernels.unpack_bits(block_one, block_bits)
            zero_bits = bytes(block_bits)
            _scan_blocks(bits, block_bits, {one_bits, zero_bits}, level, report)
    return report


# --------------------------------------------------------------------------
# parity / type classification

@dataclass(frozen=True)
class TypeTag:
    """Odd / even classification, with the doubling exponent when known.

    For even tags, `exponent` is the number of inverse applications that
    reach an odd tree (None when undetermined); `exact` is False when the
    available depth only supports a lower bound.
    """

    kind: str  # "odd" | "even" | "unresolved"
    exponent: int | None = None
    exact: bool = True

    @classmethod
    def odd(cls) -> "TypeTag":
        return cls("odd")

    @classmethod
    def even(cls, exponent: int | None = None, exact: bool = True) -> "TypeTag":
        return cls("even", exponent, exact)

    @classmethod
    def unresolved(cls) -> "TypeTag":
        return cls("unresolved")

    @property
    def is_odd(self) -> bool:
        return self.kind == "odd"

    @property
    def is_even(self) -> bool:
        return self.kind == "even"


def classify_parity(patch: TreePrefix) -> TypeTag:
    """Odd/even decision from the first lines of a patch.

    Sound for windows of the fixed point: image (even) trees have
    line 1 = 10 and line 2 a block of 0010/0000, odd-level subtrees have
    line 1 = 00 or line 2 = 1010.  Depth 3 always decides; depth 2 decides
    only the line 1 = 00 case, anything shallower is Unresolved.
    """
    if patch.depth < 2:
        raise ValueError("parity needs at least two levels")
    line1 = patch.line(1)
    if line1 == "00":
        return TypeTag.odd()
    if line1 != "10":
        return TypeTag.unresolved()
    if patch.depth < 3:
        return TypeTag.unresolved()
    line2 = patch.line(2)
    if line2 == "1010":
        return TypeTag.odd()
    if line2 in ("0010", "0000"):
        return TypeTag.even(exponent=None)
    return TypeTag.unresolved()


def patch_type(patch: TreePrefix, rule: TreeSubstitution = JACARANDA) -> TypeTag:
    """Full type of a patch: source is applied until an odd tree appears.

    Finite depth may run out before the exponent resolves; the result is
    then a lower bound (exact=False).
    """
    level = 0
    current = patch
    while True:
        tag = classify_parity(current) if current.depth >= 2 else TypeTag.unresolved()
        if tag.is_odd:
            return TypeTag.odd() if level == 0 else TypeTag.even(level, exact=True)
        if tag.kind == "unresolved":
            return TypeTag.unresolved() if level == 0 else TypeTag.even(level, exact=False)
        usable = current.depth - (current.depth & 1)
        if usable < 2:
            return TypeTag.even(level, exact=False)
        current = source(current.truncate(usable), rule)
        level += 1


def address_type(word: str) -> TypeTag:
    """Type of the subtree of the fixed point at a nonempty address.

    Odd when the length is odd, otherwise even with exponent the 2-adic
    valuation of the length.  The empty address is rejected: the fixed
    point is an image of every order and the classification, defined via
    approximating shifts of growing length, does not apply to it.
    """
    check_address(word)
    if not word:
        raise ValueError("the empty address has no defined type")
    n = len(word)
    if n & 1:
        return TypeTag.odd()
    return TypeTag.even(_valuation2(n), exact=True)


# --------------------------------------------------------------------------
# inverse maps

class SourceMismatch(ValueError):
    """Prefix is not an image of the substitution; carries a witness address."""

    def __init__(self, address: str):
        super().__init__(f"not a substitution image: mismatch at address {address!r}")
        self.address = address


def source(t: TreePrefix, rule: TreeSubstitution = JACARANDA) -> TreePrefix:
    """Inverse of one application on an even-depth image prefix.

    Each color of the preimage is read back from one grandchild slot of the
    grammar (the last A slot and the last B slot); the decode is then
    validated by re-applying the rule, so any structural inconsistency
    (wrong child colors, unequal duplicated subtrees) raises
    :class:`SourceMismatch` with the first offending address.
    """
    if t.depth < 2 or t.depth & 1:
        raise ValueError(f"source needs an even depth >= 2, got {t.depth}")
    if "A" not in rule.grammar or "B" not in rule.grammar:
        raise ValueError("grammar uses a single child subtree; no inverse")
    slot = {"a": rule.grammar.rfind("A"), "b": rule.grammar.rfind("B")}
    mark_inverse = {c: rule.root_image[c][0] for c in (0, 1)}  # involution
    inverse_of = {v: k for k, v in mark_inverse.items()}
    half = t.depth // 2
    lines = []
    for k in range(half):
        image_line = t.line_bits(2 * k)
        out = bytearray(1 << k)
        for i in range(1 << k):
            pos = 0
            for j in range(k - 1, -1, -1):
                letter = "b" if (i >> j) & 1 else "a"
                pos = (pos << 2) | slot[letter]
            out[i] = inverse_of[image_line[pos]]
        lines.append(kernels.pack_bits(bytes(out)))
    candidate = TreePrefix(lines)
    image = rule.apply(candidate, max_depth=t.depth)
    if image != t:
        for k in range(t.depth):
            got, want = image.line_bits(k), t.line_bits(k)
            if got != want:
                i = next(j for j in range(len(got)) if got[j] != want[j])
                raise SourceMismatch(address_from_index(k, i))
    return candidate


def source_word(word: str, rule: TreeSubstitution = JACARANDA) -> str:
    """Halve an even-length address through the grammar's pair table.

    Consecutive letter pairs (in application order) map to single letters;
    for grammar BBAB: aa, ab, bb -> b and ba -> a.  Defining identity:
    shift(apply(t), w) == apply(shift(t, source_word(w))).
    """
    check_address(word)
    if not word or len(word) & 1:
        raise ValueError(f"source_word needs an even length >= 2, got {len(word)}")
    letters = rule.pair_letters
    return "".join(
        letters[((word[i] == "b") << 1) | (word[i + 1] == "b")]
        for i in range(0, len(word), 2)
    )
