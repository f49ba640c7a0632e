"""Pure-Python bit kernels.

Mirror of the compiled module ``jacaranda._ckernels``; ``jacaranda.kernels``
picks one of the two at import time.  A line of 2**k colors is stored packed,
most-significant-bit first, zero padding at the end of the final byte.

The implementations below avoid per-bit Python loops: packing rides on the
base-2 bignum parser, unpacking on the binary formatter, the grammar gather
on slice joins (linear in the output because duplicated quarters are memoized
per call), and the children expansion on two 256-entry translate tables plus
strided slice assignment.
"""

BACKEND = "pure"

_BIT_TO_ASCII = bytes.maketrans(b"\x00\x01", b"01")
_ASCII_TO_BIT = bytes.maketrans(b"01", b"\x00\x01")


def pack_bits(bits):
    """Pack 0/1 byte values MSB-first, zero padding the final byte."""
    n = len(bits)
    if n == 0:
        return b""
    pad = -n % 8
    text = bytes(bits).translate(_BIT_TO_ASCII) + b"0" * pad
    return int(text, 2).to_bytes((n + pad) // 8, "big")


def unpack_bits(data, nbits):
    """First `nbits` bits of packed `data` as 0/1 byte values."""
    if nbits == 0:
        return b""
    value = int.from_bytes(data, "big") >> (8 * len(data) - nbits)
    return format(value, "0%db" % nbits).encode("ascii").translate(_ASCII_TO_BIT)


def gather_square(line, nbits, takes, base):
    """Grammar gather of a packed line; nbits >= 8, output has nbits**2 bits.

    The output splits into four quarters; quarter i is the gather of the
    first (takes[i] == 0) or second (takes[i] == 1) half of the input.
    `base` holds the 64-bit gather of every 8-bit line (256 * 8 bytes).
    """
    if nbits == 8:
        v = line[0]
        return base[v * 8 : v * 8 + 8]
    half = len(line) >> 1
    parts = [None, None]
    quarters = []
    for t in takes:
        if parts[t] is None:
            sub = line[:half] if t == 0 else line[half:]
            parts[t] = gather_square(sub, nbits >> 1, takes, base)
        quarters.append(parts[t])
    return b"".join(quarters)


def spread_pairs(line, even_table, odd_table):
    """Children line of a packed color line; nbits >= 8, output doubles.

    Each color byte (8 colors) expands to 16 child bits; `even_table` maps a
    color byte to the child bits of its high nibble, `odd_table` to those of
    its low nibble.
    """
    out = bytearray(2 * len(line))
    out[0::2] = line.translate(even_table)
    out[1::2] = line.translate(odd_table)
    return bytes(out)
