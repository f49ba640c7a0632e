# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled bit kernels; same contracts as jacaranda._kernels."""

from libc.string cimport memcpy

BACKEND = "c"


def pack_bits(bits):
    cdef const unsigned char[:] src = bits
    cdef Py_ssize_t n = src.shape[0]
    if n == 0:
        return b""
    cdef bytearray out = bytearray((n + 7) >> 3)
    cdef unsigned char[:] dst = out
    cdef Py_ssize_t i
    cdef unsigned char acc = 0
    for i in range(n):
        acc = (acc << 1) | (src[i] & 1)
        if (i & 7) == 7:
            dst[i >> 3] = acc
            acc = 0
    if n & 7:
        dst[n >> 3] = acc << (8 - (n & 7))
    return bytes(out)


def unpack_bits(data, Py_ssize_t nbits):
    cdef const unsigned char[:] src = data
    if nbits == 0:
        return b""
    cdef bytearray out = bytearray(nbits)
    cdef unsigned char[:] dst = out
    cdef Py_ssize_t i
    for i in range(nbits):
        dst[i] = (src[i >> 3] >> (7 - (i & 7))) & 1
    return bytes(out)


cdef void _gather(const unsigned char *src, Py_ssize_t nbits,
                  const unsigned char *takes, const unsigned char *base,
                  unsigned char *out) noexcept:
    cdef Py_ssize_t half_bytes, quarter_bytes, i
    cdef int first_a = -1, first_b = -1
    if nbits == 8:
        memcpy(out, base + (<Py_ssize_t> src[0]) * 8, 8)
        return
    half_bytes = nbits >> 4
    quarter_bytes = ((nbits >> 1) * (nbits >> 1)) >> 3
    for i in range(4):
        if takes[i] == 0:
            if first_a < 0:
                first_a = <int> i
                _gather(src, nbits >> 1, takes, base, out + i * quarter_bytes)
        else:
            if first_b < 0:
                first_b = <int> i
                _gather(src + half_bytes, nbits >> 1, takes, base,
                        out + i * quarter_bytes)
    for i in range(4):
        if takes[i] == 0 and i != first_a:
            memcpy(out + i * quarter_bytes, out + first_a * quarter_bytes,
                   quarter_bytes)
        elif takes[i] == 1 and i != first_b:
            memcpy(out + i * quarter_bytes, out + first_b * quarter_bytes,
                   quarter_bytes)


def gather_square(line, Py_ssize_t nbits, takes, base):
    cdef const unsigned char[:] src = line
    cdef const unsigned char[:] tk = takes
    cdef const unsigned char[:] bs = base
    cdef bytearray out = bytearray((nbits * nbits) >> 3)
    cdef unsigned char[:] dst = out
    _gather(&src[0], nbits, &tk[0], &bs[0], &dst[0])
    return bytes(out)


def spread_pairs(line, even_table, odd_table):
    cdef const unsigned char[:] src = line
    cdef const unsigned char[:] te = even_table
    cdef const unsigned char[:] to = odd_table
    cdef Py_ssize_t n = src.shape[0]
    cdef bytearray out = bytearray(2 * n)
    cdef unsigned char[:] dst = out
    cdef Py_ssize_t i
    for i in range(n):
        dst[2 * i] = te[src[i]]
        dst[2 * i + 1] = to[src[i]]
    return bytes(out)
