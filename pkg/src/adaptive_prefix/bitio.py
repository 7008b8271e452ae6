"""MSB-first bit packing.

Codewords are written most significant bit first so that the numeric order of
a fixed-width window equals the lexicographic order of the codewords it starts
with; canonical decoding by predecessor search relies on this.
"""

from .errors import CorruptStreamError

MAX_WIDTH = 64


class BitWriter:
    __slots__ = ("_out", "_acc", "_nacc", "bits_written")

    def __init__(self):
        self._out = bytearray()
        self._acc = 0
        self._nacc = 0
        self.bits_written = 0

    def write_bits(self, value, length):
        """Append the ``length`` low-order bits of ``value``, high bit first."""
        if not 0 < length <= MAX_WIDTH or value < 0 or value >> length:
            raise ValueError(f"cannot write value {value} in {length} bits")
        self._acc = (self._acc << length) | value
        self._nacc += length
        self.bits_written += length
        if self._nacc >= 64:
            self._drain()

    def _drain(self):
        nbytes, rem = divmod(self._nacc, 8)
        self._out += (self._acc >> rem).to_bytes(nbytes, "big")
        self._acc &= (1 << rem) - 1
        self._nacc = rem

    def getvalue(self):
        """Bytes written so far, with the partial last byte zero padded."""
        self._drain()
        if self._nacc:
            return bytes(self._out) + bytes([self._acc << (8 - self._nacc)])
        return bytes(self._out)

    def finish(self):
        return self.getvalue()


class BitReader:
    """Reads back a :class:`BitWriter` stream.

    ``peek`` looks past the end of the data as if it were followed by zeros,
    because the decoder always inspects a full window even for the last short
    codeword. ``consume`` past the real end raises :class:`CorruptStreamError`.
    """

    __slots__ = ("_data", "_next", "_buf", "_nbuf", "cursor", "total_bits")

    def __init__(self, data, total_bits=None):
        self._data = bytes(data)
        self._next = 0  # next byte index to load into _buf
        self._buf = 0
        self._nbuf = 0
        self.cursor = 0
        self.total_bits = 8 * len(self._data) if total_bits is None else total_bits

    def _refill(self):
        chunk = self._data[self._next:self._next + 8]
        self._next += 8
        value = int.from_bytes(chunk, "big") << (8 * (8 - len(chunk)))
        self._buf = (self._buf << 64) | value
        self._nbuf += 64

    def peek(self, width):
        """The next ``width`` bits as an integer; the cursor does not move."""
        if width > MAX_WIDTH:
            raise ValueError(f"window wider than {MAX_WIDTH} bits")
        if self._nbuf < width:
            self._refill()
        return self._buf >> (self._nbuf - width)

    def consume(self, k):
        if self._nbuf < k:
            self._refill()
        if self.cursor + k > self.total_bits:
            raise CorruptStreamError(
                f"stream truncated: need bit {self.cursor + k}, have {self.total_bits}")
        self._nbuf -= k
        self._buf &= (1 << self._nbuf) - 1
        self.cursor += k

    def read_bits(self, k):
        value = self.peek(k)
        self.consume(k)
        return value

    @property
    def bytes_consumed(self):
        return (self.cursor + 7) // 8


def peek_window(reader, width):
    return reader.peek(width)
