"""Self-describing container around one coded stream.

Layout, little-endian::

    magic "APC1" | version u8 | mode u8 | m u64 | n u32 | F u8 | alphabet_kind u8
    [n x u32 symbols, when alphabet_kind = 1]
    payload (MSB-first bits, zero padded to a byte)

The payload carries no length field: the decoder stops after m symbols and
reports how many bytes it used, which also lets containers be concatenated.
"""

import struct
from dataclasses import dataclass

from .codec import Decoder, Encoder
from .errors import ConfigurationError, CorruptStreamError
from .freq_model import SHANNON, AlphabetMap, LengthPolicy

MAGIC = b"APC1"
VERSION = 1
HEADER = struct.Struct("<4sBBQIBB")
SYMBOL = struct.Struct("<I")

MODE_SHANNON = 0
MODE_LENGTH_LIMITED = 1
ALPHABET_BYTES = 0
ALPHABET_TABLE = 1


@dataclass
class ContainerHeader:
    mode: int
    m: int
    n: int
    max_len: int = 0
    alphabet_kind: int = ALPHABET_BYTES
    symbols: tuple = ()
    version: int = VERSION

    def __post_init__(self):
        if (self.max_len != 0) != (self.mode == MODE_LENGTH_LIMITED):
            raise ConfigurationError("F must be set exactly when the mode is length-limited")
        if self.mode not in (MODE_SHANNON, MODE_LENGTH_LIMITED):
            raise ConfigurationError(f"unknown mode {self.mode}")
        if self.alphabet_kind == ALPHABET_BYTES and self.n != 256:
            raise ConfigurationError("byte alphabets have n = 256")
        if self.alphabet_kind == ALPHABET_TABLE and len(self.symbols) != self.n:
            raise ConfigurationError("symbol table size does not match n")

    @property
    def policy(self):
        if self.mode == MODE_LENGTH_LIMITED:
            return LengthPolicy.length_limited(self.max_len)
        return LengthPolicy.shannon()

    @property
    def alphabet(self):
        if self.alphabet_kind == ALPHABET_BYTES:
            return AlphabetMap.bytes()
        return AlphabetMap(self.symbols)

    def pack(self):
        out = HEADER.pack(MAGIC, self.version, self.mode, self.m, self.n,
                          self.max_len, self.alphabet_kind)
        if self.alphabet_kind == ALPHABET_TABLE:
            out += b"".join(SYMBOL.pack(s) for s in self.symbols)
        return out

    @classmethod
    def unpack(cls, data, offset=0):
        """Parse a header at ``offset``; returns (header, offset just past it)."""
        if len(data) - offset < HEADER.size:
            raise CorruptStreamError("truncated container header")
        magic, version, mode, m, n, max_len, kind = HEADER.unpack_from(data, offset)
        if magic != MAGIC:
            raise CorruptStreamError(f"bad magic {magic!r}")
        if version != VERSION:
            raise CorruptStreamError(f"unsupported container version {version}")
        offset += HEADER.size
        symbols = ()
        if kind == ALPHABET_TABLE:
            end = offset + SYMBOL.size * n
            if len(data) < end:
                raise CorruptStreamError("truncated symbol table")
            symbols = tuple(s for (s,) in SYMBOL.iter_unpack(data[offset:end]))
            offset = end
        elif kind != ALPHABET_BYTES:
            raise CorruptStreamError(f"unknown alphabet kind {kind}")
        try:
            return cls(mode, m, n, max_len, kind, symbols, version), offset
        except ConfigurationError as exc:
            raise CorruptStreamError(f"inconsistent header: {exc}") from None


def choose_alphabet(data, kind="auto"):
    """(alphabet_kind, symbols) for a byte string."""
    if kind == "bytes":
        return ALPHABET_BYTES, ()
    if kind != "auto":
        raise ConfigurationError(f"unknown alphabet choice {kind!r}")
    symbols = sorted(set(data))
    if len(symbols) == 1:
        # A one-letter alphabet cannot be coded; pad with an unused neighbour.
        symbols.append(1 if symbols[0] == 0 else 0)
        symbols.sort()
    return ALPHABET_TABLE, tuple(symbols)


def policy_mode(policy):
    if policy.kind == SHANNON:
        return MODE_SHANNON, 0
    return MODE_LENGTH_LIMITED, policy.max_len


def encode_container(data, policy=None, alphabet="auto", **kwargs):
    """One container for ``data`` (a byte string). Returns (bytes, stats)."""
    if not data:
        raise ConfigurationError("cannot encode an empty input: m must be at least 1")
    policy = policy or LengthPolicy.shannon()
    kind, symbols = choose_alphabet(data, alphabet)
    mode, max_len = policy_mode(policy)
    n = 256 if kind == ALPHABET_BYTES else len(symbols)
    header = ContainerHeader(mode, len(data), n, max_len, kind, symbols)
    enc = Encoder(len(data), header.alphabet, policy, **kwargs)
    ident = enc.alphabet.id
    for b in data:
        enc.encode_id(ident(b))
    return header.pack() + enc.finish(), enc.stats


def decode_container(data, offset=0, **kwargs):
    """Decode the container at ``offset``; returns (symbols, next offset, stats)."""
    header, start = ContainerHeader.unpack(data, offset)
    if header.m == 0:
        raise CorruptStreamError("container declares an empty stream")
    dec = Decoder(header.m, header.alphabet, memoryview(data)[start:], header.policy, **kwargs)
    symbol = dec.alphabet.symbol
    out = [symbol(dec.decode_id()) for _ in range(header.m)]
    used = dec.finish(strict=False)
    return out, start + used, dec.stats


def encode_chunks(data, chunk=None, **kwargs):
    """Split ``data`` into blocks of ``chunk`` bytes, each its own container."""
    if chunk is None or chunk >= len(data):
        blob, stats = encode_container(data, **kwargs)
        return blob, [stats]
    if chunk < 1:
        raise ConfigurationError("chunk size must be positive")
    parts, stats = [], []
    for start in range(0, len(data), chunk):
        blob, st = encode_container(data[start:start + chunk], **kwargs)
        parts.append(blob)
        stats.append(st)
    return b"".join(parts), stats


def decode_all(data, **kwargs):
    """Decode concatenated containers back to bytes."""
    if not data:
        raise CorruptStreamError("no container found")
    out = bytearray()
    stats = []
    offset = 0
    while offset < len(data):
        symbols, offset, st = decode_container(data, offset, **kwargs)
        try:
            out += bytes(symbols)
        except ValueError:
            raise CorruptStreamError("decoded symbols do not fit in bytes") from None
        stats.append(st)
    return bytes(out), stats
