"""Tabled ANS: integer states N..2N-1, correspondence tables C and D, the
arithmetic encode/decode recursion, and the lossless embedding into an
AedsTable.

State counts must be powers of two here; the table constructors in
``constructors`` cover general N.
"""

import hashlib

from .codec import (
    BitReader,
    BitWriter,
    Bitstream,
    MalformedTable,
    TruncatedStream,
)
from .errors import (
    HashMismatch,
    NotPowerOfTwo,
    TableError,
    TooFewStates,
    TrailingGarbage,
    UnknownSymbol,
    VersionMismatch,
)
from .model import AedsTable, Codeword

TANS_MAGIC = b"ANST"
TANS_VERSION = 1

SPREAD_SORTED = "sorted-interval"
SPREAD_STRIDE = "stride"


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


def _floor_lg(n):
    return n.bit_length() - 1


def quantize_counts(p, n_states):
    """Integer per-symbol state counts with sum N and every count >= 1.

    Largest-remainder apportionment of p(s)*N, ties broken by symbol index;
    zero counts are repaired by borrowing from the most over-allocated
    symbol.
    """
    m = len(p.symbols)
    if n_states < m:
        raise TooFewStates(f"{n_states} states cannot cover {m} symbols")
    targets = [q * n_states for q in p.probs]
    counts = [int(t) for t in targets]
    leftovers = sorted(range(m), key=lambda i: (-(targets[i] - counts[i]), i))
    for i in leftovers[:n_states - sum(counts)]:
        counts[i] += 1
    while any(c == 0 for c in counts):
        needy = counts.index(0)
        donor = max((i for i in range(m) if counts[i] > 1),
                    key=lambda i: (counts[i] - targets[i], -i))
        counts[needy] += 1
        counts[donor] -= 1
    return counts


class TansTable:
    """A tANS instance: N, per-symbol counts, and the C/D correspondence.

    ``C[s][y - counts[s]]`` is the state x reached by pushing symbol s at
    slot y, and ``D[x - N]`` is the inverse pair (s, y).
    """

    __slots__ = ("symbols", "n_states", "counts", "spread", "C", "D", "_index")

    def __init__(self, symbols, counts, spread, C, D):
        symbols = tuple(symbols)
        counts = tuple(counts)
        if not _is_pow2(len(D)):
            raise NotPowerOfTwo(f"state count {len(D)} is not a power of two")
        if sum(counts) != len(D) or any(c < 1 for c in counts):
            raise TableError("counts must be positive and sum to N")
        n = len(D)
        for s, block in enumerate(C):
            if len(block) != counts[s]:
                raise TableError("C block size mismatch")
            for y_off, x in enumerate(block):
                if not n <= x < 2 * n:
                    raise TableError(f"state {x} outside N..2N-1")
                if D[x - n] != (s, counts[s] + y_off):
                    raise TableError("C and D are not mutual inverses")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "n_states", n)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "spread", spread)
        object.__setattr__(self, "C", tuple(tuple(b) for b in C))
        object.__setattr__(self, "D", tuple(D))
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    def __setattr__(self, *_):
        raise AttributeError("TansTable is immutable")

    def symbol_index(self, symbol):
        try:
            return self._index[symbol]
        except KeyError:
            raise TableError(f"symbol {symbol!r} not in alphabet") from None

    def push(self, s, x):
        """One backward encoding step: (symbol, state) -> (codeword, state)."""
        ns = self.counts[s]
        k = _floor_lg(x // ns)
        word = Codeword(x & ((1 << k) - 1), k)
        return word, self.C[s][(x >> k) - ns]

    def state_block(self, s):
        """The states x in X_s, ascending."""
        return tuple(sorted(self.C[s]))


def _spread_sorted(counts, n):
    """Consecutive symbol blocks; within a block the slots y are rotated so
    short-codeword slots come first, mirroring the power-of-two layout used
    by the state-divided builders."""
    C = []
    base = n
    for ns in counts:
        ks = (ns - 1).bit_length() if ns > 1 else 0
        small = 2 * ns - (1 << ks)  # slots emitting floor(lg(N/ns)) bits
        block = [0] * ns
        for j in range(small):
            y = (1 << ks) + j
            block[y - ns] = base + j
        for j in range(ns - small):
            y = ns + j
            block[y - ns] = base + small + j
        C.append(block)
        base += ns
    return C


def _spread_stride(counts, n):
    """Classic odd-stride spread: slot sequence (i*step mod N)."""
    step = (n >> 1) + (n >> 3) + 3
    if step % 2 == 0:
        step += 1
    slots = [None] * n
    pos = 0
    for s, ns in enumerate(counts):
        for _ in range(ns):
            slots[pos] = s
            pos = (pos + step) % n
    C = [[] for _ in counts]
    for i, s in enumerate(slots):
        C[s].append(n + i)
    return C


def build_tans(p, n_states, spread_policy=SPREAD_SORTED):
    """Quantize ``p`` onto ``n_states`` slots and lay out the C/D tables."""
    if not _is_pow2(n_states):
        raise NotPowerOfTwo(f"{n_states} is not a power of two")
    counts = quantize_counts(p, n_states)
    if spread_policy == SPREAD_SORTED:
        C = _spread_sorted(counts, n_states)
    elif spread_policy == SPREAD_STRIDE:
        C = _spread_stride(counts, n_states)
    else:
        raise ValueError(f"unknown spread policy {spread_policy!r}")
    D = [None] * n_states
    for s, block in enumerate(C):
        for y_off, x in enumerate(block):
            D[x - n_states] = (s, counts[s] + y_off)
    return TansTable(p.symbols, counts, spread_policy, C, D)


def tans_encode(table, sequence, initial_state=None):
    """Backward arithmetic encoding; shares the AEDS stream framing, with
    the initial decoder state stored as x - N."""
    n = table.n_states
    x = n if initial_state is None else initial_state
    if not n <= x < 2 * n:
        raise TableError(f"initial state {x} outside N..2N-1")
    indices = []
    for t, s in enumerate(sequence):
        try:
            indices.append(table.symbol_index(s))
        except TableError:
            raise UnknownSymbol(t, s) from None
    rev = []
    for s in reversed(indices):
        word, x = table.push(s, x)
        rev.append(word)
    rev.reverse()
    return Bitstream.assemble(n, x - n, len(indices), rev)


def tans_decode(table, stream):
    n = table.n_states
    if stream.n_states != n:
        raise TableError(f"stream carries {stream.n_states} states, "
                         f"table {n}")
    reader = stream.payload_reader()
    x = n + stream.initial_state
    out = []
    for _ in range(stream.length):
        s, y = table.D[x - n]
        # bits needed to lift y back into N..2N-1; exact inverse of push()
        k = 0
        while (y << k) < n:
            k += 1
        x = (y << k) | reader.read(k)
        out.append(table.symbols[s])
    if reader.bits_left >= 8:
        raise TrailingGarbage(f"{reader.bits_left} bits after the payload")
    if reader.bits_left and reader.read(reader.bits_left):
        raise TrailingGarbage("nonzero padding bits")
    return out


def tans_to_aeds(table):
    """Rewrite the arithmetic recursion as an explicit state table.

    The resulting AedsTable indexes states densely (state i is x = N + i)
    and produces bit-identical streams for identical initial states.
    """
    n = table.n_states
    rows = []
    for i in range(n):
        x = n + i
        row = []
        for s in range(len(table.symbols)):
            word, nxt = table.push(s, x)
            row.append((word, nxt - n))
        rows.append(row)
    return AedsTable(table.symbols, rows)


# ---------------------------------------------------------------------------
# serialization: (N, counts, spread policy, permutation)


def serialize_tans(table):
    w = BitWriter()
    w.write_bytes(TANS_MAGIC)
    w.write(TANS_VERSION, 8)
    w.write_leb128(table.n_states)
    w.write_leb128(len(table.symbols))
    from .codec import _write_symbol
    for s in table.symbols:
        _write_symbol(w, s)
    for c in table.counts:
        w.write_leb128(c)
    policy = table.spread.encode("utf-8")
    w.write_leb128(len(policy))
    w.write_bytes(policy)
    for s, y in table.D:
        w.write_leb128(s)
        w.write_leb128(y - table.counts[s])
    body = w.getvalue()
    return body + hashlib.sha256(body).digest()


def deserialize_tans(data):
    if len(data) < 32 + 6:
        raise MalformedTable("too short to hold a tANS table")
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        if body[:4] != TANS_MAGIC:
            raise MalformedTable("bad tANS magic")
        raise HashMismatch("tANS bytes fail their content hash")
    r = BitReader(body)
    from .codec import _read_symbol
    try:
        if bytes(r.read(8) for _ in range(4)) != TANS_MAGIC:
            raise MalformedTable("bad tANS magic")
        version = r.read(8)
        if version != TANS_VERSION:
            raise VersionMismatch(f"tANS version {version}")
        n = r.read_leb128()
        n_sym = r.read_leb128()
        symbols = [_read_symbol(r) for _ in range(n_sym)]
        counts = [r.read_leb128() for _ in range(n_sym)]
        plen = r.read_leb128()
        policy = bytes(r.read(8) for _ in range(plen)).decode("utf-8")
        slots = [(r.read_leb128(), r.read_leb128()) for _ in range(n)]
    except TruncatedStream:
        raise MalformedTable("tANS bytes end early") from None
    except (ValueError, UnicodeDecodeError) as exc:
        raise MalformedTable(str(exc)) from None
    C = [[None] * c for c in counts]
    D = [None] * n
    for i, (s, y_off) in enumerate(slots):
        if not 0 <= s < n_sym or not 0 <= y_off < counts[s]:
            raise MalformedTable("slot entry out of range")
        if C[s][y_off] is not None:
            raise MalformedTable("duplicate slot entry")
        D[i] = (s, counts[s] + y_off)
        C[s][y_off] = n + i
    try:
        return TansTable(symbols, counts, policy, C, D)
    except (TableError, NotPowerOfTwo) as exc:
        raise MalformedTable(str(exc)) from None
