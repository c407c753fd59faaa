"""Command-line front end: file compression, decompression, and CSV dumps
of the analytic curves.

Container layout (byte oriented):

    magic "AEDC" | version u8 | flags u8 | crc32 of the raw data (u32 BE) |
    table section (embedded bytes, or the 32-byte digest when a side table
    file is used) | block count LEB128 | per block: byte length LEB128 +
    one framed bitstream

Files are split into blocks of 2^20 symbols; each block carries its own
stream header, so decompression never needs more than one block in memory.
"""

import argparse
import math
import os
import sys
import zlib

from . import analysis, codec, constructors, model, prefix_codes, tans
from .codec import BitReader, BitWriter, Bitstream
from .errors import AedsError, HashMismatch, MalformedStream

CONTAINER_MAGIC = b"AEDC"
CONTAINER_VERSION = 1
FLAG_EMBEDDED = 1
FLAG_EMPTY = 2

BLOCK_SYMBOLS = 1 << 20

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

CODECS = ("huffman", "type1", "type2", "saeds-case1", "saeds-case2",
          "saeds-case3", "large-n", "tans")

FIGURES = ("delta-type1", "delta-type2", "worst-case", "uniform-n2",
           "uniform-nsweep", "uniform-type2", "binary", "table1",
           "largeN-sweep")


def _one_state_table(p, tree):
    """Plain prefix coding expressed as a single-state machine."""
    words = tree.codewords()
    row = [(words[s], 0) for s in p.symbols]
    return model.AedsTable(p.symbols, [row])


def _pow2_counts(p, n_states):
    """Power-of-two state counts summing to ``n_states``; with a
    power-of-two total every per-symbol ratio is then an integer, as the
    equal-ratio layout requires."""
    counts = []
    for q in p.probs:
        c = 1 << max(round(math.log2(max(q * n_states, 1.0))), 0)
        counts.append(max(min(c, n_states), 1))
    # repair the sum by halving the most over-represented / doubling the
    # most starved entries; terminates because counts stay in [1, N]
    def cost(i, c):
        return abs(c - p.probs[i] * n_states)
    while sum(counts) != n_states:
        if sum(counts) > n_states:
            i = min((i for i in range(len(counts)) if counts[i] > 1),
                    key=lambda i: (cost(i, counts[i] // 2), i))
            counts[i] //= 2
        else:
            i = min((i for i in range(len(counts))
                     if sum(counts) - counts[i] + 2 * counts[i] <= n_states),
                    key=lambda i: (cost(i, counts[i] * 2), i))
            counts[i] *= 2
    return counts


def build_table(p, codec_name, n_states, tolerance=1e-9, verbose=True):
    """Builder dispatch with the automatic prefix-code fallback.

    The tree-based layouts are only used when their analytic reduction is
    positive; otherwise the plain one-state prefix coder is returned (the
    reduction formulas clamp at zero exactly when the scheme cannot win).
    """
    tree = prefix_codes.build_huffman(p)
    if codec_name == "huffman":
        return _one_state_table(p, tree)
    if codec_name in ("type1", "type2"):
        mets = prefix_codes.tree_metrics(tree, p)
        if codec_name == "type1":
            drop = analysis.delta_type1(mets.right_weight, n_states)
        else:
            drop = analysis.delta_type2(mets.right_weight)
        if drop <= tolerance:
            if verbose:
                print("reduction is zero at this tree; "
                      "falling back to plain prefix coding")
            return _one_state_table(p, tree)
        if codec_name == "type1":
            return constructors.build_type1(tree, p, n_states)
        return constructors.build_type2(tree, p)
    if codec_name == "saeds-case1":
        # power-of-two counts always divide a power-of-two total, so snap
        # the budget down to keep every ratio integral
        n_eff = 1 << max(n_states.bit_length() - 1,
                         (len(p.symbols) - 1).bit_length())
        if n_eff != n_states and verbose:
            print(f"equal-ratio layout uses {n_eff} of the "
                  f"{n_states} requested states")
        return constructors.build_saeds_case1(p, _pow2_counts(p, n_eff))
    if codec_name == "saeds-case2":
        return constructors.build_saeds_case2(
            p, tans.quantize_counts(p, n_states))
    if codec_name == "saeds-case3":
        return constructors.build_saeds_case3(
            p, tans.quantize_counts(p, n_states))
    if codec_name == "large-n":
        table, _ = constructors.build_large_n(
            p, tans.quantize_counts(p, n_states))
        return table
    if codec_name == "tans":
        return tans.tans_to_aeds(tans.build_tans(p, n_states))
    raise ValueError(f"unknown codec {codec_name!r}")


# ---------------------------------------------------------------------------
# container


def _encode_blocks(reader, table, sink):
    """Second compression pass: read BLOCK_SYMBOLS at a time, frame each
    block on its own, and count blocks and payload bits."""
    n_blocks = 0
    payload_bits = 0
    while True:
        chunk = reader(BLOCK_SYMBOLS)
        if not chunk:
            break
        stream = codec.encode(table, chunk)
        w = BitWriter()
        w.write_leb128(len(stream.data))
        w.write_bytes(stream.data)
        sink(w.getvalue())
        n_blocks += 1
        payload_bits += stream.exact_payload_bits
    return n_blocks, payload_bits


def write_container(data, table, embed=True):
    """In-memory convenience wrapper around the streaming writer."""
    out = bytearray()
    pos = 0

    def reader(n):
        nonlocal pos
        chunk = data[pos:pos + n]
        pos += n
        return chunk

    write_container_stream(reader, out.extend, zlib.crc32(data), len(data),
                           table, embed=embed)
    return bytes(out)


def write_container_stream(reader, sink, crc, size, table, embed=True):
    head = bytearray(CONTAINER_MAGIC)
    head.append(CONTAINER_VERSION)
    if size == 0:
        head.append(FLAG_EMPTY)
        head += crc.to_bytes(4, "big")
        sink(bytes(head))
        return 0
    head.append(FLAG_EMBEDDED if embed else 0)
    head += crc.to_bytes(4, "big")
    blob = codec.serialize_table(table)
    w = BitWriter()
    if embed:
        w.write_leb128(len(blob))
        w.write_bytes(blob)
    else:
        w.write_bytes(blob[-32:])  # digest only; table travels separately
    w.write_leb128(-(-size // BLOCK_SYMBOLS))
    sink(bytes(head) + w.getvalue())
    _, payload_bits = _encode_blocks(reader, table, sink)
    return payload_bits


def read_container(blob, side_table=None, sink=None):
    """Decode a container; returns the data (or b"" when ``sink`` consumes
    it block by block).  The stored checksum is always verified."""
    if len(blob) < 10 or blob[:4] != CONTAINER_MAGIC:
        raise MalformedStream("not a container")
    if blob[4] != CONTAINER_VERSION:
        raise MalformedStream(f"container version {blob[4]}")
    flags = blob[5]
    crc = int.from_bytes(blob[6:10], "big")
    if flags & FLAG_EMPTY:
        if crc != zlib.crc32(b""):
            raise HashMismatch("empty container with nonzero checksum")
        return b""
    r = BitReader(blob, 80)
    if flags & FLAG_EMBEDDED:
        tlen = r.read_leb128()
        table_bytes = bytes(r.read(8) for _ in range(tlen))
        table = codec.deserialize_table(table_bytes)
    else:
        digest = bytes(r.read(8) for _ in range(32))
        if side_table is None:
            raise MalformedStream("container references a side table file; "
                                  "pass one with --table")
        table = codec.deserialize_table(side_table)
        if codec.serialize_table(table)[-32:] != digest:
            raise HashMismatch("side table does not match the container")
    n_blocks = r.read_leb128()
    out = bytearray()
    running = 0
    for _ in range(n_blocks):
        blen = r.read_leb128()
        stream = Bitstream(bytes(r.read(8) for _ in range(blen)))
        piece = bytes(codec.decode(table, stream))
        running = zlib.crc32(piece, running)
        if sink is None:
            out += piece
        else:
            sink(piece)
    if running != crc:
        raise HashMismatch("decompressed data fails its checksum")
    return bytes(out)


# ---------------------------------------------------------------------------
# subcommands


def cmd_compress(args):
    # first pass: chunked histogram
    counts = [0] * 256
    size = 0
    crc = 0
    with open(args.input, "rb") as fh:
        while True:
            chunk = fh.read(1 << 20)
            if not chunk:
                break
            size += len(chunk)
            crc = zlib.crc32(chunk, crc)
            for b in chunk:
                counts[b] += 1
    if size == 0:
        with open(args.output, "wb") as out:
            write_container_stream(lambda n: b"", out.write, crc, 0, None)
        print("empty input: wrote a header-only container")
        return EXIT_OK
    p = model.validate_distribution(
        [(b, counts[b]) for b in range(256) if counts[b]])
    table = build_table(p, args.codec, args.states, args.tolerance)
    if args.table_out:
        with open(args.table_out, "wb") as fh:
            fh.write(codec.serialize_table(table))
    # second pass: blocked encode straight to the output file
    with open(args.input, "rb") as src, open(args.output, "wb") as out:
        payload_bits = write_container_stream(
            src.read, out.write, crc, size, table,
            embed=args.table_out is None)
    written = os.path.getsize(args.output)
    try:
        mean_bits = analysis.stationary_distribution(table, p).mean_bits
        analytic = f"{mean_bits:.6f}"
    except AedsError:
        analytic = "n/a (chain not ergodic)"
    print(f"symbols: {size}")
    print(f"analytic bits/symbol: {analytic}")
    print(f"payload bits/symbol: {payload_bits / size:.6f}")
    print(f"container: {written} bytes "
          f"({8 * written / size:.4f} bits/byte incl. table)")
    return EXIT_OK


def cmd_decompress(args):
    with open(args.input, "rb") as fh:
        blob = fh.read()
    side = None
    if args.table:
        with open(args.table, "rb") as fh:
            side = fh.read()
    restored = 0
    with open(args.output, "wb") as out:
        def sink(piece):
            nonlocal restored
            restored += len(piece)
            out.write(piece)
        read_container(blob, side_table=side, sink=sink)
    print(f"restored {restored} bytes")
    return EXIT_OK


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)
    print(f"wrote {len(rows)} rows to {path}")


def _figure_rows(figure):
    pr_grid = [0.5 + 0.005 * i for i in range(100)]
    if figure == "delta-type1":
        ns = (2, 3, 4, 8, 16, 32)
        header = ["right_weight"] + [f"delta_n{n}" for n in ns]
        rows = [[w] + [analysis.delta_type1(w, n) for n in ns]
                for w in pr_grid]
        return header, rows
    if figure == "delta-type2":
        header = ["right_weight", "delta_two_state", "delta_five_state"]
        rows = [[w, analysis.delta_type1(w, 2), analysis.delta_type2(w)]
                for w in pr_grid]
        return header, rows
    if figure == "worst-case":
        ns = (2, 4, 16)
        header = (["p1", "huffman"] + [f"type1_n{n}" for n in ns]
                  + ["type2"])
        rows = [[w, analysis.huffman_worst_redundancy(w)]
                + [analysis.type1_worst_redundancy(w, n) for n in ns]
                + [analysis.type2_worst_redundancy(w)]
                for w in pr_grid]
        return header, rows
    if figure == "uniform-n2":
        header = ["m", "huffman_redundancy", "reduction_huffman_tree",
                  "reduction_best_tree"]
        rows = []
        for m in range(16, 129):
            best = analysis.optimal_uniform_split(m, 2)
            rows.append([m, analysis.uniform_huffman_redundancy(m),
                         analysis.delta_type1(
                             analysis.uniform_huffman_right_weight(m), 2),
                         best.reduction])
        return header, rows
    if figure == "uniform-nsweep":
        ns = (2, 3, 4, 6, 8, 16)
        header = ["m"] + [f"reduction_n{n}" for n in ns]
        rows = [[m] + [analysis.optimal_uniform_split(m, n).reduction
                       for n in ns]
                for m in range(64, 129)]
        return header, rows
    if figure == "uniform-type2":
        header = ["m", "reduction_two_state", "reduction_five_state",
                  "reduction_huffman_tree"]
        rows = []
        for m in range(64, 129):
            rows.append([m,
                         analysis.optimal_uniform_split(m, 2).reduction,
                         analysis.optimal_uniform_split(
                             m, variant="type2").reduction,
                         analysis.delta_type1(
                             analysis.uniform_huffman_right_weight(m), 2)])
        return header, rows
    if figure == "binary":
        ns = (2, 4, 8, 16)
        header = (["r", "source"] + [f"type1_n{n}" for n in ns]
                  + ["type2", "envelope"])
        rows = []
        for i in range(500):
            r = 0.5 + 0.001 * i
            per_n = [analysis.binary_redundancy(r, "type1", n)
                     for n in range(2, 17)]
            two = analysis.binary_redundancy(r, "type2")
            rows.append([r, analysis.binary_redundancy(r)]
                        + [analysis.binary_redundancy(r, "type1", n)
                           for n in ns]
                        + [two, min(min(per_n), two)])
        return header, rows
    if figure == "table1":
        header = ["m", "m_right", "m_left"]
        rows = []
        for m in range(73, 110):
            best = analysis.optimal_uniform_split(m, 2)
            rows.append([m, best.right_items, best.left_items])
        return header, rows
    if figure == "largeN-sweep":
        p = model.validate_distribution([("a", 3), ("b", 3), ("c", 2)])
        h = model.entropy(p)
        header = ["n_states", "mean_bits", "entropy", "excess_times_n",
                  "smallest_gamma"]
        rows = []
        n = 8
        while n <= 4096:
            table, _ = constructors.build_large_n(
                p, [3 * n // 8, 3 * n // 8, n // 4])
            rep = analysis.stationary_distribution(table, p)
            g = analysis.smallest_dominating_gamma(rep.probs, n)
            rows.append([n, rep.mean_bits, h, (rep.mean_bits - h) * n,
                         -1 if g is None else g])
            n *= 2
        return header, rows
    raise ValueError(f"unknown figure {figure!r}")


def cmd_figures(args):
    header, rows = _figure_rows(args.figure)
    _write_csv(args.csv, header, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _parser():
    parser = argparse.ArgumentParser(
        prog="aeds",
        description="Backward-encoding table codes: compress, decompress, "
                    "and reproduce the analytic curves.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compress", help="two-pass compression of a file")
    c.add_argument("--input", required=True)
    c.add_argument("--output", required=True)
    c.add_argument("--codec", choices=CODECS, default="type1")
    c.add_argument("--states", type=int, default=2,
                   help="state budget N for the table builders")
    c.add_argument("--seed", type=int, default=0,
                   help="accepted for interface stability; compression "
                        "is deterministic")
    c.add_argument("--tolerance", type=float, default=1e-9)
    c.add_argument("--table-out", default=None,
                   help="write the table to a side file and store only "
                        "its hash in the container")
    c.set_defaults(func=cmd_compress)

    d = sub.add_parser("decompress", help="restore a compressed container")
    d.add_argument("--input", required=True)
    d.add_argument("--output", required=True)
    d.add_argument("--table", default=None,
                   help="side table file for containers that carry only "
                        "a table hash")
    d.set_defaults(func=cmd_decompress)

    f = sub.add_parser("figures", help="dump an analytic series as CSV")
    f.add_argument("--figure", choices=FIGURES, required=True)
    f.add_argument("--csv", required=True)
    f.set_defaults(func=cmd_figures)
    return parser


def main(argv=None):
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AedsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # invariant violation: report and flag
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
