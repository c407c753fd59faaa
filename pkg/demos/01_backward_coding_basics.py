"""Walk through the core trick: encode back to front, decode front to back.

The five-state demo table over {a, b, c} shows why this direction matters:
each state owns its own prefix-free codeword set, and the codeword chosen
for a symbol depends on where the *backward* pass currently sits.  One
state even emits zero bits for 'b' -- the decoder recovers it purely from
the state it is in.
"""

from aeds import decode, demo_table, encode, validate_aeds

table = demo_table()
report = validate_aeds(table)
print("table:", table)
print("well-formed:", report.well_formed, "| ergodic:",
      report.ergodicity.irreducible and report.ergodicity.aperiodic)

print("\nper-state decoder codeword sets:")
for x in range(table.n_states):
    words = sorted(w.bits or "(empty)" for w in table.decoder_set(x))
    print(f"  {table.state_name(x)}: {words}")

word = "cbba"
print(f"\nencoding {word!r} (processed right to left):")
x = 0
steps = []
for t, s in enumerate(reversed(word)):
    cw, nxt = table.encoder[x][table.symbol_index(s)]
    steps.append((len(word) - t, s, table.state_name(x), cw.bits or "(empty)",
                  table.state_name(nxt)))
    x = nxt
for t, s, state, bits, nxt in steps:
    print(f"  t={t}: symbol {s!r} at {state} emits {bits:>7} -> {nxt}")

stream = encode(table, word)
print(f"\nstream: header names state {stream.initial_state}, "
      f"then payload bits {stream.payload_bits()[:6]} (plus padding)")
print("decoded:", "".join(decode(table, stream)))
