"""Walk through the 10-bit grammar: which words survive, and why the rest fail."""

from collections import Counter

from helmfep.grammar import Pattern, enumerate_wellformed, violations, wellformed_signs

words = enumerate_wellformed()
print("well-formed words:", len(words))
print("first five:", [p.bits for p in words[:5]])
print("last five: ", [p.bits for p in words[-5:]])

# a few hand-picked words and the rules they break
for bits in ["1010001010", "0110110110", "1001101101", "1101100100", "1100001111"]:
    found = violations(Pattern(bits))
    print(bits, "ok" if not found else ", ".join(f"{v.rule.name}@{v.position}" for v in found))

# how often each rule is the first thing to go wrong over all 1024 words
first = Counter()
for code in range(1024):
    v = violations(Pattern(format(code, "010b")))
    if v:
        first[v[0].rule.name] += 1
for name, n in first.most_common():
    print(f"{name:20s} {n}")

# the sign form is what the network sees
signs = wellformed_signs()
print(signs.shape, signs[0])
print("mean activity per bit:", signs.mean(axis=0).round(2))
