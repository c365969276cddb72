"""Write the (2640,1320) Margulis-type code over SL(2, Z_11).

Check node x (a group element) is joined to variable (x*g, 0) for g in S0
and to (x*h, 1) for h in S1, words in A = [[1,2],[0,1]], B = [[1,0],[2,1]]
and their inverses (lower case). This choice gives girth 8, exactly 1320
eight-cycles, full rank, and a private cycle edge in every (4,4) set.

    python tools/make_margulis.py --out src/tscover/data/margulis_2640.alist
"""

import argparse
import itertools

from tscover.code import SparseBitMatrix, save_alist

P = 11
S0 = ("A", "B", "Ab")
S1 = ("a", "B", "b")


def mul(x, y):
    a, b, c, d = x
    e, f, g, h = y
    return ((a * e + b * g) % P, (a * f + b * h) % P, (c * e + d * g) % P, (c * f + d * h) % P)


def inv(x):
    a, b, c, d = x
    return (d, -b % P, -c % P, a)


def word(w):
    gens = {"A": (1, 2, 0, 1), "B": (1, 0, 2, 1)}
    gens["a"], gens["b"] = inv(gens["A"]), inv(gens["B"])
    m = (1, 0, 0, 1)
    for ch in w:
        m = mul(m, gens[ch])
    return m


def margulis(s0=S0, s1=S1) -> SparseBitMatrix:
    els = [e for e in itertools.product(range(P), repeat=4) if (e[0] * e[3] - e[1] * e[2]) % P == 1]
    idx = {e: i for i, e in enumerate(els)}
    N = len(els)
    entries = [(idx[x], half * N + idx[mul(x, word(w))])
               for x in els for half, S in enumerate((s0, s1)) for w in S]
    return SparseBitMatrix.from_entries(N, 2 * N, entries)


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", required=True)
    save_alist(margulis(), ap.parse_args().out)
