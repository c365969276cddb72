"""Generate a regular (3,6) LDPC code without 4-cycles, MacKay style.

Columns are filled one at a time. Each column picks 3 distinct checks among
those with spare degree, preferring the least used ones, and rejects any
check that already shares a column with another chosen check. Restarts
with the next seed offset on a dead end.

    python tools/make_mackay.py 504 --seed 1 --out src/tscover/data/mackay_504.alist
"""

import argparse

import numpy as np

from tscover.code import SparseBitMatrix, girth, save_alist


def build(n: int, dv: int, dc: int, rng: np.random.Generator):
    m = n * dv // dc
    deg = np.zeros(m, dtype=np.int64)
    nbrs = [set() for _ in range(m)]  # checks sharing a column with each check
    entries = []
    for v in range(n):
        chosen = []
        for _ in range(dv):
            ok = [c for c in range(m) if deg[c] < dc and c not in chosen
                  and not any(c in nbrs[d] for d in chosen)]
            if not ok:
                return None
            low = min(deg[c] for c in ok)
            pool = [c for c in ok if deg[c] == low]
            chosen.append(pool[rng.integers(len(pool))])
        for c in chosen:
            deg[c] += 1
            nbrs[c].update(d for d in chosen if d != c)
            entries.append((c, v))
    return SparseBitMatrix.from_entries(m, n, entries)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("n", type=int)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    for attempt in range(1000):
        H = build(args.n, 3, 6, np.random.default_rng([args.seed, attempt]))
        if H is not None and (girth(H) or 0) >= 6:
            save_alist(H, args.out)
            print(f"seed {args.seed} attempt {attempt}: girth {girth(H)}")
            return
    raise SystemExit("no 4-cycle-free code found")


if __name__ == "__main__":
    main()
