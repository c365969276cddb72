"""Write the (155,64) Tanner code from its circulant exponent table (z = 31).

    python tools/make_tanner.py --out src/tscover/data/tanner_155.alist
"""

import argparse
import json
from pathlib import Path

from tscover.code import qc_expand, save_alist

TABLE = Path(__file__).resolve().parents[1] / "src/tscover/data/tanner_155_exponents.json"

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", required=True)
    doc = json.loads(TABLE.read_text())
    save_alist(qc_expand(doc["exponents"], doc["circulant_size"]), ap.parse_args().out)
