"""Print the desk-scale protocol table from a result cache.

The cells are produced by ``python -m ccrsim.experiments --cache DIR``
(about six minutes of CPU per cell, fifteen cells). This script only reads
the cached JSON files, so it is instant.

Run with:  python demos/protocol_report.py [acceptance_cache]
"""
import json
import sys
from pathlib import Path

import numpy as np

cache = Path(sys.argv[1] if len(sys.argv) > 1 else "acceptance_cache")
cells = {}
for f in sorted(cache.glob("*.json")):
    r = json.loads(f.read_text())
    s = r["settings"]
    cells.setdefault((s["scenario"], s["variant"]), []).append(r)

if not cells:
    sys.exit(f"no cached cells in {cache}")

print(f"{'scenario':16s} {'variant':9s} seeds  danger   success  dist    cpu-min")
for (scenario, variant), rows in cells.items():
    summ = [r["summary"] for r in rows]
    print(f"{scenario:16s} {variant:9s} {len(rows):5d}  "
          f"{np.mean([x['dangerous_behavior_frequency'] for x in summ]):.4f}   "
          f"{np.mean([x['success_rate'] for x in summ]):.3f}    "
          f"{np.mean([x['mean_distance_to_danger_center'] for x in summ]):.3f}   "
          f"{max(r['train_cpu_seconds'] for r in rows) / 60:.1f}")
