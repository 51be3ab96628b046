"""A small parameter sweep driven through the same code path as the CLI.

Writes a feature CSV, parses a flat config file, runs the grid and lists
the files produced: report.csv, one embedding CSV and scatter SVG per
cell, and hitcurve.csv.

Equivalent shell usage:  project sweep --config demo.cfg
"""

import tempfile
from pathlib import Path

from projlab.sweep import parse_config, sweep
from projlab.synthetic import gaussian_blobs

work = Path(tempfile.mkdtemp(prefix="projlab-demo-"))
X, y = gaussian_blobs(4, 50, dim=8, seed=1)
header = ",".join(f"f{j}" for j in range(X.shape[1])) + ",label"
rows = [",".join(f"{v:.17g}" for v in x) + f",blob{c}" for x, c in zip(X, y)]
(work / "blobs.csv").write_text("\n".join([header, *rows]) + "\n")

(work / "demo.cfg").write_text(
    "# LSP grid over control points and neighbors\n"
    "input = blobs.csv\n"
    "method = lsp\n"
    "control_points = 10, 25\n"
    "neighbors = 5, 10\n"
    f"output = {work / 'out'}\n"
)

config = parse_config(work / "demo.cfg")
for row, _ in sweep(config):
    print(row.method, row.params, f"silhouette={row.silhouette:.4f}")

print()
print((work / "out" / "report.csv").read_text())
for path in sorted((work / "out").iterdir()):
    print(path.name)
