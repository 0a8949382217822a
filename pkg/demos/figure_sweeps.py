"""Run every built-in sweep preset and write plot-ready CSV files.

fig2: throughput vs the interferers' threshold, curves over the source's.
fig3: throughput vs interferer count (two strong-LoS interferers first).
fig4: error probability vs interferer count for SINR thresholds 2/4/8.
fig5: queue-drop probability vs slot duration, curves over the threshold.

The same data is available from the command line, e.g.
``uavlink sweep --preset fig2 --out fig2.csv``.
"""

from pathlib import Path

from uavlink.presets import PRESETS, run_preset
from uavlink.scenario_io import write_results

out_dir = Path(__file__).resolve().parent / "sweep_output"
out_dir.mkdir(exist_ok=True)

for name, preset in PRESETS.items():
    columns, rows = run_preset(name)
    path = out_dir / f"{name}.csv"
    write_results(rows, path, columns)
    print(f"{name}: {preset.description}")
    print(f"  wrote {len(rows)} rows -> {path}")
    head = ", ".join(columns)
    print(f"  columns: {head}")
    sample = rows[len(rows) // 2]
    print(f"  sample row: {sample}")
    print()
