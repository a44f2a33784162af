"""Writes the bundled quarterly snapshot from the statsmodels macrodata set."""
from pathlib import Path

from statsmodels.datasets import macrodata

SERIES = ["tbilrate", "realgdp", "cpi", "unemp", "realcons", "m1", "realinv", "realdpi"]

out = Path(__file__).resolve().parent / "macro"
out.mkdir(exist_ok=True)
df = macrodata.load_pandas().data
for name in SERIES:
    with open(out / f"{name}.csv", "w") as fh:
        fh.write("DATE,VALUE\n")
        for _, row in df.iterrows():
            month = 3 * (int(row["quarter"]) - 1) + 1
            fh.write(f"{int(row['year']):04d}-{month:02d}-01,{float(row[name])!r}\n")
