"""Shared output helpers for the experiment scripts."""

import csv
import json
from pathlib import Path


def write_outputs(out_dir: str, stem: str, rows: list[dict], records: list) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"{stem}.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    with open(out / f"{stem}.json", "w") as fh:
        json.dump([r.to_json() for r in records], fh, indent=1)
    print(f"wrote {out / stem}.csv and {out / stem}.json")
