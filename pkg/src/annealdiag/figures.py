"""CSV figure source data from campaign records (no plotting).

Column orders are fixed and documented here:

* axis sweeps (``env-sweep``, ``coupling-sweep``, ``disorder-sweep``,
  ``pause-sweep``, ``frustration-sweep``): ``<axis>,seed,M,bootstrap_std``
  in one file and ``<axis>,seed,d_tv,sampling_floor`` in a second,
  sorted by axis value then seed.
* ``scatter``: ``M,d_tv,classification,condition_hash``.
* ``gap-hist`` comes from :func:`annealdiag.landscape.write_gap_histogram`.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .campaign import ConditionRecord

__all__ = ["FIGURE_IDS", "emit_figure_data"]

_AXIS_FOR = {
    "env-sweep": "env_size",
    "coupling-sweep": "lambda",
    "disorder-sweep": "W",
    "pause-sweep": "s_p",
    "frustration-sweep": "p_S",
}

FIGURE_IDS = tuple(_AXIS_FOR) + ("scatter",)


def _ok(records):
    out = [r for r in records if r.error is None and r.memory]
    if not out:
        raise ValueError("no successful records to emit")
    return out


def emit_figure_data(records: list[ConditionRecord], figure_id: str, out_dir: str | Path) -> list[Path]:
    """Write the CSV files for one figure id; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = _ok(records)

    if figure_id == "scatter":
        path = out_dir / "scatter.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["M", "d_tv", "classification", "condition_hash"])
            for r in sorted(records, key=lambda r: r.condition_hash):
                w.writerow(
                    [
                        f"{r.memory['M']:.8g}",
                        f"{r.thermal['d_tv_classical']:.8g}",
                        r.thermal["classification"],
                        r.condition_hash,
                    ]
                )
        return [path]

    if figure_id not in _AXIS_FOR:
        raise ValueError(f"unknown figure id {figure_id!r}; use one of {FIGURE_IDS}")
    axis = _AXIS_FOR[figure_id]
    rows = sorted(records, key=lambda r: (r.condition[axis], r.condition["seed"]))
    mem_path = out_dir / f"{figure_id}_memory.csv"
    with open(mem_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([axis, "seed", "M", "bootstrap_std"])
        for r in rows:
            std = r.memory.get("bootstrap_std")
            w.writerow(
                [
                    r.condition[axis],
                    r.condition["seed"],
                    f"{r.memory['M']:.8g}",
                    "" if std is None else f"{std:.8g}",
                ]
            )
    dtv_path = out_dir / f"{figure_id}_dtv.csv"
    with open(dtv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([axis, "seed", "d_tv", "sampling_floor"])
        for r in rows:
            w.writerow(
                [
                    r.condition[axis],
                    r.condition["seed"],
                    f"{r.thermal['d_tv_classical']:.8g}",
                    f"{r.thermal['sampling_floor']:.8g}",
                ]
            )
    return [mem_path, dtv_path]
