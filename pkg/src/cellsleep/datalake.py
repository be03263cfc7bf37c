"""Telemetry stores.

UE-level KPM rows live in the :class:`Datalake` under the composite primary
key (imsi, timestamp_ms). Cell-centric energy-saving KPMs are a different
shape and are deliberately kept out of it; the environment holds the latest
:class:`CellKpmRow` per cell itself.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields


@dataclass(frozen=True)
class KpmRecord:
    """One UE-level telemetry row. (imsi, timestamp_ms) is unique per run."""

    imsi: int
    timestamp_ms: int
    serving_cell_id: int
    dl_throughput_mbps: float
    sinr_db: float
    rsrp_dbm: float
    demand_mbps: float
    backlog_mbits: float


@dataclass(frozen=True)
class CellKpmRow:
    """Per-cell KPMs for one control period; one row per (cell, timestamp)."""

    cell_id: int
    timestamp_ms: int
    dl_throughput_mbps: float
    num_attached_ues: int
    prb_utilization: float
    avg_sinr_db: float
    avg_rsrp_dbm: float
    power_w: float
    energy_j_last_period: float
    is_active: int
    ho_in: int
    ho_out: int
    avg_backlog_mbits: float
    qos_violation_ratio: float


CSV_FIELDS = tuple(f.name for f in fields(KpmRecord))
CSV_HEADER = ",".join(CSV_FIELDS)


class DuplicateKeyError(Exception):
    """Raised when a batch would overwrite an existing (imsi, timestamp) key."""

    def __init__(self, key: tuple[int, int]):
        super().__init__(f"duplicate (imsi, timestamp_ms) key: {key}")
        self.key = key


class Datalake:
    """In-memory UE-KPM store with ordered-map semantics and CSV export.

    One instance belongs to one simulation episode and is accessed only from
    that episode's thread; ``snapshot()`` hands out an independent copy for
    concurrent read-only use.
    """

    def __init__(self):
        self._rows: dict[tuple[int, int], KpmRecord] = {}

    def __len__(self) -> int:
        return len(self._rows)

    def insert_ue_rows(self, rows) -> int:
        """Insert a batch atomically; any duplicate key rejects the whole batch."""
        batch: dict[tuple[int, int], KpmRecord] = {}
        for row in rows:
            key = (row.imsi, row.timestamp_ms)
            if key in self._rows or key in batch:
                raise DuplicateKeyError(key)
            batch[key] = row
        self._rows.update(batch)
        return len(batch)

    def query_window(self, t_from_ms: int, t_to_ms: int,
                     imsi: int | None = None,
                     cell_id: int | None = None) -> list[KpmRecord]:
        """Rows with timestamp in [t_from_ms, t_to_ms), optionally filtered
        by imsi and/or serving cell, ordered by (timestamp, imsi)."""
        if t_from_ms > t_to_ms:
            raise ValueError("t_from_ms must be <= t_to_ms")
        hits = [
            r for r in self._rows.values()
            if t_from_ms <= r.timestamp_ms < t_to_ms
            and (imsi is None or r.imsi == imsi)
            and (cell_id is None or r.serving_cell_id == cell_id)
        ]
        hits.sort(key=lambda r: (r.timestamp_ms, r.imsi))
        return hits

    def all_rows(self) -> list[KpmRecord]:
        rows = list(self._rows.values())
        rows.sort(key=lambda r: (r.timestamp_ms, r.imsi))
        return rows

    def snapshot(self) -> "Datalake":
        copy = Datalake()
        copy._rows = dict(self._rows)
        return copy

    def export_csv(self, path: str) -> int:
        """Write all rows as RFC-4180 CSV in (timestamp, imsi) order; returns
        the number of data rows written."""
        rows = self.all_rows()
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(CSV_FIELDS)
            for r in rows:
                writer.writerow([getattr(r, name) for name in CSV_FIELDS])
        return len(rows)


def read_csv(path: str) -> list[KpmRecord]:
    """Parse a file produced by :meth:`Datalake.export_csv`."""
    out: list[KpmRecord] = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            out.append(KpmRecord(
                imsi=int(row["imsi"]),
                timestamp_ms=int(row["timestamp_ms"]),
                serving_cell_id=int(row["serving_cell_id"]),
                dl_throughput_mbps=float(row["dl_throughput_mbps"]),
                sinr_db=float(row["sinr_db"]),
                rsrp_dbm=float(row["rsrp_dbm"]),
                demand_mbps=float(row["demand_mbps"]),
                backlog_mbits=float(row["backlog_mbits"]),
            ))
    return out
