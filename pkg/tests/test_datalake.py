import pytest

from cellsleep.datalake import (
    CSV_HEADER,
    Datalake,
    DuplicateKeyError,
    KpmRecord,
    read_csv,
)


def make_rows(ts, n=63):
    return [
        KpmRecord(imsi=i + 1, timestamp_ms=ts, serving_cell_id=i % 7,
                  dl_throughput_mbps=1.5 * i, sinr_db=10.0 + i,
                  rsrp_dbm=-80.0 - i, demand_mbps=3.0, backlog_mbits=0.1 * i)
        for i in range(n)
    ]


def test_insert_fresh_batch():
    lake = Datalake()
    assert lake.insert_ue_rows(make_rows(0)) == 63
    assert len(lake) == 63


def test_reinsert_same_batch_fails_atomically():
    lake = Datalake()
    rows = make_rows(100)
    lake.insert_ue_rows(rows)
    with pytest.raises(DuplicateKeyError) as exc:
        lake.insert_ue_rows(rows)
    assert exc.value.key == (1, 100)
    assert len(lake) == 63


def test_partial_overlap_rejects_whole_batch():
    lake = Datalake()
    lake.insert_ue_rows(make_rows(0, n=10))
    overlap = make_rows(0, n=3) + make_rows(100, n=5)
    with pytest.raises(DuplicateKeyError):
        lake.insert_ue_rows(overlap)
    # nothing from the failed batch landed
    assert len(lake) == 10
    assert lake.query_window(100, 200) == []


def test_intra_batch_duplicate_rejected():
    lake = Datalake()
    rows = make_rows(0, n=2) + make_rows(0, n=1)
    with pytest.raises(DuplicateKeyError):
        lake.insert_ue_rows(rows)
    assert len(lake) == 0


def test_empty_batch():
    assert Datalake().insert_ue_rows([]) == 0


def test_query_window_counts():
    lake = Datalake()
    for k in range(10):
        lake.insert_ue_rows(make_rows(k * 100))
    assert len(lake.query_window(0, 1000)) == 630
    assert len(lake.query_window(0, 1000, imsi=5)) == 10
    assert len(lake.query_window(0, 100)) == 63  # half-open window
    assert lake.query_window(2000, 3000) == []
    assert lake.query_window(5, 5) == []


def test_query_window_ordering_and_filters():
    lake = Datalake()
    lake.insert_ue_rows(make_rows(100))
    lake.insert_ue_rows(make_rows(0))
    rows = lake.query_window(0, 200)
    keys = [(r.timestamp_ms, r.imsi) for r in rows]
    assert keys == sorted(keys)
    by_cell = lake.query_window(0, 200, cell_id=3)
    assert all(r.serving_cell_id == 3 for r in by_cell)


def test_query_window_rejects_inverted_range():
    with pytest.raises(ValueError):
        Datalake().query_window(100, 0)


def test_insert_then_query_identity():
    lake = Datalake()
    rows = make_rows(300, n=7)
    lake.insert_ue_rows(rows)
    got = lake.query_window(300, 301)
    assert got == sorted(rows, key=lambda r: (r.timestamp_ms, r.imsi))


def test_export_header_and_count(tmp_path):
    lake = Datalake()
    for k in range(10):
        lake.insert_ue_rows(make_rows(k * 100))
    path = tmp_path / "kpm.csv"
    assert lake.export_csv(str(path)) == 630
    first_line = path.read_text().splitlines()[0]
    assert first_line == CSV_HEADER
    assert CSV_HEADER == ("imsi,timestamp_ms,serving_cell_id,"
                          "dl_throughput_mbps,sinr_db,rsrp_dbm,"
                          "demand_mbps,backlog_mbits")


def test_export_empty_store(tmp_path):
    path = tmp_path / "empty.csv"
    assert Datalake().export_csv(str(path)) == 0
    assert path.read_text().splitlines() == [CSV_HEADER]


def test_export_roundtrip_lossless(tmp_path):
    lake = Datalake()
    rows = make_rows(0) + make_rows(100)
    lake.insert_ue_rows(rows)
    path = tmp_path / "kpm.csv"
    lake.export_csv(str(path))
    parsed = read_csv(str(path))
    assert sorted(parsed, key=lambda r: (r.timestamp_ms, r.imsi)) == \
        sorted(rows, key=lambda r: (r.timestamp_ms, r.imsi))


def test_export_unwritable_path_raises():
    lake = Datalake()
    lake.insert_ue_rows(make_rows(0, n=1))
    with pytest.raises(OSError):
        lake.export_csv("/nonexistent-dir/kpm.csv")


def test_snapshot_is_independent():
    lake = Datalake()
    lake.insert_ue_rows(make_rows(0, n=5))
    snap = lake.snapshot()
    lake.insert_ue_rows(make_rows(100, n=5))
    assert len(snap) == 5
    assert len(lake) == 10
