import os
from fractions import Fraction

import pytest

from expiretreap.bench import (
    ROW_FIELDS,
    STRUCTURES,
    BenchReport,
    Row,
    ScenarioConfig,
    emit_csv,
    histogram,
    load_config,
    lookup_bench,
    make_structure,
    rate_of_expiration,
    reader_stress,
    run_scenario,
    structure_name,
    traversal_bench,
    write_reports,
)
from expiretreap.errors import ConfigError, UndefinedRoE


def test_rate_of_expiration_examples():
    assert rate_of_expiration(5, 95) == Fraction(1, 20)
    assert rate_of_expiration(0, 10) == 0
    assert rate_of_expiration(7, 0) == 1
    with pytest.raises(UndefinedRoE):
        rate_of_expiration(0, 0)
    with pytest.raises(ValueError):
        rate_of_expiration(-1, 3)


def test_structure_names():
    assert structure_name("TreapHashed") == "treap-hashed"
    assert structure_name("RedBlackHeap") == "redblack+heap"
    assert structure_name("AvlHeap") == "avl+heap"
    assert structure_name("Hash") == "hash"
    with pytest.raises(ConfigError):
        structure_name("btree")


def small(structure, **kw):
    base = dict(structure=structure, b=0.5, l=9, n=8000, lifetime="fixed:128", target_db_size=2000,
                ops_per_aggregation=1500, seed=3)
    base.update(kw)
    return ScenarioConfig(**base)


def test_treap_live_size_oscillates_around_target():
    # 40,000 live records: ~156 arrivals per ms against a 256 ms lifetime, two lifetimes long.
    cfg = ScenarioConfig(structure="treap", b=0.5, l=9, n=80_000, lifetime="fixed:256",
                         target_db_size=40_000, ops_per_aggregation=10_000, seed=1)
    rep = run_scenario(cfg)
    lives = [r.live_size for r in rep.rows]
    assert all(abs(x - 40_000) < 40_000 * 0.02 for x in lives)
    assert rep.summary["expirations"] == pytest.approx(80_000, rel=0.02)


def test_zero_length_trace():
    rep = run_scenario(small("treap", n=0))
    assert rep.rows == []
    assert rep.summary["rows"] == 0


@pytest.mark.parametrize("structure", sorted(STRUCTURES))
def test_conservation_per_row(structure):
    rep = run_scenario(small(structure, remove_fraction=0.1))
    live = rep.start_live
    assert rep.rows
    for r in rep.rows:
        assert r.inserts - r.expirations - r.removes == r.live_size - live
        live = r.live_size
    assert sum(r.removes for r in rep.rows) > 0
    assert rep.rows[-1].interval_index == len(rep.rows) - 1


def test_rows_close_at_aggregation_size():
    rep = run_scenario(small("treap"))
    # A row closes as soon as it reaches the threshold; expiration batches may overshoot.
    for r in rep.rows[:-1]:
        assert r.ops >= 1500
    assert sum(r.ops for r in rep.rows) == rep.total_ops


def test_deterministic_counts():
    a = run_scenario(small("redblack+heap", remove_fraction=0.05))
    b = run_scenario(small("redblack+heap", remove_fraction=0.05))
    strip = lambda rep: [(r.inserts, r.expirations, r.removes, r.live_size, r.heap_entries) for r in rep.rows]
    assert strip(a) == strip(b)


def counts(rep):
    return [(r.inserts, r.expirations, r.removes, r.live_size) for r in rep.rows]


def test_eager_structures_agree():
    reps = {s: run_scenario(small(s, remove_fraction=0.05)) for s in
            ("treap", "treap-hashed", "avl+heap", "redblack+heap", "hash+heap")}
    ref = counts(reps["treap"])
    for name, rep in reps.items():
        assert counts(rep) == ref, name


def test_cleansing_structures_agree():
    reps = [run_scenario(small(s, roe=0.25)) for s in ("avl", "redblack", "hash")]
    assert counts(reps[0]) == counts(reps[1]) == counts(reps[2])
    # Cleansing is lazy: the live size never drops below the eager one.
    eager = run_scenario(small("treap", roe=0.25))
    assert sum(r.expirations for r in reps[0].rows) <= sum(r.expirations for r in eager.rows)


def test_roe_series_matches_counters():
    rep = run_scenario(small("treap"))
    for r, roe in zip(rep.rows, rep.roe_series()):
        assert roe == rate_of_expiration(r.expirations, r.live_size)


def test_heap_variants_double_memory_proxy():
    t = run_scenario(small("treap"))
    h = run_scenario(small("avl+heap"))
    assert h.peak_memory_proxy() >= 1.9 * t.peak_memory_proxy()
    assert all(r.heap_entries == 0 for r in t.rows)


def test_cleansing_interval_from_roe():
    assert small("avl", roe=0.05).cleansing_ms == round(0.05 * 128)
    assert small("avl", cleansing_ms=7).cleansing_ms == 7
    with pytest.raises(ConfigError):
        small("avl", roe=0)
    with pytest.raises(ConfigError):
        small("avl", ops_per_aggregation=0)
    with pytest.raises(ConfigError):
        small("avl", measurement="latency")
    with pytest.raises(ConfigError):
        small("avl", lifetime="forever")


def test_load_config(tmp_path):
    p = tmp_path / "s.cfg"
    p.write_text("# scenario\nstructure = RedBlackHeap\nb = 0.7\nl=4\nn = 100\nlifetime = exp:20\n"
                 "target_db_size = 50  # comment\nseed = 9\n")
    cfg = load_config(str(p))
    assert cfg.structure == "redblack+heap" and cfg.b == 0.7 and cfg.seed == 9
    p.write_text("colour = blue\n")
    with pytest.raises(ConfigError, match="s.cfg:1"):
        load_config(str(p))
    p.write_text("l = four\n")
    with pytest.raises(ConfigError, match="bad value"):
        load_config(str(p))
    with pytest.raises(ConfigError, match="missing.cfg"):
        load_config(str(tmp_path / "missing.cfg"))


def test_emit_csv(tmp_path):
    rep = run_scenario(small("hash+heap"))
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(rep, str(p1))
    emit_csv(rep, str(p2))
    text = p1.read_text()
    assert text == p2.read_text()
    lines = text.splitlines()
    assert lines[0] == ",".join(ROW_FIELDS)
    assert len(lines) == len(rep.rows) + 1

    empty = tmp_path / "e.csv"
    emit_csv(BenchReport("treap"), str(empty))
    assert empty.read_text() == ",".join(ROW_FIELDS) + "\n"

    with pytest.raises(OSError, match="nope"):
        emit_csv(rep, str(tmp_path / "nope" / "x.csv"))


def test_write_reports(tmp_path):
    rep = run_scenario(small("treap"))
    paths = write_reports(rep, str(tmp_path / "out"), stem="t")
    assert [os.path.basename(p) for p in paths] == ["t-rows.csv", "t-summary.csv", "t-pdf.csv"]
    summary = (tmp_path / "out" / "t-summary.csv").read_text().splitlines()
    assert summary[0] == "metric,value"
    assert any(line.startswith("maintenance_ms,") for line in summary)


def test_histogram():
    assert histogram([]) == []
    assert histogram([2.0, 2.0]) == [(2.0, 2.0, 1.0)]
    h = histogram([float(x) for x in range(100)], bins=50)
    assert len(h) == 50
    assert sum((hi - lo) * d for lo, hi, d in h) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        histogram([1.0], bins=0)


def test_pdf_uses_rows():
    rep = BenchReport("x", rows=[Row(i, float(i), 1, 0, 0, 1, 0, 0) for i in range(10)])
    assert len(rep.pdf(5)) == 5


def test_lookup_bench_basics():
    assert lookup_bench("treap", 1000, 0).lookups == 0
    a = lookup_bench("treap", 2000, 500, seed=4)
    b = lookup_bench("avl", 2000, 500, seed=4)
    assert a.keys_digest == b.keys_digest
    assert a.ops_per_second > 0
    s = make_structure("redblack", [(k, 10, k) for k in range(300)])
    assert lookup_bench(s, 300, 100).lookups == 100
    with pytest.raises(ValueError):
        lookup_bench(s, 301, 100)


def test_lookup_probes_are_seeded():
    a = lookup_bench("treap", 2000, 5000, seed=4)
    b = lookup_bench("treap", 2000, 5000, seed=4)
    c = lookup_bench("treap", 2000, 5000, seed=5)
    assert a.keys_digest == b.keys_digest != c.keys_digest
    assert a.lookups == 5000 and a.seconds > 0 and a.ops_per_second > 0


@pytest.mark.parametrize("structure", ["treap", "treap-hashed", "avl", "redblack", "hash"])
def test_traversal_visits_everything(structure):
    assert traversal_bench(structure, 5000).visited == 5000
    assert traversal_bench(structure, 0).visited == 0


def test_reader_stress_small():
    res = reader_stress(readers=4, total_lookups=20_000, updates=5000, key_space=500, seed=2)
    assert res.torn_reads == 0, res.first_error
    assert res.lookups == 20_000 and res.updates == 5000


def test_lookup_and_traversal_scenarios():
    rep = run_scenario(ScenarioConfig(structure="avl", measurement="lookup", target_db_size=1000, n_lookups=100))
    assert rep.summary["lookups"] == 100 and rep.rows == []
    rep = run_scenario(ScenarioConfig(structure="hash", measurement="traversal", target_db_size=1000))
    assert rep.summary["visited"] == 1000
