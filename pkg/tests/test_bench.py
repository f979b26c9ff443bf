import pytest

from pumi.bench import CSV_HEADER, check_equivalence, make_workload, run_benchmark, time_structure


def test_workload_sizing():
    w = make_workload(10000, seed=0)
    assert len(w.sites) == 10000
    # the outer ring of the 50x50 candidate grid is partly outside the hull
    assert 48 * 48 <= len(w.centers) < 2500
    assert w.q == 36


def test_equivalence_check_passes():
    check_equivalence(make_workload(2000, seed=1))


def test_run_benchmark_rows():
    rows = run_benchmark([500, 1000], seed=0)
    assert [(r["structure"], r["N"]) for r in rows] == [
        (s, n) for n in (500, 1000) for s in ("block", "kdtree", "brute")]
    for r in rows:
        assert set(r) == set(CSV_HEADER)
        assert r["queries_per_second"] > 0


def test_brute_skipped_when_large():
    rows = run_benchmark([1000], structures=("block", "brute"), brute_max_n=500)
    assert [r["structure"] for r in rows] == ["block"]


def test_time_structure_counts_queries():
    w = make_workload(400)
    tb, tq, nq = time_structure("kdtree", w, max_queries=10)
    assert nq == 10 and tb >= 0 and tq >= 0
    with pytest.raises(ValueError):
        time_structure("octree", w)
