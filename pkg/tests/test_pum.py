import json

import numpy as np
import pytest

from pumi.errors import EmptyCover, OutOfDomain, TooFewPoints, UncoveredSites
from pumi.geometry import points_in_hull
from pumi.pum import (PumConfig, PumModel, ScatteredData, build_pum, default_workers,
                      global_rbf_interpolant)
from pumi.rbf import wendland_c2
from pumi.testdata import franke, franke_cloud, halton


def in_hull_points(model, n, seed):
    rng = np.random.default_rng(seed)
    out = []
    r = model.rect
    while len(out) < n:
        cand = np.column_stack([rng.uniform(r.min_x, r.max_x, 4 * n), rng.uniform(r.min_y, r.max_y, 4 * n)])
        out.extend(cand[points_in_hull(cand, model.hull)])
    return np.array(out[:n])


@pytest.fixture(scope="module")
def model1024():
    pts, f = franke_cloud(1024)
    return build_pum(ScatteredData(pts, f))


def test_interpolates_the_data(model1024):
    res = model1024.eval_batch(model1024.sites)
    assert res.ok.all()
    f = model1024.data.values
    assert np.max(np.abs(res.values - f)) <= 1e-6 * (1 + np.abs(f).max())


def test_layout_1024(model1024):
    m = model1024
    assert m.d_pu == 16
    assert m.info["candidate_centers"] == 256
    assert m.delta_pu == pytest.approx(m.box.side * np.sqrt(2) / 16)
    assert m.q == int(np.ceil(m.box.side / m.delta_pu))
    assert m.info["min_patch_size"] >= 1
    assert not m.info["cover_repaired"]


def test_weights_partition_of_unity(model1024):
    for p in in_hull_points(model1024, 300, 1):
        w = model1024.weights(p)
        vals = np.array([x for _, x in w])
        assert np.all(vals >= 0)
        assert abs(vals.sum() - 1) <= 1e-12


def test_weights_supported_on_patches(model1024):
    m = model1024
    for p in in_hull_points(m, 100, 2):
        for j, _ in m.weights(p):
            assert np.linalg.norm(m.centers[j] - p) < m.delta_pu
        near = np.flatnonzero(np.linalg.norm(m.centers - p, axis=1) < m.delta_pu)
        assert sorted(j for j, _ in m.weights(p)) == near.tolist()


def test_patches_hold_exactly_their_sites(model1024):
    m = model1024
    for j in range(0, m.d, 17):
        idx = m.locals[j].site_indices
        d = np.linalg.norm(m.sites - m.centers[j], axis=1)
        assert sorted(idx.tolist()) == np.flatnonzero(d <= m.delta_pu).tolist()


def test_patch_overlap_bounded(model1024):
    m = model1024
    counts = np.zeros(len(m.sites), dtype=int)
    for loc in m.locals:
        counts[loc.site_indices] += 1
    assert counts.min() >= 1
    assert counts.max() <= 25


def test_franke_accuracy(model1024):
    g = np.linspace(0.05, 0.95, 30)
    pts = np.array([(x, y) for x in g for y in g])
    res = model1024.eval_batch(pts)
    assert res.ok.all()
    err = res.values - franke(pts[:, 0], pts[:, 1])
    assert np.sqrt(np.mean(err ** 2)) < 1e-3


def test_constant_reproduced_approximately():
    pts = halton(400)
    m = build_pum(ScatteredData(pts, np.full(400, 2.0)))
    g = np.linspace(0.05, 0.95, 15)
    res = m.eval_batch(np.array([(x, y) for x in g for y in g]))
    assert np.max(np.abs(res.values - 2.0)) < 2e-2


@pytest.mark.parametrize("structure", ["block", "kdtree", "brute"])
def test_structures_build_identical_models(structure, model1024):
    m = build_pum(model1024.data, PumConfig(structure=structure))
    assert len(m.locals) == len(model1024.locals)
    for a, b in zip(m.locals, model1024.locals):
        assert np.array_equal(a.site_indices, b.site_indices)
        assert np.array_equal(a.lam, b.lam)


def test_threaded_build_matches_serial(model1024):
    m = build_pum(model1024.data, PumConfig(workers=4))
    for a, b in zip(m.locals, model1024.locals):
        assert np.array_equal(a.lam, b.lam)


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv("PUMI_THREADS", "3")
    assert default_workers() == 3
    monkeypatch.delenv("PUMI_THREADS")
    assert default_workers() == 1


@pytest.mark.parametrize("n", [16, 30, 60])
def test_single_patch_equals_global_solve(n):
    rng = np.random.default_rng(n)
    # corners keep the 2x2 candidate grid of small N inside the hull
    pts = np.vstack([[[0, 0], [1, 0], [0, 1], [1, 1]], rng.random((n - 4, 2))])
    f = np.cos(2 * pts[:, 0]) + pts[:, 1] ** 2
    eps = 0.8
    m = build_pum(ScatteredData(pts, f), PumConfig(epsilon=eps, delta_pu=10.0))
    assert all(len(loc.site_indices) == n for loc in m.locals)
    ref = global_rbf_interpolant(pts, f, eps)
    q = in_hull_points(m, 100, 3)
    np.testing.assert_allclose(m.eval_batch(q).values, ref(q), atol=1e-8)


def test_json_round_trip(model1024, tmp_path):
    path = tmp_path / "m.json"
    model1024.save(path)
    back = PumModel.load(path)
    q = in_hull_points(model1024, 100, 4)
    a, b = model1024.eval_batch(q).values, back.eval_batch(q).values
    assert np.all(np.abs(a - b) <= 1e-15 * np.maximum(np.abs(a), 1e-300))
    assert json.loads(path.read_text())["format"] == "pumi-model"


def test_from_dict_rejects_other_documents():
    with pytest.raises(ValueError):
        PumModel.from_dict({"format": "other"})


def test_eval_outside_hull(model1024):
    with pytest.raises(OutOfDomain):
        model1024.eval((1.5, 0.5))
    res = model1024.eval_batch([(0.5, 0.5), (1.5, 0.5), (-1, -1)])
    assert res.ok.tolist() == [True, False, False]
    assert res.failed == [1, 2]
    assert res.errors[1] == "outside hull"
    assert np.isnan(res.values[1])


def test_l_shaped_cloud():
    pts = halton(3000)
    pts = pts[(pts[:, 0] < 0.5) | (pts[:, 1] < 0.5)]
    f = franke(pts[:, 0], pts[:, 1])
    m = build_pum(ScatteredData(pts, f))
    assert m.info["dropped_empty_patches"] > 0
    res = m.eval_batch(pts)
    assert np.max(np.abs(res.values - f)) < 1e-6


def test_minimum_size_and_too_few():
    g = np.linspace(0, 1, 4)
    pts = np.array([(x, y) for x in g for y in g])
    m = build_pum(ScatteredData(pts, pts[:, 0]))
    assert m.d_pu == 2
    assert m.d <= 4
    np.testing.assert_allclose(m.eval_batch(pts).values, pts[:, 0], atol=1e-9)
    with pytest.raises(TooFewPoints):
        build_pum(ScatteredData(pts[:15], pts[:15, 0]))


def test_small_cloud_without_corner_sites_has_no_centers():
    # at N < 36 the candidate grid is the rectangle's corners only
    pts = halton(17)[1:]
    with pytest.raises(EmptyCover):
        build_pum(ScatteredData(pts, pts[:, 0]))


def test_cover_repair_and_failure():
    # a tight cluster plus far corners leaves sites outside every patch at the default radius
    rng = np.random.default_rng(5)
    pts = np.vstack([rng.random((60, 2)) * 0.05 + 0.45, [[0, 0], [1, 0], [0, 1], [1, 1]]])
    cfg = PumConfig(delta_scale=0.3, repair_cover=False)
    with pytest.raises(UncoveredSites) as info:
        build_pum(ScatteredData(pts, pts[:, 0]), cfg)
    assert len(info.value.indices) > 0


def test_scattered_data_validation():
    with pytest.raises(ValueError):
        ScatteredData(np.zeros((3, 2)), np.zeros(2))
    with pytest.raises(ValueError):
        ScatteredData([[0, np.nan]], [1.0])


def test_weights_formula(model1024):
    m = model1024
    p = np.array([0.37, 0.61])
    w = dict(m.weights(p))
    phi = wendland_c2(np.linalg.norm(m.centers - p, axis=1), 1 / m.delta_pu)
    for j, val in w.items():
        assert val == pytest.approx(phi[j] / phi.sum(), rel=1e-12)
