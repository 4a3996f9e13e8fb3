import math

import pytest

import greennas as gn

SKIP = ([[0, 1], [0, 0]], ["input", "output"])
CHAIN = ([[0, 1, 0], [0, 0, 1], [0, 0, 0]], ["input", "conv3x3", "output"])
# Two orderings of the same diamond cell.
DIAMOND_A = ([[0, 1, 1, 0], [0, 0, 0, 1], [0, 0, 0, 1], [0, 0, 0, 0]],
             ["input", "conv3x3", "maxpool3x3", "output"])
DIAMOND_B = ([[0, 1, 1, 0], [0, 0, 0, 1], [0, 0, 0, 1], [0, 0, 0, 0]],
             ["input", "maxpool3x3", "conv3x3", "output"])


@pytest.fixture(scope="module")
def table4(tmp_path_factory):
    path = tmp_path_factory.mktemp("tables") / "t4.jsonl"
    assert gn.synth_table(4, 7, str(path)) == 91
    return path


def test_enumeration_counts():
    assert len(gn.enumerate_space(4)) == 91
    assert len(gn.enumerate_space(5)) == 2532
    cell = gn.enumerate_space(3)[0]
    assert set(cell) == {"module_adjacency", "module_operations"}


def test_long_run_gate_raises_with_code():
    with pytest.raises(gn.GreennasError) as info:
        gn.enumerate_space(7)
    assert info.value.code == "RESOURCE_LIMIT"


def test_cells():
    assert gn.validate(*SKIP) == "OK"
    assert gn.validate([[0, 0], [0, 0]], ["input", "output"]) == "NO_IO_PATH"
    assert gn.canonical_key(*DIAMOND_A) == gn.canonical_key(*DIAMOND_B)
    assert gn.canonical_form(*DIAMOND_A) == gn.canonical_form(*DIAMOND_B)
    assert gn.count_parameters(*CHAIN) == 10177674
    x = gn.featurize(*SKIP, 42)
    assert len(x) == 36
    assert x[28:35] == [1, 5, 0, 0, 0, 0, 0]
    with pytest.raises(gn.GreennasError):
        gn.canonical_key([[0, 1], [0, 0]], ["input", "conv5x5"])


def test_multiobjective_helpers():
    pts = [[0.1, 0.9], [0.5, 0.5], [0.9, 0.1], [0.6, 0.6]]
    assert gn.ndom(pts) == [0, 1, 2]
    front = [pts[i] for i in gn.ndom(pts)]
    assert gn.hypervolume_2d(front, [1.0, 1.0]) == pytest.approx(0.09 + 0.2 + 0.04)
    assert gn.contributions(front, [1.0, 1.0])[1] == pytest.approx(0.16)
    probs = gn.linear_rank_probs(10, 2.0)
    assert math.isclose(sum(probs), 1.0)
    assert probs[0] == pytest.approx(0.2) and probs[-1] == 0.0
    assert gn.knee_point(front) == 1
    assert gn.rank_correlation([1, 2, 3, 4, 5], [1, 3, 2, 4, 5]) == pytest.approx(0.9)


def test_surrogate_roundtrip(table4, tmp_path):
    model = tmp_path / "model.json"
    report = gn.train_surrogate(str(table4), budget=4, seed=1, epochs=20, batch_size=16, out_path=str(model))
    assert (report["train"], report["validation"], report["test"]) == (64, 9, 18)
    e4 = gn.predict_energy(str(model), *DIAMOND_A, 4)
    assert gn.predict_energy(str(model), *DIAMOND_A, 8) == pytest.approx(2 * e4)
    assert gn.predict_energy(str(model), *DIAMOND_B, 4) == e4


def test_search_is_deterministic(table4):
    a = gn.search(table4, "semoa", seed=3, iterations=10, trials=2)
    b = gn.search(table4, "semoa", seed=3, iterations=10, trials=2)
    assert a == b
    run = a["runs"][0]
    assert run["query_count"] == (10 + 10 * 10) * 4
    hv = run["hv_history"]
    assert all(x <= y for x, y in zip(hv, hv[1:]))
    rnd = gn.search(table4, "random", seed=3, trials=1, budgets=(4, 108))
    assert rnd["runs"][0]["query_count"] == 2000


def test_opswap(table4):
    rows = gn.opswap_analysis(str(table4))
    assert len(rows) == 9
    assert all(r["pct_energy"] == 0 for r in rows if r["from"] == r["to"])
