import math

import numpy as np
import pytest

from helpers import oracle_all_pairs, path_graph
from lmdist.bench import (
    CSV_HEADER,
    DistortionReport,
    SweepSpec,
    exact_distances,
    mask_timing_columns,
    parse_sweep_spec,
    run_distortion,
    run_sweep,
    sample_pairs,
    sweep_csv_lines,
    timing_bench,
)
from lmdist.embedding import (
    Embedding,
    LandmarkFamily,
    build_embedding,
    sample_family,
    write_embedding,
)
from lmdist.errors import EmptySampleError, ParameterError, ParseError
from lmdist.graph import Graph, er_generate


def singleton_family(nodes, n):
    """One size-1 set per round: lb = ub = d when nodes = all of V."""
    sets = tuple((np.array([u], dtype=np.int64),) for u in nodes)
    return LandmarkFamily(n=n, M=2, r=0, R=len(nodes), seed=0, sets=sets)


# --------------------------------------------------------------- sample_pairs


def test_sample_pairs_single_edge():
    g = Graph.from_edges(2, [0], [1])
    pairs = sample_pairs(g, 40, seed=0)
    assert pairs.shape == (40, 2)
    assert np.all(pairs[:, 0] != pairs[:, 1])
    assert set(map(tuple, pairs)) <= {(0, 1), (1, 0)}


def test_sample_pairs_deterministic():
    g = er_generate(500, 3.0, seed=1)
    a = sample_pairs(g, 100, seed=5)
    b = sample_pairs(g, 100, seed=5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_pairs(g, 100, seed=6))


def test_sample_pairs_rejects_isolated_only_graph():
    g = Graph.from_edges(5, [], [])
    with pytest.raises(EmptySampleError):
        sample_pairs(g, 10, seed=0)


def test_sample_pairs_same_component():
    g = Graph.from_edges(6, [0, 1, 3, 4], [1, 2, 4, 5])  # two paths
    pairs = sample_pairs(g, 200, seed=2)
    left = pairs < 3
    assert np.all(left[:, 0] == left[:, 1])


def test_sample_pairs_mostly_giant():
    # survival fixed point z = 1 - exp(-5 z); fraction of accepted pairs
    # inside the giant approaches z^2 / (z^2 + sum of small-comp terms) ~ z^2
    z = 0.5
    for _ in range(200):
        z = 1.0 - math.exp(-5.0 * z)
    g = er_generate(10000, 5.0, seed=3)
    from lmdist.graph import components

    labels = components(g).labels
    pairs = sample_pairs(g, 2000, seed=3)
    frac = np.mean(labels[pairs[:, 0]] == 0)
    assert frac >= 0.95
    assert frac >= z * z - 0.03


def test_sample_pairs_zero_count():
    g = Graph.from_edges(2, [0], [1])
    assert sample_pairs(g, 0, seed=0).shape == (0, 2)


# ------------------------------------------------------------ exact_distances


def test_exact_distances_matches_all_pairs_oracle():
    g = er_generate(120, 3.0, seed=9)
    dm = oracle_all_pairs(g)
    rng = np.random.default_rng(0)
    pairs = rng.integers(0, g.n, size=(150, 2))
    d = exact_distances(g, pairs)
    for (u, v), got in zip(pairs, d):
        expect = dm[u, v]
        if np.isinf(expect):
            assert got == np.iinfo(np.int64).max
        else:
            assert got == int(expect)


# ------------------------------------------------------------- run_distortion


def test_exact_regime_all_singletons():
    g = er_generate(60, 4.0, seed=4)
    from lmdist.graph import extract_lcc

    g = extract_lcc(g)
    fam = singleton_family(range(g.n), g.n)
    pairs = sample_pairs(g, 300, seed=1)
    rep = run_distortion(g, fam, pairs, eps=0.5)
    assert np.array_equal(rep.lb, rep.d_exact)
    assert np.array_equal(rep.ub, rep.d_exact.astype(float))
    assert rep.mse_lb == 0.0
    assert rep.mean_rel_err_lb == 0.0
    assert rep.viol_rate_lb == 0.0
    assert rep.viol_rate_ub == 0.0
    assert rep.undefined_ub == 0


def test_lb_error_nonincreasing_when_R_doubles():
    g = er_generate(800, 5.0, seed=11)
    pairs = sample_pairs(g, 200, seed=11)
    short = sample_family(g.n, 2, 2, 20, seed=5)
    long = sample_family(g.n, 2, 2, 40, seed=5)  # same prefix stream
    a = run_distortion(g, short, pairs, eps=0.5)
    b = run_distortion(g, long, pairs, eps=0.5)
    assert np.all(b.lb >= a.lb)
    assert b.mean_rel_err_lb <= a.mean_rel_err_lb
    assert b.viol_rate_lb <= a.viol_rate_lb


def test_run_distortion_accepts_prebuilt_embedding():
    g = er_generate(300, 4.0, seed=2)
    fam = sample_family(g.n, 2, 1, 10, seed=3)
    emb = build_embedding(g, fam)
    pairs = sample_pairs(g, 50, seed=0)
    rep = run_distortion(g, emb, pairs)
    assert math.isnan(rep.build_ms)
    assert rep.pairs == 50
    assert rep.builder == "bfs"
    via_fam = run_distortion(g, fam, pairs)
    assert np.array_equal(rep.lb, via_fam.lb)
    assert not math.isnan(via_fam.build_ms)


def test_run_distortion_gnn_skips_ub():
    g = path_graph(6)
    x = np.array([[0.0], [1.2], [1.9], [3.1], [3.9], [5.2]])
    emb = Embedding(n=6, M=2, r=0, R=1, seed=0, builder="gnn", x=x, sigma=None)
    rep = run_distortion(g, emb, np.array([[0, 5], [1, 4]]))
    assert np.all(np.isnan(rep.ub))
    assert math.isnan(rep.viol_rate_ub)
    assert rep.undefined_ub == 2
    assert rep.mse_lb > 0


def test_run_distortion_rejects_identical_endpoints():
    g = path_graph(4)
    fam = singleton_family([0], 4)
    with pytest.raises(ParameterError):
        run_distortion(g, fam, np.array([[1, 1]]))


def test_run_distortion_rejects_cross_component_pairs():
    g = Graph.from_edges(4, [0, 2], [1, 3])
    fam = singleton_family([0, 2], 4)
    with pytest.raises(ParameterError):
        run_distortion(g, fam, np.array([[0, 3]]))


def test_run_distortion_rejects_mismatched_embedding():
    g = path_graph(4)
    fam = singleton_family([0], 5)
    with pytest.raises(ParameterError):
        run_distortion(g, fam, np.array([[0, 1]]))


def test_run_distortion_hard_asserts_bound_breach():
    g = path_graph(5)
    x = np.array([[9], [1], [2], [3], [4]], dtype=np.int64)  # corrupted row 0
    sigma = np.zeros((5, 1), dtype=np.int64)
    emb = Embedding(n=5, M=2, r=0, R=1, seed=0, builder="bfs", x=x, sigma=sigma)
    with pytest.raises(AssertionError):
        run_distortion(g, emb, np.array([[0, 1]]))


def test_metrics_recomputable_from_samples():
    g = er_generate(400, 5.0, seed=6)
    fam = sample_family(g.n, 2, 2, 8, seed=1)
    pairs = sample_pairs(g, 120, seed=2)
    rep = run_distortion(g, fam, pairs, eps=0.3)
    d, lb, ub = rep.d_exact, rep.lb, rep.ub
    assert rep.mse_lb == pytest.approx(np.mean((lb - d) ** 2))
    assert rep.mean_rel_err_lb == pytest.approx(np.mean((d - lb) / d))
    assert rep.viol_rate_lb == pytest.approx(np.mean(lb < 0.7 * d))
    defined = ~np.isnan(ub)
    assert rep.viol_rate_ub == pytest.approx(np.mean(ub[defined] > 1.3 * d[defined]))


def test_csv_row_shape_and_header():
    assert CSV_HEADER.count(",") == 15
    g = er_generate(200, 4.0, seed=0)
    fam = sample_family(g.n, 2, 1, 5, seed=0)
    rep = run_distortion(g, fam, sample_pairs(g, 30, seed=0), lam=4.0)
    row = rep.csv_row()
    cells = row.split(",")
    assert len(cells) == 16
    assert cells[0] == "er"
    assert cells[1] == "200"
    assert cells[3] == "4"
    assert cells[8] == "bfs"
    assert cells[9] == "30"


# ----------------------------------------------------------------- sweep spec


def test_parse_sweep_spec_full():
    text = """
    # comment line
    n = 100, 200
    lambda = 5
    M = 2
    theta = 0.25
    eps = 0.5        # trailing comment
    constant = 1, 4
    builder = bfs
    pairs = 50
    reps = 2
    seed = 9
    """
    spec = parse_sweep_spec(text)
    assert spec.n == (100, 200)
    assert spec.constant == (1.0, 4.0)
    assert spec.pairs == 50
    assert spec.reps == 2
    assert spec.seed == 9
    assert spec.R is None
    assert len(spec.cells()) == 4


def test_parse_sweep_spec_explicit_R():
    spec = parse_sweep_spec("n=300\nlambda=5\nR=10,20,40\n")
    assert spec.R == (10, 20, 40)
    assert len(spec.cells()) == 3


def test_parse_sweep_spec_errors():
    with pytest.raises(ParseError, match="line 1"):
        parse_sweep_spec("bogus = 3")
    with pytest.raises(ParseError):
        parse_sweep_spec("n 100")
    with pytest.raises(ParseError):
        parse_sweep_spec("n =")
    with pytest.raises(ParseError):
        parse_sweep_spec("n = ten")
    with pytest.raises(ParseError):
        parse_sweep_spec("n = 10\nn = 20")
    with pytest.raises(ParseError):
        parse_sweep_spec("seed = 1, 2")


def test_sweep_spec_validation():
    with pytest.raises(ParameterError):
        SweepSpec(n=())
    with pytest.raises(ParameterError):
        SweepSpec(reps=0)
    with pytest.raises(ParameterError):
        SweepSpec(builders=("fft",))
    with pytest.raises(ParameterError):
        SweepSpec(kind="xx")


# ------------------------------------------------------------------ run_sweep


def test_single_cell_sweep_matches_run_distortion():
    spec = parse_sweep_spec("n=400\nlambda=5\nM=2\ntheta=0.25\neps=0.5\npairs=60\nseed=3\n")
    rows = run_sweep(spec)
    assert len(rows) == 1
    row = rows[0]
    assert row.error is None
    # rebuild the cell by hand from the documented seed derivation
    from lmdist._seeds import derive_seed

    g = er_generate(400, 5.0, seed=derive_seed(3, "sweep-graph", 0, 0))
    pairs = sample_pairs(g, 60, derive_seed(3, "sweep-pairs", 0, 0))
    fam = sample_family(400, 2, row.r, row.R, derive_seed(3, "sweep-family", 0, 0))
    direct = run_distortion(g, fam, pairs, eps=0.5, lam=5.0)
    assert np.array_equal(row.lb, direct.lb)
    assert row.mse_lb == direct.mse_lb


def test_sweep_R_rows_error_nonincreasing():
    spec = parse_sweep_spec("n=600\nlambda=5\nR=8,16,32\npairs=120\nseed=1\n")
    rows = run_sweep(spec)
    assert len(rows) == 3
    errs = [r.mean_rel_err_lb for r in rows]
    assert errs[0] >= errs[1] >= errs[2]


def test_sweep_gnn_without_embeddings_marks_cell_failed():
    spec = SweepSpec(n=(200,), builders=("bfs", "gnn"), pairs=20, seed=0)
    rows = run_sweep(spec)
    assert len(rows) == 2
    assert rows[0].error is None
    assert rows[1].error is not None
    assert rows[1].builder == "gnn"
    assert "nan" in rows[1].csv_row()
    assert math.isnan(rows[1].mse_lb)


def test_sweep_paired_builders_share_graph_and_pairs(tmp_path):
    # supply a gnn-tagged embedding for the cell's own graph
    from lmdist._seeds import derive_seed

    n = 150
    spec = SweepSpec(n=(n,), lam=(4.0,), builders=("bfs", "gnn"), R=(6,), pairs=25, seed=7)
    g = er_generate(n, 4.0, seed=derive_seed(7, "sweep-graph", 0, 0))
    fam = sample_family(n, 2, 1, 6, seed=derive_seed(7, "sweep-family", 0, 0))
    base = build_embedding(g, fam)
    gnn = Embedding(
        n=n, M=2, r=1, R=6, seed=0, builder="gnn",
        x=np.where(base.x == np.iinfo(np.int64).max, np.inf, base.x.astype(float)),
        sigma=None,
    )
    path = tmp_path / "g.lmeb"
    with open(path, "wb") as fh:
        write_embedding(gnn, fh)
    rows = run_sweep(spec, gnn_embeddings=[str(path)])
    assert [r.builder for r in rows] == ["bfs", "gnn"]
    assert all(r.error is None for r in rows)
    assert np.array_equal(rows[0].u, rows[1].u)
    assert np.array_equal(rows[0].d_exact, rows[1].d_exact)
    # identical x values -> identical lower bounds
    assert np.allclose(rows[0].lb, rows[1].lb)
    assert math.isnan(rows[1].viol_rate_ub)


def test_sweep_deterministic_csv_bytes():
    spec = parse_sweep_spec("n=200,300\nlambda=4\nR=4,8\npairs=30\nreps=2\nseed=5\n")
    a = mask_timing_columns("\n".join(sweep_csv_lines(run_sweep(spec))))
    b = mask_timing_columns("\n".join(sweep_csv_lines(run_sweep(spec))))
    assert a == b
    assert a.splitlines()[0] == CSV_HEADER
    assert len(a.splitlines()) == 1 + 2 * 2 * 2


def test_sweep_threads_match_serial():
    spec = parse_sweep_spec("n=200\nlambda=4\nR=4,8\npairs=30\nseed=5\n")
    serial = run_sweep(spec, threads=1)
    threaded = run_sweep(spec, threads=4)
    for a, b in zip(serial, threaded):
        assert np.array_equal(a.lb, b.lb)
        assert a.csv_row().split(",")[:14] == b.csv_row().split(",")[:14]


def test_mask_timing_columns():
    line = "er,10,20,5,2,1,4,0,bfs,30,0.5,0.25,0.1,0,12.5,3.25"
    masked = mask_timing_columns(CSV_HEADER + "\n" + line)
    assert masked.splitlines()[1].endswith(",0,-,-")
    assert masked.splitlines()[0] == CSV_HEADER


# --------------------------------------------------------------- timing_bench


def test_timing_bench_basic():
    g = er_generate(500, 5.0, seed=0)
    fam = sample_family(g.n, 2, 1, 8, seed=0)
    rec = timing_bench(g, fam, pairs=64, repeats=2, seed=0)
    assert rec.build_ms > 0
    assert rec.query_us_per_pair > 0
    assert rec.D == 16
    assert (rec.n, rec.m) == (g.n, g.m)


def test_timing_bench_empty_family_errors_on_query():
    g = Graph.from_edges(2, [0], [1])
    fam = LandmarkFamily(n=2, M=2, r=0, R=0, seed=0, sets=())
    with pytest.raises(ParameterError):
        timing_bench(g, fam, pairs=4, repeats=1, seed=0)


def test_timing_bench_validates_repeats():
    g = Graph.from_edges(2, [0], [1])
    fam = sample_family(2, 2, 0, 1, seed=0)
    with pytest.raises(ParameterError):
        timing_bench(g, fam, repeats=0)
