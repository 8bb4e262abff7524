import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import oracle_all_pairs, oracle_distances, path_graph, random_simple_graph
from lmdist.errors import FormatError, ParameterError, UnsupportedOperationError
from lmdist.embedding import (
    BoundPair,
    Embedding,
    LandmarkFamily,
    build_embedding,
    lower_bound,
    query,
    read_embedding,
    read_family,
    sample_family,
    upper_bound,
    write_embedding,
    write_family,
)
from lmdist.graph import UNREACHED, er_generate, extract_lcc


def make_family(n, rounds, M=2):
    """Family from explicit per-round set lists (sizes must be M^i)."""
    sets = tuple(
        tuple(np.asarray(ids, dtype=np.int64) for ids in round_sets)
        for round_sets in rounds
    )
    r = len(rounds[0]) - 1
    return LandmarkFamily(n=n, M=M, r=r, R=len(rounds), seed=0, sets=sets)


def make_bfs_embedding(x, sigma, n=None, M=2):
    """Rows beyond those given are padded as unreached."""
    x = np.asarray(x, dtype=np.int64)
    sigma = np.asarray(sigma, dtype=np.int64)
    n = n if n is not None else x.shape[0]
    if n > x.shape[0]:
        pad = n - x.shape[0]
        x = np.vstack([x, np.full((pad, x.shape[1]), UNREACHED, dtype=np.int64)])
        sigma = np.vstack([sigma, np.full((pad, sigma.shape[1]), -1, dtype=np.int64)])
    return Embedding(
        n=n, M=M, r=0, R=x.shape[1], seed=0, builder="bfs", x=x, sigma=sigma
    )


# --------------------------------------------------------------- sample_family


def test_family_doubling_sizes():
    fam = sample_family(100, M=2, r=6, R=1, seed=3)
    assert [len(ids) for ids in fam.sets[0]] == [1, 2, 4, 8, 16, 32, 64]


def test_family_singletons_when_r_zero():
    fam = sample_family(30, M=3, r=0, R=5, seed=1)
    assert fam.R == 5
    assert all(len(round_sets) == 1 for round_sets in fam.sets)
    assert all(len(round_sets[0]) == 1 for round_sets in fam.sets)


def test_family_deterministic():
    a = sample_family(50, M=2, r=5, R=3, seed=77)
    b = sample_family(50, M=2, r=5, R=3, seed=77)
    assert a == b
    c = sample_family(50, M=2, r=5, R=3, seed=78)
    assert a != c


def test_family_rejects_bad_M():
    with pytest.raises(ParameterError):
        sample_family(10, M=1, r=2, R=1, seed=0)
    with pytest.raises(ParameterError):
        sample_family(10, M=0, r=2, R=1, seed=0)


def test_family_warns_when_largest_set_exceeds_n():
    with pytest.warns(UserWarning):
        sample_family(10, M=2, r=5, R=1, seed=0)


def test_family_ids_in_range():
    fam = sample_family(37, M=3, r=2, R=4, seed=5)
    for _, _, _, ids in fam.flat_sets():
        assert ids.min() >= 0
        assert ids.max() < 37


def test_family_is_prefix_stable_in_R_and_r():
    small = sample_family(60, M=2, r=2, R=2, seed=9)
    tall = sample_family(60, M=2, r=2, R=5, seed=9)
    for j in range(2):
        for i in range(3):
            assert np.array_equal(small.sets[j][i], tall.sets[j][i])
    wide = sample_family(60, M=2, r=4, R=2, seed=9)
    for j in range(2):
        for i in range(3):
            assert np.array_equal(small.sets[j][i], wide.sets[j][i])


def test_family_D_is_rounds_times_sets():
    fam = sample_family(40, M=2, r=3, R=7, seed=0)
    assert fam.D == 7 * 4


# ------------------------------------------------------------- build_embedding


def test_build_embedding_path_hand_computed():
    g = path_graph(4)
    fam = make_family(4, [[[0], [0, 3]]])
    emb = build_embedding(g, fam)
    assert emb.x.tolist() == [[0, 0], [1, 1], [2, 1], [3, 0]]
    assert emb.sigma.tolist() == [[0, 0], [0, 0], [0, 3], [0, 3]]
    assert emb.builder == "bfs"


def test_build_embedding_member_rows_zero():
    g = path_graph(5)
    fam = make_family(5, [[[2], [2, 2]]])  # node 2 in every set
    emb = build_embedding(g, fam)
    assert np.all(emb.x[2] == 0)


def test_build_embedding_matches_per_landmark_oracle():
    g = er_generate(200, 5.0, seed=31)
    fam = sample_family(200, M=2, r=2, R=3, seed=8)
    emb = build_embedding(g, fam)
    for c, _, _, ids in fam.flat_sets():
        per = np.stack([oracle_distances(g, int(s)) for s in np.unique(ids)])
        assert np.array_equal(emb.x[:, c], per.min(axis=0))


def test_build_embedding_rejects_foreign_ids():
    g = path_graph(3)
    fam = make_family(10, [[[7], [0, 9]]])
    with pytest.raises(ParameterError):
        build_embedding(g, fam)


def test_build_embedding_zero_iff_member():
    g = er_generate(80, 4.0, seed=12)
    fam = sample_family(80, M=2, r=3, R=2, seed=13)
    emb = build_embedding(g, fam)
    for c, _, _, ids in fam.flat_sets():
        members = np.zeros(80, dtype=bool)
        members[np.unique(ids)] = True
        assert np.array_equal(emb.x[:, c] == 0, members)


def test_build_embedding_sigma_is_set_member():
    g = er_generate(120, 5.0, seed=44)
    fam = sample_family(120, M=2, r=2, R=3, seed=45)
    emb = build_embedding(g, fam)
    for c, _, _, ids in fam.flat_sets():
        defined = emb.sigma[:, c] >= 0
        assert np.all(np.isin(emb.sigma[defined, c], ids))
        assert np.array_equal(defined, emb.x[:, c] != UNREACHED)


def test_build_embedding_nested_sets_monotone():
    g = er_generate(150, 4.0, seed=3)
    rng = np.random.default_rng(0)
    inner = rng.choice(150, size=2, replace=False)
    outer = np.concatenate([inner, rng.choice(150, size=2)])
    fam = make_family(150, [[[int(inner[0])], inner, outer]])
    emb = build_embedding(g, fam)
    assert np.all(emb.x[:, 2] <= emb.x[:, 1])
    assert np.all(emb.x[:, 1] <= emb.x[:, 0])


def test_build_embedding_threads_match_serial():
    g = er_generate(150, 5.0, seed=7)
    fam = sample_family(150, M=2, r=2, R=4, seed=11)
    assert build_embedding(g, fam, threads=4) == build_embedding(g, fam)


# ----------------------------------------------------------------- lower bound


def test_lower_bound_definition():
    emb = make_bfs_embedding([[2, 5], [4, 1]], [[0, 1], [0, 1]], n=2)
    assert lower_bound(emb, 0, 1) == 4


def test_lower_bound_identity_zero():
    g = er_generate(50, 4.0, seed=2)
    fam = sample_family(50, M=2, r=1, R=2, seed=3)
    emb = build_embedding(g, fam)
    for u in (0, 13, 49):
        assert lower_bound(emb, u, u) == 0


def test_lower_bound_skips_unreached():
    x = [[1, UNREACHED], [3, 4]]
    sigma = [[0, -1], [0, 1]]
    emb = make_bfs_embedding(x, sigma, n=2)
    assert lower_bound(emb, 0, 1) == 2  # second coordinate ignored


def test_lower_bound_all_skipped_returns_zero():
    x = [[UNREACHED, UNREACHED], [3, 4]]
    sigma = [[-1, -1], [0, 1]]
    emb = make_bfs_embedding(x, sigma, n=2)
    assert lower_bound(emb, 0, 1) == 0


def test_lower_bound_never_exceeds_distance():
    g = extract_lcc(er_generate(120, 4.0, seed=50))
    fam = sample_family(g.n, M=2, r=2, R=2, seed=51)
    emb = build_embedding(g, fam)
    d = oracle_all_pairs(g)
    for u in range(g.n):
        for v in range(g.n):
            assert lower_bound(emb, u, v) <= d[u, v]


def test_lower_bound_symmetric():
    g = er_generate(70, 4.0, seed=4)
    fam = sample_family(70, M=2, r=1, R=3, seed=5)
    emb = build_embedding(g, fam)
    rng = np.random.default_rng(6)
    for _ in range(60):
        u, v = rng.integers(70, size=2)
        assert lower_bound(emb, int(u), int(v)) == lower_bound(emb, int(v), int(u))


# ----------------------------------------------------------------- upper bound


def test_upper_bound_definition():
    emb = make_bfs_embedding([[2, 5], [4, 1]], [[7, 3], [7, 9]], n=10)
    assert upper_bound(emb, 0, 1) == 6


def test_upper_bound_exact_when_endpoint_is_landmark():
    g = er_generate(60, 5.0, seed=9)
    g = extract_lcc(g)
    fam = sample_family(g.n, M=2, r=1, R=1, seed=10)
    emb = build_embedding(g, fam)
    landmark = int(fam.sets[0][0][0])
    d = oracle_distances(g, landmark)
    for v in range(g.n):
        assert upper_bound(emb, landmark, v) == d[v]


def test_upper_bound_never_below_distance():
    g = extract_lcc(er_generate(120, 4.0, seed=52))
    fam = sample_family(g.n, M=2, r=2, R=2, seed=53)
    emb = build_embedding(g, fam)
    d = oracle_all_pairs(g)
    for u in range(g.n):
        for v in range(g.n):
            ub = upper_bound(emb, u, v)
            assert ub is not None
            assert ub >= d[u, v]


def test_upper_bound_refuses_learned_embedding():
    x = np.zeros((3, 2), dtype=np.float64)
    emb = Embedding(n=3, M=2, r=0, R=2, seed=0, builder="gnn", x=x, sigma=None)
    with pytest.raises(UnsupportedOperationError):
        upper_bound(emb, 0, 1)


def test_upper_bound_undefined_across_components():
    # two disjoint edges; landmark 0 reaches only its side
    from lmdist.graph import Graph

    g = Graph.from_edges(4, [0, 2], [1, 3])
    fam = make_family(4, [[[0]]])
    emb = build_embedding(g, fam)
    assert upper_bound(emb, 2, 3) is None
    assert upper_bound(emb, 0, 1) == 1  # d(0,0) + d(0,1) through landmark 0


def test_upper_bound_symmetric():
    g = er_generate(70, 4.0, seed=14)
    fam = sample_family(70, M=2, r=1, R=3, seed=15)
    emb = build_embedding(g, fam)
    rng = np.random.default_rng(16)
    for _ in range(60):
        u, v = rng.integers(70, size=2)
        assert upper_bound(emb, int(u), int(v)) == upper_bound(emb, int(v), int(u))


def test_upper_bound_uses_cross_coordinate_matches():
    # u's best for landmark 9 sits in a different column than v's
    x = [[1, 7], [8, 2]]
    sigma = [[9, 4], [4, 9]]
    emb = make_bfs_embedding(x, sigma, n=10)
    assert upper_bound(emb, 0, 1) == 3  # 1 (col 0 of u) + 2 (col 1 of v) via node 9


# ----------------------------------------------------------------------- query


def test_query_path_hand_computed():
    g = path_graph(4)
    fam = make_family(4, [[[0], [0, 3]]])
    emb = build_embedding(g, fam)
    got = query(emb, 1, 2)
    assert got == BoundPair(lb=1, ub=3)


def test_query_identity_pair():
    g = path_graph(4)
    fam = make_family(4, [[[0], [0, 3]]])
    emb = build_embedding(g, fam)
    assert query(emb, 2, 2).lb == 0


def test_query_brackets_truth_on_connected_graph():
    g = extract_lcc(er_generate(150, 5.0, seed=60))
    fam = sample_family(g.n, M=2, r=2, R=3, seed=61)
    emb = build_embedding(g, fam)
    d = oracle_all_pairs(g)
    rng = np.random.default_rng(62)
    for _ in range(300):
        u, v = (int(x) for x in rng.integers(g.n, size=2))
        got = query(emb, u, v)
        assert got.lb <= d[u, v] <= got.ub


def test_query_skips_ub_for_learned_embedding():
    x = np.ones((3, 2), dtype=np.float64)
    emb = Embedding(n=3, M=2, r=0, R=2, seed=0, builder="gnn", x=x, sigma=None)
    got = query(emb, 0, 1)
    assert got.ub is None
    with pytest.raises(UnsupportedOperationError):
        query(emb, 0, 1, include_ub=True)


def test_query_rejects_out_of_range():
    g = path_graph(4)
    emb = build_embedding(g, make_family(4, [[[0]]]))
    with pytest.raises(ParameterError):
        query(emb, 0, 4)


def test_degenerate_embedding_rejected_on_query():
    x = np.zeros((3, 0), dtype=np.int64)
    sigma = np.zeros((3, 0), dtype=np.int64)
    emb = Embedding(n=3, M=2, r=0, R=0, seed=0, builder="bfs", x=x, sigma=sigma)
    with pytest.raises(ParameterError):
        lower_bound(emb, 0, 1)


# ---------------------------------------------------------------- monotonicity


def test_more_rounds_tighten_both_bounds():
    g = extract_lcc(er_generate(200, 5.0, seed=70))
    short = build_embedding(g, sample_family(g.n, M=2, r=2, R=2, seed=71))
    long = build_embedding(g, sample_family(g.n, M=2, r=2, R=6, seed=71))
    # same seed: the first 2 rounds coincide, so changes are pathwise monotone
    assert np.array_equal(short.x, long.x[:, : short.D])
    rng = np.random.default_rng(72)
    for _ in range(200):
        u, v = (int(x) for x in rng.integers(g.n, size=2))
        assert lower_bound(long, u, v) >= lower_bound(short, u, v)
        assert upper_bound(long, u, v) <= upper_bound(short, u, v)


# ----------------------------------------------------------- sandwich property


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_sandwich_on_random_connected_graphs(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, 60))
    g = extract_lcc(random_simple_graph(n, int(rng.integers(n, 3 * n)), rng))
    fam = sample_family(g.n, M=2, r=1, R=2, seed=seed)
    emb = build_embedding(g, fam)
    d = oracle_all_pairs(g)
    for u in range(g.n):
        for v in range(g.n):
            got = query(emb, u, v)
            assert got.lb <= d[u, v]
            assert got.ub is not None
            assert d[u, v] <= got.ub


# -------------------------------------------------------------------- file I/O


def test_embedding_round_trip_bfs():
    g = er_generate(90, 4.0, seed=80)
    fam = sample_family(90, M=2, r=2, R=3, seed=81)
    emb = build_embedding(g, fam)
    buf = io.BytesIO()
    write_embedding(emb, buf)
    back = read_embedding(io.BytesIO(buf.getvalue()))
    assert back == emb


def test_embedding_round_trip_preserves_unreached():
    from lmdist.graph import Graph

    g = Graph.from_edges(4, [0, 2], [1, 3])
    emb = build_embedding(g, make_family(4, [[[0]]]))
    assert emb.x[2, 0] == UNREACHED
    buf = io.BytesIO()
    write_embedding(emb, buf)
    back = read_embedding(io.BytesIO(buf.getvalue()))
    assert back.x[2, 0] == UNREACHED
    assert back.sigma[2, 0] == -1


def test_embedding_round_trip_gnn():
    rng = np.random.default_rng(5)
    x = rng.uniform(0, 9, size=(12, 6))
    x[3, 2] = np.inf
    emb = Embedding(n=12, M=2, r=1, R=3, seed=7, builder="gnn", x=x, sigma=None)
    buf = io.BytesIO()
    write_embedding(emb, buf)
    back = read_embedding(io.BytesIO(buf.getvalue()))
    assert back.builder == "gnn"
    assert back.sigma is None
    assert np.array_equal(back.x, x)
    assert isinstance(lower_bound(back, 0, 1), float)
    with pytest.raises(UnsupportedOperationError):
        upper_bound(back, 0, 1)


def test_embedding_file_deterministic_bytes():
    g = er_generate(70, 4.0, seed=82)
    fam = sample_family(70, M=2, r=1, R=2, seed=83)
    a, b = io.BytesIO(), io.BytesIO()
    write_embedding(build_embedding(g, fam), a)
    write_embedding(build_embedding(g, fam), b)
    assert a.getvalue() == b.getvalue()


def test_embedding_truncation_rejected():
    g = path_graph(6)
    emb = build_embedding(g, make_family(6, [[[0], [0, 5]]]))
    buf = io.BytesIO()
    write_embedding(emb, buf)
    data = buf.getvalue()
    for cut in (0, 5, 20, len(data) - 8, len(data) - 1):
        with pytest.raises(FormatError):
            read_embedding(io.BytesIO(data[:cut]))


def test_embedding_bad_magic_and_version():
    g = path_graph(3)
    emb = build_embedding(g, make_family(3, [[[0]]]))
    buf = io.BytesIO()
    write_embedding(emb, buf)
    data = bytearray(buf.getvalue())
    with pytest.raises(FormatError):
        read_embedding(io.BytesIO(b"XXXX" + bytes(data[4:])))
    bad_version = bytes(data[:4]) + (9).to_bytes(2, "little") + bytes(data[6:])
    with pytest.raises(FormatError):
        read_embedding(io.BytesIO(bad_version))


def test_family_json_round_trip():
    fam = sample_family(64, M=2, r=3, R=2, seed=12)
    buf = io.StringIO()
    write_family(fam, buf)
    back = read_family(io.StringIO(buf.getvalue()))
    assert back == fam


def test_family_json_rejects_garbage():
    with pytest.raises(FormatError):
        read_family('{"format": "something-else"}')
    with pytest.raises(FormatError):
        read_family("not json at all")
    with pytest.raises(FormatError):
        read_family(
            '{"format":"landmark-family","version":1,"n":5,"M":2,"r":0,"R":1,'
            '"seed":0,"sets":[[[9]]]}'
        )
