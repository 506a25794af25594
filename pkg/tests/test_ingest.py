import json

import pytest

from nsum.estimators import draw_sample, extract_ard
from nsum.ingest import (
    build_instance,
    genre_prevalence,
    graph_stats,
    load_aliases,
    load_edges,
    load_genres,
    resolve_genre,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_toy_edges(tmp_path):
    g = load_edges(write(tmp_path, "e.csv", "0,1\n1,2"))
    assert g.n == 3 and g.num_edges == 2


def test_header_skipped(tmp_path):
    g = load_edges(write(tmp_path, "e.csv", "node_1,node_2\n0,1\n2,1\n"))
    assert g.num_edges == 2
    assert graph_stats(g) == {"nodes": 3, "edges": 2, "avg_degree": 4 / 3, "isolated": 0}


def test_isolated_nodes_kept(tmp_path):
    g = load_edges(write(tmp_path, "e.csv", "0,3\n"))
    assert g.n == 4 and graph_stats(g)["isolated"] == 2


@pytest.mark.parametrize(
    "text,match",
    [
        ("0,1\n1,1\n", ":2: self-loop"),
        ("0,1\n1,0\n", ":2: duplicate"),
        ("0,1\n2,3\n0,1\n", ":3: duplicate"),
        ("0,1\nx,2\n", ":2: non-integer"),
        ("0,1\n1,2,3\n", ":2: expected two"),
        ("", "no edges"),
    ],
)
def test_edges_rejected(tmp_path, text, match):
    with pytest.raises(ValueError, match=match):
        load_edges(write(tmp_path, "e.csv", text))


def test_genres_inverted(tmp_path):
    idx = load_genres(write(tmp_path, "g.json", '{"0":["Dance"],"1":["Dance","Pop"]}'))
    assert idx == {"Dance": frozenset({0, 1}), "Pop": frozenset({1})}


def test_genres_trim_and_case(tmp_path):
    idx = load_genres(write(tmp_path, "g.json", '{"0":[" Rock "],"1":["rock"]}'))
    assert idx["Rock"] == {0} and idx["rock"] == {1}


def test_genres_unknown_node(tmp_path):
    with pytest.raises(ValueError, match="outside"):
        load_genres(write(tmp_path, "g.json", '{"5":["Pop"]}'), n=3)


def test_genres_malformed(tmp_path):
    with pytest.raises(ValueError, match="malformed"):
        load_genres(write(tmp_path, "g.json", '{"0": ['))


def test_aliases(tmp_path):
    idx = {"Films/Games": frozenset({0, 2})}
    aliases = load_aliases(write(tmp_path, "a.json", json.dumps({"Film-Games": "Films/Games"})))
    assert resolve_genre(idx, "Film-Games", aliases) == {0, 2}
    assert genre_prevalence(idx, 4, "Film-Games", aliases) == 0.5
    with pytest.raises(ValueError):
        resolve_genre(idx, "Jazz", aliases)


def test_build_path_instance(tmp_path):
    g = load_edges(write(tmp_path, "e.csv", "0,1\n1,2\n"))
    inst = build_instance(g, {1})
    assert inst.bidirectional
    ard = extract_ard(inst, draw_sample(inst, 3))
    assert list(ard) == [(0, 1, 1), (1, 2, 0), (2, 1, 1)]


def test_build_triangle_no_hidden(tmp_path):
    g = load_edges(write(tmp_path, "e.csv", "0,1\n1,2\n0,2\n"))
    inst = build_instance(g)
    assert inst.in_degree.tolist() == [2, 2, 2] and inst.hidden_in_count.sum() == 0


def test_degree_round_trip_and_handshake(tmp_path):
    import numpy as np

    rng = np.random.default_rng(0)
    pairs = set()
    while len(pairs) < 300:
        a, b = rng.integers(0, 80, 2)
        if a != b:
            pairs.add((min(a, b), max(a, b)))
    text = "node_1,node_2\n" + "".join(f"{a},{b}\n" for a, b in pairs)
    g = load_edges(write(tmp_path, "e.csv", text))
    inst = build_instance(g, range(10))
    assert np.array_equal(inst.in_degree, g.degree())
    assert inst.in_degree.sum() == 2 * g.num_edges


def test_build_rejects_bad_hidden(tmp_path):
    g = load_edges(write(tmp_path, "e.csv", "0,1\n"))
    with pytest.raises(ValueError):
        build_instance(g, {5})
