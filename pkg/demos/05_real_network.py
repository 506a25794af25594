"""Surveying a real friendship network.

Point DEEZER_DIR (or the NSUM_DEEZER_DIR environment variable) at the
Gemsec-Deezer files, e.g. HR_edges.csv and HR_genres.json. Without them a
small synthetic network in the same format is written and used instead.
"""
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from nsum.estimators import draw_sample, estimate_mor, estimate_ros, extract_ard
from nsum.ingest import build_instance, genre_prevalence, graph_stats, load_edges, load_genres, resolve_genre

DEEZER_DIR = Path(os.environ.get("NSUM_DEEZER_DIR", "data/deezer"))
edges, genres, genre = DEEZER_DIR / "HR_edges.csv", DEEZER_DIR / "HR_genres.json", "Pop"

if not edges.exists():
    rng = np.random.default_rng(0)
    tmp = Path(tempfile.mkdtemp())
    n = 2000
    pairs = {tuple(sorted(p)) for p in rng.integers(0, n, size=(8000, 2)) if p[0] != p[1]}
    edges, genres = tmp / "toy_edges.csv", tmp / "toy_genres.json"
    edges.write_text("node_1,node_2\n" + "".join(f"{a},{b}\n" for a, b in sorted(pairs)))
    labels = {str(v): ["Pop"] if rng.random() < 0.1 else ["Rock"] for v in range(n)}
    genres.write_text(json.dumps(labels))
    print("dataset not found; using a synthetic stand-in")

# %% load and summarise
graph = load_edges(edges)
print(graph_stats(graph))
index = load_genres(genres, graph.n)
rho = genre_prevalence(index, graph.n, genre)
print(f"{genre} listeners: rho = {rho:.4f}")

# %% survey the network at a few sample sizes
inst = build_instance(graph, resolve_genre(index, genre))
for m in (50, 200, graph.n // 2):
    ard = extract_ard(inst, draw_sample(inst, m, seed=m))
    mor = estimate_mor(ard, zero_degree="drop").value
    ros = estimate_ros(ard, zero_degree="drop").value
    print(f"m={m:6d}  MoR {mor:.4f}  RoS {ros:.4f}")
