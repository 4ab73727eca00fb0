"""Portable on-disk graph bundles.

A bundle directory holds five files:

    meta.json     {"name", "num_nodes", "num_features", "num_classes",
                   "directed": false}
    edges.tsv     one undirected edge per line: "u<TAB>v", 0-indexed
    features.tsv  sparse COO triples: "node<TAB>feature_index<TAB>value"
    labels.tsv    "node<TAB>label", every node exactly once
    split.json    {"train": [...], "val": [...], "test": [...]}

Loading validates everything against meta.json and never returns a partial
graph; malformed lines report the file and line number.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import (
    CountMismatch,
    MissingFile,
    ParseError,
    SelfLoopEdge,
)
from .graph import Graph, build_graph

BUNDLE_FILES = ("meta.json", "edges.tsv", "features.tsv", "labels.tsv",
                "split.json")


def _parse_int(tok: str, path: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"{path}:{lineno}: expected an integer, got {tok!r}") \
            from None


def _read_tsv(path: str, num_cols: int):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != num_cols:
                raise ParseError(
                    f"{path}:{lineno}: expected {num_cols} tab-separated "
                    f"fields, got {len(parts)}")
            rows.append((lineno, parts))
    return rows


def load_bundle(path: str) -> Graph:
    """Read a bundle directory into a validated Graph."""
    for name in BUNDLE_FILES:
        if not os.path.isfile(os.path.join(path, name)):
            raise MissingFile(f"bundle file missing: {os.path.join(path, name)}")

    meta_path = os.path.join(path, "meta.json")
    try:
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{meta_path}:{exc.lineno}: {exc.msg}") from None
    for key in ("name", "num_nodes", "num_features", "num_classes", "directed"):
        if key not in meta:
            raise ParseError(f"{meta_path}: missing key {key!r}")
    if meta["directed"]:
        raise ParseError(f"{meta_path}: directed graphs are not supported")
    n = int(meta["num_nodes"])
    d = int(meta["num_features"])
    num_classes = int(meta["num_classes"])

    edges_path = os.path.join(path, "edges.tsv")
    edges = []
    for lineno, parts in _read_tsv(edges_path, 2):
        u = _parse_int(parts[0], edges_path, lineno)
        v = _parse_int(parts[1], edges_path, lineno)
        if u == v:
            raise SelfLoopEdge(f"{edges_path}:{lineno}: self-loop at node {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"{edges_path}:{lineno}: node id outside [0, {n})")
        edges.append((u, v))

    feat_path = os.path.join(path, "features.tsv")
    features = np.zeros((n, d), dtype=np.float64)
    for lineno, parts in _read_tsv(feat_path, 3):
        node = _parse_int(parts[0], feat_path, lineno)
        idx = _parse_int(parts[1], feat_path, lineno)
        try:
            value = float(parts[2])
        except ValueError:
            raise ParseError(
                f"{feat_path}:{lineno}: expected a float, got {parts[2]!r}") \
                from None
        if not 0 <= node < n:
            raise ParseError(f"{feat_path}:{lineno}: node id outside [0, {n})")
        if not 0 <= idx < d:
            raise ParseError(
                f"{feat_path}:{lineno}: feature index outside [0, {d})")
        features[node, idx] = value

    labels_path = os.path.join(path, "labels.tsv")
    labels = np.full(n, -1, dtype=np.int64)
    seen = 0
    for lineno, parts in _read_tsv(labels_path, 2):
        node = _parse_int(parts[0], labels_path, lineno)
        label = _parse_int(parts[1], labels_path, lineno)
        if not 0 <= node < n:
            raise ParseError(f"{labels_path}:{lineno}: node id outside [0, {n})")
        if labels[node] != -1:
            raise ParseError(f"{labels_path}:{lineno}: duplicate node {node}")
        if not 0 <= label < num_classes:
            raise ParseError(
                f"{labels_path}:{lineno}: label outside [0, {num_classes})")
        labels[node] = label
        seen += 1
    if seen != n:
        raise CountMismatch(
            f"{labels_path}: {seen} labels for {n} nodes in meta.json")

    split_path = os.path.join(path, "split.json")
    try:
        with open(split_path, "r", encoding="utf-8") as fh:
            split = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{split_path}:{exc.lineno}: {exc.msg}") from None
    for key in ("train", "val", "test"):
        if key not in split:
            raise ParseError(f"{split_path}: missing key {key!r}")

    g = build_graph(n, edges, features, labels,
                    (split["train"], split["val"], split["test"]))
    if g.num_features != d:
        raise CountMismatch(
            f"features.tsv implies {g.num_features} features, meta says {d}")
    if g.num_classes > num_classes:
        raise CountMismatch(
            f"labels.tsv implies {g.num_classes} classes, meta says {num_classes}")
    # meta is authoritative for the class count (a class may be unused)
    return Graph(g.num_nodes, g.num_features, num_classes, g.features,
                 g.edges, g.labels, g.train_mask, g.val_mask, g.test_mask)


def save_bundle(graph: Graph, path: str, name: str) -> None:
    """Write a Graph as a bundle with fully deterministic file contents."""
    os.makedirs(path, exist_ok=True)
    meta = {
        "name": name,
        "num_nodes": graph.num_nodes,
        "num_features": graph.num_features,
        "num_classes": graph.num_classes,
        "directed": False,
    }
    with open(os.path.join(path, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")

    with open(os.path.join(path, "edges.tsv"), "w", encoding="utf-8") as fh:
        for u, v in graph.edges.tolist():
            fh.write(f"{u}\t{v}\n")

    nodes, idxs = np.nonzero(graph.features)
    with open(os.path.join(path, "features.tsv"), "w", encoding="utf-8") as fh:
        for node, idx in zip(nodes.tolist(), idxs.tolist()):
            fh.write(f"{node}\t{idx}\t{float(graph.features[node, idx])!r}\n")

    with open(os.path.join(path, "labels.tsv"), "w", encoding="utf-8") as fh:
        for node, label in enumerate(graph.labels.tolist()):
            fh.write(f"{node}\t{label}\n")

    split = {
        "train": np.where(graph.train_mask)[0].tolist(),
        "val": np.where(graph.val_mask)[0].tolist(),
        "test": np.where(graph.test_mask)[0].tolist(),
    }
    with open(os.path.join(path, "split.json"), "w", encoding="utf-8") as fh:
        json.dump(split, fh)
        fh.write("\n")
