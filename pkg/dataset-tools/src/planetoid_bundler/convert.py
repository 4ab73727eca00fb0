"""Convert raw Planetoid citation files into portable graph bundles.

The raw distribution ships eight files per dataset (``ind.<name>.x/tx/allx``
sparse feature blocks, ``y/ty/ally`` one-hot label blocks, a ``graph``
adjacency dict, and a plain-text ``test.index``). The pickles were written
by Python 2 with an old scipy, so loading goes through a compatibility
unpickler. Conversion reassembles the full node order (labeled block first,
then the test block scattered according to ``test.index``), symmetrizes and
deduplicates the adjacency dict, drops self-loop entries from the stored
edge list, and emits the five bundle files with fully deterministic
ordering, plus a ``report.json`` with counts and file checksums.

CiteSeer quirks handled here: the test index range contains gaps (isolated
papers with no features or labels; their rows stay zero and they join no
split), and the adjacency dict lists 124 self-loops. The commonly cited
edge count (``num_edges``) counts those self-loops; the stored edge list
(``num_edges_stored``) cannot contain them.
"""

from __future__ import annotations

import hashlib
import json
import os
import pickle
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse

DATASETS = ("cora", "citeseer", "pubmed")
RAW_PARTS = ("x", "y", "tx", "ty", "allx", "ally", "graph", "test.index")
VALIDATION_SIZE = 500

BUNDLE_FILES = ("meta.json", "edges.tsv", "features.tsv", "labels.tsv",
                "split.json")


class MissingRawFile(Exception):
    pass


class UnknownDataset(Exception):
    pass


class _CompatUnpickler(pickle.Unpickler):
    """Map module paths from the scipy/numpy versions that wrote the files."""

    _RENAMES = {
        ("scipy.sparse.csr", "csr_matrix"): scipy.sparse.csr_matrix,
        ("scipy.sparse.csc", "csc_matrix"): scipy.sparse.csc_matrix,
        ("scipy.sparse.coo", "coo_matrix"): scipy.sparse.coo_matrix,
        ("scipy.sparse.lil", "lil_matrix"): scipy.sparse.lil_matrix,
    }

    def find_class(self, module, name):
        if (module, name) in self._RENAMES:
            return self._RENAMES[(module, name)]
        return super().find_class(module, name)


def _load_pickle(path):
    with open(path, "rb") as fh:
        return _CompatUnpickler(fh, encoding="latin1").load()


@dataclass
class ConversionReport:
    dataset: str
    num_nodes: int
    num_edges: int          # commonly cited count: raw pairs incl. self-loops
    num_edges_stored: int   # lines in edges.tsv (self-loop free)
    num_self_loops: int
    num_features: int
    num_classes: int
    train_size: int
    val_size: int
    test_size: int
    checksums: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ConversionReport":
        return cls(**json.loads(text))


def _raw_paths(raw_dir: str, dataset: str) -> dict[str, str]:
    paths = {part: os.path.join(raw_dir, f"ind.{dataset}.{part}")
             for part in RAW_PARTS}
    for part, path in paths.items():
        if not os.path.isfile(path):
            raise MissingRawFile(path)
    return paths


def _assemble(raw_dir: str, dataset: str):
    """Rebuild full-node-order features, labels, edges, and splits."""
    paths = _raw_paths(raw_dir, dataset)
    allx = _load_pickle(paths["allx"]).tocsr()
    tx = _load_pickle(paths["tx"]).tocsr()
    ally = np.asarray(_load_pickle(paths["ally"]))
    ty = np.asarray(_load_pickle(paths["ty"]))
    y = np.asarray(_load_pickle(paths["y"]))
    graph = _load_pickle(paths["graph"])
    test_idx = np.loadtxt(paths["test.index"], dtype=np.int64)

    base = allx.shape[0]
    if int(test_idx.min()) != base:
        raise ValueError(
            f"test indices start at {int(test_idx.min())}, expected {base}")
    n = base + int(test_idx.max()) - base + 1
    d = allx.shape[1]

    features = np.zeros((n, d), dtype=np.float64)
    features[:base] = allx.toarray()
    features[test_idx] = tx.toarray()
    # standard citation-network preprocessing: L1-normalize feature rows
    row_sums = features.sum(axis=1, keepdims=True)
    row_sums[row_sums == 0.0] = 1.0
    features /= row_sums

    onehot = np.zeros((n, ally.shape[1]), dtype=np.float64)
    onehot[:base] = ally
    onehot[test_idx] = ty
    labels = onehot.argmax(axis=1).astype(np.int64)  # all-zero rows fall to 0

    pairs = set()
    self_loops = set()
    for u, nbrs in graph.items():
        for v in nbrs:
            if u == v:
                self_loops.add(int(u))
            else:
                pairs.add((min(int(u), int(v)), max(int(u), int(v))))
    edges = sorted(pairs)

    train = list(range(y.shape[0]))
    val = list(range(y.shape[0], y.shape[0] + VALIDATION_SIZE))
    test = sorted(int(t) for t in test_idx)

    return features, labels, edges, len(self_loops), (train, val, test)


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def convert_planetoid(raw_dir: str, dataset_name: str,
                      out_dir: str) -> ConversionReport:
    """Convert one raw dataset into a bundle directory plus report.json."""
    dataset = dataset_name.lower()
    if dataset not in DATASETS:
        raise UnknownDataset(f"{dataset_name!r}; known: {', '.join(DATASETS)}")
    features, labels, edges, num_self_loops, splits = _assemble(raw_dir, dataset)
    n, d = features.shape
    num_classes = int(labels.max()) + 1
    train, val, test = splits

    os.makedirs(out_dir, exist_ok=True)
    meta = {
        "name": dataset,
        "num_nodes": n,
        "num_features": d,
        "num_classes": num_classes,
        "directed": False,
    }
    with open(os.path.join(out_dir, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")

    with open(os.path.join(out_dir, "edges.tsv"), "w", encoding="utf-8") as fh:
        for u, v in edges:
            fh.write(f"{u}\t{v}\n")

    with open(os.path.join(out_dir, "features.tsv"), "w", encoding="utf-8") as fh:
        rows, cols = np.nonzero(features)
        for node, idx in zip(rows.tolist(), cols.tolist()):
            fh.write(f"{node}\t{idx}\t{float(features[node, idx])!r}\n")

    with open(os.path.join(out_dir, "labels.tsv"), "w", encoding="utf-8") as fh:
        for node, label in enumerate(labels.tolist()):
            fh.write(f"{node}\t{label}\n")

    with open(os.path.join(out_dir, "split.json"), "w", encoding="utf-8") as fh:
        json.dump({"train": train, "val": val, "test": test}, fh)
        fh.write("\n")

    report = ConversionReport(
        dataset=dataset,
        num_nodes=n,
        num_edges=len(edges) + num_self_loops,
        num_edges_stored=len(edges),
        num_self_loops=num_self_loops,
        num_features=d,
        num_classes=num_classes,
        train_size=len(train),
        val_size=len(val),
        test_size=len(test),
        checksums={name: _sha256(os.path.join(out_dir, name))
                   for name in BUNDLE_FILES},
    )
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    return report


@dataclass
class VerifyResult:
    passed: bool
    diffs: list[str]

    def __bool__(self) -> bool:
        return self.passed


def verify_bundle(bundle_dir: str, expected: ConversionReport) -> VerifyResult:
    """Recount a bundle from its files and diff against an expected report.

    Failure is a result (list of named mismatches), not an exception.
    """
    diffs: list[str] = []

    def check(name, got, want):
        if got != want:
            diffs.append(f"{name}: bundle has {got!r}, expected {want!r}")

    for name in BUNDLE_FILES:
        if not os.path.isfile(os.path.join(bundle_dir, name)):
            return VerifyResult(False, [f"missing file: {name}"])

    with open(os.path.join(bundle_dir, "meta.json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    check("meta.name", meta.get("name"), expected.dataset)
    check("meta.num_nodes", meta.get("num_nodes"), expected.num_nodes)
    check("meta.num_features", meta.get("num_features"), expected.num_features)
    check("meta.num_classes", meta.get("num_classes"), expected.num_classes)

    edge_lines = 0
    seen_edges = set()
    with open(os.path.join(bundle_dir, "edges.tsv"), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            u, v = (int(t) for t in line.split("\t"))
            edge_lines += 1
            if u == v:
                diffs.append(f"edges.tsv:{lineno}: self-loop at node {u}")
            if not u < v:
                diffs.append(f"edges.tsv:{lineno}: not in canonical u<v order")
            if (u, v) in seen_edges:
                diffs.append(f"edges.tsv:{lineno}: duplicate edge {(u, v)}")
            seen_edges.add((u, v))
    check("edge count (stored)", edge_lines, expected.num_edges_stored)

    label_count = 0
    max_label = -1
    bad_label_line = None
    with open(os.path.join(bundle_dir, "labels.tsv"), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            node, label = (int(t) for t in line.split("\t"))
            label_count += 1
            max_label = max(max_label, label)
            if not 0 <= label < expected.num_classes and bad_label_line is None:
                bad_label_line = lineno
    if bad_label_line is not None:
        diffs.append(f"labels.tsv:{bad_label_line}: label outside "
                     f"[0, {expected.num_classes})")
    check("node count (labels.tsv)", label_count, expected.num_nodes)
    check("class count (max label + 1)", max_label + 1, expected.num_classes)

    max_feature = -1
    with open(os.path.join(bundle_dir, "features.tsv"), encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            _, idx, _ = line.split("\t")
            max_feature = max(max_feature, int(idx))
    if max_feature >= expected.num_features:
        diffs.append(f"features.tsv: feature index {max_feature} outside "
                     f"[0, {expected.num_features})")

    with open(os.path.join(bundle_dir, "split.json"), encoding="utf-8") as fh:
        split = json.load(fh)
    check("train size", len(split.get("train", [])), expected.train_size)
    check("val size", len(split.get("val", [])), expected.val_size)
    check("test size", len(split.get("test", [])), expected.test_size)

    if expected.checksums:
        for name, want in expected.checksums.items():
            got = _sha256(os.path.join(bundle_dir, name))
            if got != want:
                diffs.append(f"checksum({name}): {got[:12]}... != {want[:12]}...")

    return VerifyResult(not diffs, diffs)
