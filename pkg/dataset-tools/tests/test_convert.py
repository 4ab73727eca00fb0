import json
import os

import pytest

from planetoid_bundler import (
    ConversionReport,
    MissingRawFile,
    UnknownDataset,
    convert_planetoid,
    verify_bundle,
)

RAW = os.path.join(os.path.dirname(__file__), "..", "rawdata")


@pytest.fixture(scope="module")
def cora(tmp_path_factory):
    out = tmp_path_factory.mktemp("cora-bundle")
    report = convert_planetoid(RAW, "cora", str(out))
    return out, report


@pytest.fixture(scope="module")
def citeseer(tmp_path_factory):
    out = tmp_path_factory.mktemp("citeseer-bundle")
    report = convert_planetoid(RAW, "citeseer", str(out))
    return out, report


class TestCoraConversion:
    def test_published_statistics(self, cora):
        _, report = cora
        assert report.num_nodes == 2708
        assert report.num_edges == 5278
        assert report.num_edges_stored == 5278
        assert report.num_self_loops == 0
        assert report.num_features == 1433
        assert report.num_classes == 7
        assert (report.train_size, report.val_size, report.test_size) \
            == (140, 500, 1000)

    def test_bundle_files_consistent(self, cora):
        out, report = cora
        meta = json.loads((out / "meta.json").read_text())
        assert meta["num_nodes"] == report.num_nodes
        assert meta["num_features"] == report.num_features
        assert meta["num_classes"] == report.num_classes
        assert not meta["directed"]
        edges = (out / "edges.tsv").read_text().splitlines()
        assert len(edges) == report.num_edges_stored
        labels = (out / "labels.tsv").read_text().splitlines()
        assert len(labels) == report.num_nodes

    def test_edges_canonical_and_loop_free(self, cora):
        out, _ = cora
        seen = set()
        for line in (out / "edges.tsv").read_text().splitlines():
            u, v = (int(t) for t in line.split("\t"))
            assert u < v
            assert (u, v) not in seen
            seen.add((u, v))

    def test_feature_rows_are_l1_normalized(self, cora):
        out, _ = cora
        sums = {}
        for line in (out / "features.tsv").read_text().splitlines():
            node, _, value = line.split("\t")
            sums[node] = sums.get(node, 0.0) + float(value)
        assert all(abs(s - 1.0) < 1e-9 for s in sums.values())


class TestCiteseerConversion:
    def test_published_statistics(self, citeseer):
        _, report = citeseer
        assert report.num_nodes == 3327
        assert report.num_edges == 4676      # counts the raw self-loops
        assert report.num_edges_stored == 4552
        assert report.num_self_loops == 124
        assert report.num_features == 3703
        assert report.num_classes == 6
        assert (report.train_size, report.val_size, report.test_size) \
            == (120, 500, 1000)

    def test_isolated_test_range_nodes_outside_splits(self, citeseer):
        out, report = citeseer
        split = json.loads((out / "split.json").read_text())
        covered = set(split["train"]) | set(split["val"]) | set(split["test"])
        assert len(split["test"]) == 1000
        # the 15 gap nodes in the test index range belong to no split
        assert len(covered) == report.train_size + report.val_size \
            + report.test_size


class TestDeterminism:
    def test_double_conversion_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        convert_planetoid(RAW, "cora", str(a))
        convert_planetoid(RAW, "cora", str(b))
        for name in ("meta.json", "edges.tsv", "features.tsv", "labels.tsv",
                     "split.json", "report.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name


class TestVerify:
    def test_fresh_conversion_verifies(self, cora):
        out, report = cora
        assert verify_bundle(str(out), report).passed

    def test_report_json_round_trips(self, cora):
        out, report = cora
        loaded = ConversionReport.from_json((out / "report.json").read_text())
        assert loaded == report

    def test_deleted_edge_fails_naming_edge_count(self, tmp_path):
        out = tmp_path / "bundle"
        report = convert_planetoid(RAW, "cora", str(out))
        lines = (out / "edges.tsv").read_text().splitlines()
        (out / "edges.tsv").write_text("\n".join(lines[:-1]) + "\n")
        result = verify_bundle(str(out), report)
        assert not result.passed
        assert any("edge count" in d for d in result.diffs)

    def test_tampered_label_fails_naming_labels_file(self, tmp_path):
        out = tmp_path / "bundle"
        report = convert_planetoid(RAW, "cora", str(out))
        lines = (out / "labels.tsv").read_text().splitlines()
        node, _ = lines[5].split("\t")
        lines[5] = f"{node}\t99"
        (out / "labels.tsv").write_text("\n".join(lines) + "\n")
        result = verify_bundle(str(out), report)
        assert not result.passed
        assert any("labels.tsv" in d for d in result.diffs)

    def test_missing_file_fails(self, tmp_path):
        out = tmp_path / "bundle"
        report = convert_planetoid(RAW, "cora", str(out))
        os.remove(out / "split.json")
        result = verify_bundle(str(out), report)
        assert not result.passed


class TestErrors:
    def test_unknown_dataset(self, tmp_path):
        with pytest.raises(UnknownDataset):
            convert_planetoid(RAW, "enron", str(tmp_path))

    def test_missing_raw_file(self, tmp_path):
        with pytest.raises(MissingRawFile):
            convert_planetoid(str(tmp_path), "cora", str(tmp_path / "out"))
