import json

import numpy as np
import pytest

from signet.errors import SignetError
from signet.estimators import EdgeSet
from signet.fileio import (
    format_float,
    read_edges_csv,
    read_json,
    read_matrix_csv,
    write_edges_csv,
    write_json,
    write_matrix_csv,
)


def first_line(path):
    return path.read_text().splitlines()[0]


class TestFormatFloat:
    def test_examples(self):
        assert format_float(1.0) == "1"
        assert format_float(0.5) == "0.5"
        assert format_float(1e-7) == "1e-07"
        assert format_float(1.0 / 3.0) == "0.333333333333"
        assert format_float(-2.25) == "-2.25"


class TestMatrixCsv:
    def test_roundtrip(self, tmp_path, rng):
        m = rng.standard_normal((5, 3))
        path = tmp_path / "m.csv"
        write_matrix_csv(path, m)
        back = read_matrix_csv(path)
        assert back.shape == (5, 3)
        assert np.allclose(back, m, rtol=1e-11, atol=0)

    def test_roundtrip_with_header(self, tmp_path):
        m = np.array([[1.5, 2.0], [3.0, 4.0]])
        path = tmp_path / "m.csv"
        write_matrix_csv(path, m, header=["alpha", "beta"])
        assert first_line(path) == "alpha,beta"
        assert np.array_equal(read_matrix_csv(path), m)

    def test_header_width_checked(self, tmp_path):
        with pytest.raises(SignetError):
            write_matrix_csv(tmp_path / "m.csv", np.eye(2), header=["only-one"])

    def test_vector_becomes_row(self, tmp_path):
        path = tmp_path / "v.csv"
        write_matrix_csv(path, np.array([1.0, 2.0, 3.0]))
        assert read_matrix_csv(path).shape == (1, 3)

    def test_ragged_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3\n")
        with pytest.raises(SignetError, match="ragged"):
            read_matrix_csv(path)

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(SignetError, match="no data"):
            read_matrix_csv(path)

    def test_non_numeric_body_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3,oops\n")
        with pytest.raises(SignetError, match="non-numeric"):
            read_matrix_csv(path)

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "gaps.csv"
        path.write_text("1,2\n\n3,4\n")
        assert read_matrix_csv(path).shape == (2, 2)


class TestEdgesCsv:
    def test_roundtrip_and_on_disk_form(self, tmp_path):
        edges = EdgeSet.from_pairs(6, [(4, 2), (0, 5), (0, 1)])
        path = tmp_path / "g.edges"
        write_edges_csv(path, edges)
        assert path.read_text() == "1,2\n1,6\n3,5\n"
        assert read_edges_csv(path, 6).edges == edges.edges

    def test_empty_graph(self, tmp_path):
        path = tmp_path / "g.edges"
        write_edges_csv(path, EdgeSet.from_pairs(4, []))
        assert path.read_text() == ""
        assert read_edges_csv(path, 4).n_edges == 0

    def test_out_of_range_rejected_on_read(self, tmp_path):
        path = tmp_path / "g.edges"
        path.write_text("1,9\n")
        with pytest.raises(SignetError):
            read_edges_csv(path, 4)

    def test_wrong_field_count(self, tmp_path):
        path = tmp_path / "g.edges"
        path.write_text("1,2,3\n")
        with pytest.raises(SignetError, match="two fields"):
            read_edges_csv(path, 4)


class TestJson:
    def test_schema_version_injected(self, tmp_path):
        path = tmp_path / "r.json"
        write_json(path, {"alpha": 1})
        back = read_json(path)
        assert back["schema_version"] == 1
        assert back["alpha"] == 1

    def test_explicit_schema_version_kept(self, tmp_path):
        path = tmp_path / "r.json"
        write_json(path, {"schema_version": 7})
        assert read_json(path)["schema_version"] == 7

    def test_keys_sorted_and_floats_trimmed(self, tmp_path):
        path = tmp_path / "r.json"
        write_json(path, {"zed": 1.0 / 3.0, "abc": 2})
        text = path.read_text()
        assert text.index('"abc"') < text.index('"zed"')
        assert "0.333333333333" in text

    def test_non_finite_becomes_null(self, tmp_path):
        path = tmp_path / "r.json"
        write_json(path, {"a": float("inf"), "b": float("nan"), "c": 1.0})
        back = read_json(path)
        assert back["a"] is None
        assert back["b"] is None
        assert back["c"] == 1.0

    def test_numpy_values_serialized(self, tmp_path):
        path = tmp_path / "r.json"
        write_json(
            path,
            {
                "arr": np.array([1.5, 2.5]),
                "i": np.int64(4),
                "f": np.float64(0.25),
                "flag": np.bool_(True),
            },
        )
        back = read_json(path)
        assert back["arr"] == [1.5, 2.5]
        assert back["i"] == 4
        assert back["f"] == 0.25
        assert back["flag"] is True

    def test_unserializable_rejected(self, tmp_path):
        with pytest.raises(SignetError):
            write_json(tmp_path / "r.json", {"x": object()})

    def test_rewrite_is_byte_identical(self, tmp_path):
        payload = {"b": [1, 2, {"c": 0.1}], "a": "text"}
        p1 = tmp_path / "one.json"
        p2 = tmp_path / "two.json"
        write_json(p1, payload)
        write_json(p2, json.loads(p1.read_text()))
        assert p1.read_bytes() == p2.read_bytes()
