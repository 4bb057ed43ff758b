import json
import math
import os

import numpy as np
import pandas as pd
import pytest

from hitlab.engine.graph_model import sample_er_graph
from hitlab.engine.spectral import build_normalized_adjacency, eigendecompose
from hitlab.errors import ParseError
from hitlab.file_loader import (
    dumps_json,
    graph_paths,
    read_graph,
    roundtrip,
    to_jsonable,
    write_csv,
    write_eigenvectors,
    write_graph,
    write_json,
)


def _write_pair(tmp_path, csv_text, meta=None):
    prefix = str(tmp_path / "g")
    meta = meta or {"n": 4, "p": 0.5, "seed": 1, "rng_id": "numpy.PCG64"}
    (tmp_path / "g.csv").write_text(csv_text, encoding="utf-8")
    (tmp_path / "g.json").write_text(json.dumps(meta), encoding="utf-8")
    return prefix


class TestRoundtrip:
    def test_k3(self, k3, tmp_path):
        assert roundtrip(k3, str(tmp_path / "k3")).identical(k3)

    def test_large_sample(self, tmp_path):
        g = sample_er_graph(1000, 0.1, seed=5)
        assert roundtrip(g, str(tmp_path / "big")).identical(g)

    def test_empty_graph(self, tmp_path):
        g = sample_er_graph(6, 0.0, seed=0)
        assert roundtrip(g, str(tmp_path / "empty")).identical(g)

    def test_awkward_p_survives(self, tmp_path):
        g = sample_er_graph(20, 0.1 + 0.2, seed=3)
        assert read_graph(write_graph(g, str(tmp_path / "x"))[0]).p == 0.1 + 0.2

    def test_file_layout(self, path3, tmp_path):
        csv_path, meta_path = write_graph(path3, str(tmp_path / "path"))
        assert open(csv_path, encoding="utf-8").read() == "i,j\n0,1\n1,2\n"
        meta = json.load(open(meta_path, encoding="utf-8"))
        assert meta == {"n": 3, "p": 1.0, "seed": 0, "rng_id": "numpy.PCG64"}

    def test_graph_paths_strip_extension(self):
        assert graph_paths("out/k3.csv") == ("out/k3.csv", "out/k3.json")
        assert graph_paths("out/k3") == ("out/k3.csv", "out/k3.json")


class TestReadGraphErrors:
    def test_duplicate_row(self, tmp_path):
        prefix = _write_pair(tmp_path, "i,j\n0,1\n0,1\n")
        with pytest.raises(ParseError) as err:
            read_graph(prefix)
        assert err.value.line == 3

    def test_bad_header(self, tmp_path):
        prefix = _write_pair(tmp_path, "u,v\n0,1\n")
        with pytest.raises(ParseError) as err:
            read_graph(prefix)
        assert err.value.line == 1

    def test_unordered_edge(self, tmp_path):
        prefix = _write_pair(tmp_path, "i,j\n0,1\n2,1\n")
        with pytest.raises(ParseError) as err:
            read_graph(prefix)
        assert err.value.line == 3

    def test_blank_line_keeps_file_line_numbers(self, tmp_path):
        prefix = _write_pair(tmp_path, "i,j\n0,1\n\n1,2\n")
        with pytest.raises(ParseError) as err:
            read_graph(prefix)
        assert err.value.line == 3

    def test_vertex_out_of_range(self, tmp_path):
        prefix = _write_pair(tmp_path, "i,j\n0,4\n")
        with pytest.raises(ParseError):
            read_graph(prefix)

    def test_non_integer_vertex(self, tmp_path):
        prefix = _write_pair(tmp_path, "i,j\n0,x\n")
        with pytest.raises(ParseError) as err:
            read_graph(prefix)
        assert err.value.line == 2
        assert err.value.path.endswith("g.csv")

    def test_empty_file(self, tmp_path):
        prefix = _write_pair(tmp_path, "")
        with pytest.raises(ParseError):
            read_graph(prefix)

    def test_missing_metadata_field(self, tmp_path):
        prefix = _write_pair(tmp_path, "i,j\n", meta={"n": 4, "p": 0.5, "seed": 1})
        with pytest.raises(ParseError):
            read_graph(prefix)

    def test_invalid_metadata_json(self, tmp_path):
        prefix = _write_pair(tmp_path, "i,j\n")
        (tmp_path / "g.json").write_text("{not json", encoding="utf-8")
        with pytest.raises(ParseError):
            read_graph(prefix)


class TestWriters:
    def test_to_jsonable(self):
        out = to_jsonable({"a": np.float64(1.5), "b": np.int64(2), "c": np.array([1.0, math.nan]), 3: np.bool_(True)})
        assert out == {"a": 1.5, "b": 2, "c": [1.0, None], "3": True}

    def test_dumps_json_is_strict(self):
        assert json.loads(dumps_json({"x": math.inf})) == {"x": None}

    def test_float_roundtrip_exact(self, tmp_path):
        value = 1 / 3
        write_json(str(tmp_path / "v.json"), {"v": value})
        assert json.load(open(tmp_path / "v.json"))["v"] == value

    def test_atomic_write_leaves_no_temp_files(self, tmp_path):
        write_json(str(tmp_path / "a.json"), {"x": 1})
        write_csv(str(tmp_path / "a.csv"), pd.DataFrame({"x": [0.1]}))
        assert sorted(os.listdir(tmp_path)) == ["a.csv", "a.json"]

    def test_csv_floats_round_trip(self, tmp_path):
        values = [1 / 3, 2 ** 0.5, 1e-300]
        write_csv(str(tmp_path / "f.csv"), pd.DataFrame({"v": values}))
        assert pd.read_csv(tmp_path / "f.csv", float_precision="round_trip")["v"].tolist() == values

    def test_eigenvector_dump(self, k3, tmp_path):
        dec = eigendecompose(build_normalized_adjacency(k3))
        write_eigenvectors(str(tmp_path / "v.csv"), dec)
        df = pd.read_csv(tmp_path / "v.csv", float_precision="round_trip")
        assert df.shape == (3, 3)
        assert np.allclose(df.iloc[0].to_numpy(), dec.eigenvectors[:, 0])
