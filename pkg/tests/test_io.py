import io as stdio
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmem import io
from qmem.channels import dephasing, erasure, random_channel, QuantumChannel
from qmem.errors import InvalidInputError, ParseError
from qmem.games import canned_game


def test_channel_round_trip_bit_identical(tmp_path):
    for ch in [random_channel(2, 3, 2, seed=1), erasure(0.3),
               QuantumChannel.from_choi(random_channel(3, 2, 2, seed=2).choi.matrix, 3, 2)]:
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        io.save_channel(ch, p1)
        a = io.load_channel(p1)
        io.save_channel(a, p2)
        b = io.load_channel(p2)
        np.testing.assert_array_equal(a.choi.matrix, b.choi.matrix)
        if a.kraus is not None:
            for x, y in zip(a.kraus, b.kraus):
                np.testing.assert_array_equal(x, y)
        assert p1.read_text() == p2.read_text()


def test_channel_json_format():
    obj = io.channel_to_json(dephasing(1.0))
    assert obj["d_in"] == 2 and obj["d_out"] == 2
    assert obj["kraus"][0][0][0] == [1.0, 0.0]


def test_game_round_trip(tmp_path):
    g = canned_game("damping", 0.4)
    io.save_game(g, tmp_path / "g.json")
    h = io.load_game(tmp_path / "g.json")
    np.testing.assert_array_equal(g.coefficients, h.coefficients)
    assert h.eb_normalized and h.label == g.label


def test_malformed_json_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n "d_in": 2,\n "d_out": 2\n "kraus": []\n}\n')
    with pytest.raises(ParseError, match="line 4"):
        io.load_channel(p)


@pytest.mark.parametrize("obj,match", [
    ({"d_out": 2, "kraus": []}, "missing field 'd_in'"),
    ({"d_in": "2", "d_out": 2, "kraus": []}, r"d_in: expected int"),
    ({"d_in": 2, "d_out": 2, "kraus": [[[1, 0], [0, 1]]]}, r"kraus\[0\]\[0\]\[0\]: expected \[re, im\]"),
    ({"d_in": 2, "d_out": 2}, "needs a 'kraus' or 'choi'"),
    ({"d_in": 2, "d_out": 2, "kraus": [[[[1, 0], [0, 0]]]]}, r"kraus\[0\]: shape"),
])
def test_malformed_channel_fields(obj, match):
    with pytest.raises(ParseError, match=match):
        io.channel_from_json(obj)


def test_missing_file():
    with pytest.raises(InvalidInputError):
        io.load_channel("/nonexistent/file.json")


def test_counts_validation():
    base = {"game_label": "g", "coefficient_vector": [1.0],
            "settings": [{"i": 0, "j": 0, "shots": 10, "successes": 11}]}
    with pytest.raises(ParseError, match="successes"):
        io.counts_from_json(base)
    base["settings"][0].update(successes=3, shots=0)
    with pytest.raises(ParseError, match="shots"):
        io.counts_from_json(base)
    base["settings"][0].update(shots=10)
    base["coefficient_vector"] = [1.0, 2.0]
    with pytest.raises(ParseError):
        io.counts_from_json(base)
    base["coefficient_vector"] = ["x"]
    with pytest.raises(ParseError, match=r"coefficient_vector\[0\]"):
        io.counts_from_json(base)


def test_ingest_zero_record():
    rec = io.CountsRecord("z", tuple(io.Setting(k, k, 100, 0) for k in range(3)), (0.0, 0.0, 0.0))
    assert io.ingest_counts(rec) == (0.0, 0.0, -1.0)


def test_ingest_formula():
    rec = io.CountsRecord("g", (io.Setting(0, 0, 100, 30), io.Setting(1, 1, 50, 10)), (2.0, -1.0))
    score, std, bound = io.ingest_counts(rec)
    assert score == pytest.approx(2 * 0.3 - 0.2)
    assert std == pytest.approx(math.sqrt(4 * 0.3 * 0.7 / 100 + 0.2 * 0.8 / 50))
    assert bound == pytest.approx(score - 1)


@settings(max_examples=100)
@given(n=st.integers(1, 8), seed=st.integers(0, 2**31 - 1), scale=st.floats(0.1, 10))
def test_ingest_is_linear(n, seed, scale):
    rng = np.random.default_rng(seed)
    shots = rng.integers(1, 10_000, size=n)
    sets = tuple(io.Setting(k, k, int(s), int(rng.integers(0, s + 1))) for k, s in enumerate(shots))
    c = tuple(rng.normal(size=n))
    s1, d1, _ = io.ingest_counts(io.CountsRecord("g", sets, c))
    s2, d2, _ = io.ingest_counts(io.CountsRecord("g", sets, tuple(scale * x for x in c)))
    assert s2 == pytest.approx(scale * s1, abs=1e-12)
    assert d2 == pytest.approx(scale * d1, abs=1e-12)


def test_counts_file_round_trip(tmp_path):
    recs = io.shipped_counts("erasure")
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"records": [io.counts_to_json(r) for r in recs]}))
    again = io.load_counts(p)
    assert [io.ingest_counts(r) for r in again] == [io.ingest_counts(r) for r in recs]
    p.write_text(json.dumps(io.counts_to_json(recs[0])))
    assert len(io.load_counts(p)) == 1


@pytest.mark.parametrize("name", ["dephasing", "erasure", "damping"])
def test_shipped_theory_scores(name):
    for rec in io.shipped_counts(name):
        if rec.meta["source"] == "Theory":
            assert abs(io.ingest_counts(rec)[0] - rec.meta["published_score"]) <= 1e-3


def test_shipped_ibmq_golden():
    s = io.ingest_counts(io.find_record(io.shipped_counts("dephasing"), "IBMQ", 1.0))[0]
    assert abs(s - 1.8278) <= 1e-3
    s = io.ingest_counts(io.find_record(io.shipped_counts("erasure"), "IBMQ", 1.0))[0]
    assert abs(s - 1.8845) <= 1e-3
    with pytest.raises(InvalidInputError):
        io.find_record(io.shipped_counts("erasure"), "IBMQ", 0.3)
    with pytest.raises(InvalidInputError):
        io.shipped_counts("nope")


def test_sweep_examples():
    rows = io.sweep("dephasing", [0, 0.5, 1], ["eig"])
    assert [r["value"] for r in rows] == pytest.approx([1, 0, 1], abs=1e-12)
    rows = io.sweep("erasure", [0.25, 0.5, 0.75, 1.0], ["sdp"])
    assert [r["value"] for r in rows] == pytest.approx([0.25, 0.5, 0.75, 1.0], abs=1e-6)
    assert all(r["is_exact"] for r in rows)
    assert io.sweep("depolarizing", [0.2], ["sdp"])[0]["value"] == 0


def test_sweep_order_deterministic_with_workers():
    methods = ["sdp", "eig", "moment:3"]
    serial = io.sweep("damping", np.linspace(0, 1, 6), methods)
    pooled = io.sweep("damping", np.linspace(0, 1, 6), methods, workers=4)
    key = [(r["p"], r["method"]) for r in serial]
    assert key == [(r["p"], r["method"]) for r in pooled]
    assert key[:3] == [(0.0, "sdp"), (0.0, "eig"), (0.0, "moment:3")]
    assert [r["value"] for r in serial] == [r["value"] for r in pooled]


def test_sweep_bad_inputs():
    with pytest.raises(InvalidInputError):
        io.sweep("nope", [0.5], ["eig"])
    with pytest.raises(InvalidInputError):
        io.sweep("dephasing", [1.5], ["eig"])
    with pytest.raises(InvalidInputError):
        io.sweep("dephasing", [0.5], ["magic"])


def test_csv_format():
    buf = stdio.StringIO()
    io.write_rows_csv([{"family": "f", "p": 1 / 3, "method": "eig", "value": 0.1 + 0.2,
                        "is_exact": True, "wall_time": 2}], io.SWEEP_COLUMNS, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "family,p,method,value,is_exact,wall_time"
    assert lines[1] == "f,0.333333333333,eig,0.3,true,2"
