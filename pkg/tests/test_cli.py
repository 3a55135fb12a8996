import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergolib import serialize
from ergolib.builtins import BUILTINS, builtin_names, load_builtin
from ergolib.cli import run
from ergolib.errors import InputError
from ergolib.operator_models import Diagonal, FiniteSupportVector


def _write(tmp_path, doc, name="in.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(p)


class TestExamples:
    def test_classify_jordan(self):
        code, r = run(["classify", "--builtin", "jordan-zero-index2", "--output", "/dev/null"])
        assert code == 0 and r["results"]["verdict"] == "Unbounded"
        (w,) = r["results"]["witnesses"]
        assert w["violated"] and w["violating_term"][0] == 1

    def test_cesaro_imaginary_unit(self):
        code, r = run(["cesaro", "--builtin", "intro-imaginary-unit", "--output", "/dev/null"])
        res = r["results"]
        assert code == 0 and res["analytic_limit"] == [[0.0, 0.0]] and res["strong"] is False
        assert res["passed"] and res["rate_bound"]["satisfied"]
        last = res["grid"][-1]
        assert last["t"] == pytest.approx(1e4) and last["error_norm"] <= 2e-4

    def test_model_right_shift(self):
        code, r = run(["model", "--builtin", "right-shift", "--output", "/dev/null"])
        res = r["results"]
        assert code == 0 and res["Af"] == {"entries": [[2, 1.0, 0.0], [3, 1.0, 0.0]]}
        assert res["checks"]["left_inverse_recovers_f"] and not res["checks"]["e1_in_range"]

    def test_model_self_adjoint(self):
        code, r = run(["model", "--builtin", "selfadjoint-nonpositive", "--output", "/dev/null"])
        res = r["results"]
        assert code == 0 and res["bounded"] and res["strong"]

    def test_unbounded_cesaro_exits_2(self):
        code, r = run(["cesaro", "--builtin", "jordan-zero-index2", "--output", "/dev/null"])
        assert code == 2 and r["status"] == "verification_failed" and r["results"]["witnesses"]

    def test_report_skips_means_when_unbounded(self):
        code, r = run(["report", "--builtin", "parity-projection", "--output", "/dev/null"])
        assert code == 0 and set(r["results"]) == {"model", "decompose", "classify"}

    @pytest.mark.parametrize("name", sorted(BUILTINS))
    def test_report_schema(self, name):
        code, r = run(["decompose", "--builtin", name, "--output", "/dev/null"])
        if code == 1:
            assert name == "right-shift"
            return
        assert set(r) == {"schema_version", "command", "inputs_digest", "config", "results", "warnings", "status"}
        assert r["schema_version"] == "1.0" and len(r["inputs_digest"]) == 64


class TestUsageErrors:
    def test_malformed_json_position(self, tmp_path, capsys):
        code, _ = run(["decompose", "--input", _write(tmp_path, '{"A": [[1,2],\n')])
        assert code == 1 and "line 2, column 1" in capsys.readouterr().err

    def test_unknown_builtin(self, capsys):
        code, _ = run(["decompose", "--builtin", "nope"])
        err = capsys.readouterr().err
        assert code == 1 and "right-shift" in err

    @pytest.mark.parametrize("flags", [["--t-max", "1"], ["--t-max", "nan"], ["--grid-density", "1"], ["--format", "csv"]])
    def test_bad_flags(self, flags):
        assert run(["classify", "--builtin", "intro-imaginary-unit", *flags])[0] == 1

    def test_unknown_command(self):
        assert run(["frobnicate", "--builtin", "intro-imaginary-unit"])[0] == 1

    def test_no_source(self):
        assert run(["classify"])[0] == 1

    def test_non_square(self, tmp_path, capsys):
        doc = {"A": {"rows": 1, "cols": 2, "entries": [1, 2]}, "f": [1]}
        assert run(["decompose", "--input", _write(tmp_path, doc)])[0] == 1
        assert "square" in capsys.readouterr().err

    def test_dimension_mismatch(self, tmp_path):
        doc = {"A": {"rows": 2, "cols": 2, "entries": [1, 0, 0, 1]}, "f": [1, 2, 3]}
        assert run(["classify", "--input", _write(tmp_path, doc)])[0] == 1

    def test_matrix_input(self, tmp_path):
        doc = {"A": {"rows": 2, "cols": 2, "entries": [0, 1, -1, 0]}, "f": [1, 0]}
        code, r = run(["rate", "--input", _write(tmp_path, doc), "--output", "/dev/null"])
        assert code == 0 and r["results"]["passed"]

    def test_right_shift_needs_model_command(self):
        assert run(["classify", "--builtin", "right-shift"])[0] == 1

    def test_matrix_document_for_model(self):
        assert run(["model", "--builtin", "jordan-zero-index2"])[0] == 1


class TestOutput:
    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            run(["rate", "--builtin", "diag-mixed-spectrum", "--output", str(out)])
        assert a.read_bytes() == b.read_bytes()

    def test_file_matches_report(self, tmp_path):
        out = tmp_path / "r.json"
        code, r = run(["classify", "--builtin", "intro-imaginary-unit", "--output", str(out)])
        assert json.loads(out.read_text()) == json.loads(json.dumps(r))

    def test_floats_round_trip(self, tmp_path):
        out = tmp_path / "r.json"
        run(["cesaro", "--builtin", "intro-imaginary-unit", "--output", str(out)])
        text = out.read_text()
        parsed = json.loads(text)
        for row in parsed["results"]["grid"]:
            assert float(repr(row["error_norm"])) == row["error_norm"]
        assert json.dumps(parsed, sort_keys=True, indent=2) + "\n" == text

    def test_csv(self, tmp_path):
        out = tmp_path / "r.csv"
        code, _ = run(["cesaro", "--builtin", "diag-mixed-spectrum", "--format", "csv", "--output", str(out)])
        rows = list(csv.reader(io.StringIO(out.read_text())))
        assert code == 0 and rows[0][0] == "t" and rows[0][-1] == "error_norm"
        times = [float(r[0]) for r in rows[1:]]
        assert times[0] == 1.0 and times[-1] == pytest.approx(1e4) and times == sorted(times)

    def test_text(self, tmp_path):
        out = tmp_path / "r.txt"
        code, _ = run(["decompose", "--builtin", "jordan-zero-index2", "--format", "text", "--output", str(out)])
        text = out.read_text()
        assert code == 0 and "schema_version" in text and not text.lstrip().startswith("{")

    def test_unwritable_output(self, tmp_path):
        assert run(["classify", "--builtin", "intro-imaginary-unit", "--output", str(tmp_path / "no" / "x")])[0] == 1

    def test_subprocess_entry(self):
        proc = subprocess.run(
            [sys.executable, "-m", "ergolib.cli", "classify", "--builtin", "intro-imaginary-unit"],
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0 and json.loads(proc.stdout)["results"]["verdict"] == "Bounded"

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            run(["--version"])
        assert info.value.code == 0 and "ergolib" in capsys.readouterr().out


class TestSerialize:
    def test_builtins_round_trip(self):
        for name in builtin_names():
            doc = load_builtin(name)
            assert json.loads(serialize.canonical_json(doc)) == json.loads(json.dumps(doc))

    def test_load_builtin_copies(self):
        doc = load_builtin("intro-imaginary-unit")
        doc["f"] = None
        assert load_builtin("intro-imaginary-unit")["f"] is not None

    def test_unknown_builtin(self):
        with pytest.raises(InputError):
            load_builtin("nope")

    def test_non_finite_as_strings(self):
        out = serialize.to_jsonable({"a": math.inf, "b": -math.inf, "c": math.nan, "z": 1 - 2j})
        assert out == {"a": "inf", "b": "-inf", "c": "nan", "z": [1.0, -2.0]}
        serialize.canonical_json(out)

    def test_digest_order_insensitive(self):
        assert serialize.digest({"a": 1, "b": 2}) == serialize.digest({"b": 2, "a": 1})

    def test_matrix_must_be_square(self):
        with pytest.raises(InputError):
            serialize.decode_matrix([[1, 2, 3], [4, 5, 6]])

    def test_diagonal_round_trip(self):
        op = Diagonal({1: 0, 3: 1j, 7: -0.5}, default=-1)
        assert serialize.decode_diagonal(json.loads(json.dumps(serialize.encode_diagonal(op)))) == op

    def test_bad_model_kind(self):
        with pytest.raises(InputError):
            serialize.decode_model({"kind": "left-shift"})


finite = st.floats(-1e300, 1e300, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=4), st.integers(1, 4))
def test_matrix_round_trip(entries, n):
    vals = [complex(a, b) for a, b in entries] * 16
    A = np.array(vals[: n * n]).reshape(n, n)
    assert np.array_equal(serialize.decode_matrix(json.loads(json.dumps(serialize.encode_matrix(A)))), A)


@settings(max_examples=100, deadline=None)
@given(st.dictionaries(st.integers(1, 10**6), st.tuples(finite, finite), max_size=6))
def test_sequence_round_trip(entries):
    v = FiniteSupportVector({k: complex(a, b) for k, (a, b) in entries.items()})
    text = serialize.canonical_json(serialize.encode_sequence(v))
    assert serialize.decode_sequence(json.loads(text)) == v
