import io as _io
import json
import subprocess
import sys

import numpy as np
import pytest

from ibap import io
from ibap.analysis import check_conditions
from ibap.cli import run
from ibap.errors import InputError
from ibap.fixtures import random_system
from ibap.subspace import INF


def cli(args, stdin_text=None):
    out, err = _io.StringIO(), _io.StringIO()
    stdin = _io.StringIO(stdin_text) if stdin_text is not None else None
    code = run(args, stdin=stdin, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    def write(name, doc):
        p = tmp_path / name
        p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(p)

    return write


AXES = {"dim": 3, "subspaces": [[[1, 0, 0]], [[0, 1, 0]]]}
DUP = {"dim": 2, "subspaces": [[[1, 0]], [[1, 0]]]}


class TestIO:
    def test_byte_offset(self):
        with pytest.raises(InputError, match="byte offset 10"):
            io.loads('{"dim": 2,')

    def test_byte_offset_counts_utf8(self):
        with pytest.raises(InputError, match="byte offset 9"):
            io.loads('{"é": 1,,}')

    def test_not_utf8(self):
        with pytest.raises(InputError, match="UTF-8"):
            io.loads(b"\xff\xfe")

    @pytest.mark.parametrize("text,value", [(1, 1.0), ("2.5", 2.5), ("inf", INF), ("1-2j", 1 - 2j)])
    def test_scalars(self, text, value):
        assert io.parse_scalar(text) == value

    @pytest.mark.parametrize("bad", [None, True, "x", "nan", [1]])
    def test_bad_scalars(self, bad):
        with pytest.raises(InputError):
            io.parse_scalar(bad)

    def test_emit_scalar(self):
        assert io.emit_scalar(INF) == "inf"
        assert io.emit_scalar(1.5) == 1.5
        assert io.parse_scalar(io.emit_scalar(0.5 - 1e-3j)) == 0.5 - 1e-3j

    @pytest.mark.parametrize("seed", range(6))
    def test_system_round_trip(self, seed):
        s = random_system(np.random.default_rng(seed), complex_=bool(seed % 2))
        assert io.parse_system(io.loads(io.dumps(io.emit_system(s)))) == s

    @pytest.mark.parametrize("seed", range(6))
    def test_report_round_trip(self, seed):
        r = check_conditions(random_system(np.random.default_rng(seed)))
        assert io.parse_report(io.loads(io.dumps(io.emit_report(r)))) == r

    def test_parse_errors(self):
        with pytest.raises(InputError, match="missing field 'subspaces'"):
            io.parse_system({"dim": 2})
        with pytest.raises(InputError, match="column has 3 entries"):
            io.parse_system({"dim": 2, "subspaces": [[[1, 0, 0]]]})
        with pytest.raises(InputError, match="weights"):
            io.parse_system({"dim": 2, "weights": [1, -1], "subspaces": [[[1, 0]]]})
        with pytest.raises(InputError):
            io.parse_report({"dim": 1})

    def test_non_orthonormal_input_is_orthonormalized(self):
        s = io.parse_system({"dim": 2, "subspaces": [[[3, 0], [1, 1]]]})
        assert s.ranks == (2,)


class TestCLI:
    def test_analyze(self, files):
        code, out, _ = cli(["analyze", files("a.json", AXES)])
        doc = json.loads(out)
        assert code == 0 and doc["ibap"] and doc["format_version"] == 1

    def test_analyze_stdin(self):
        code, out, _ = cli(["analyze", "-"], json.dumps(AXES))
        assert code == 0 and json.loads(out)["c"] == 1.0

    def test_text_format(self, files):
        code, out, _ = cli(["analyze", files("a.json", AXES), "--format", "text"])
        assert code == 0 and "ibap: True" in out.splitlines()

    def test_witnesses_option(self, files):
        _, out, _ = cli(["analyze", files("a.json", AXES), "--witnesses"])
        assert "oblique_projections" in json.loads(out)["witnesses"]

    def test_solve(self, files):
        code, out, _ = cli(["solve", files("a.json", AXES), files("t.json", {"coords": [[1.0], [2.0]]})])
        assert code == 0 and json.loads(out)["x"] == [1.0, 2.0, 0.0]

    @pytest.mark.parametrize("method", ["exact", "cond10", "approx"])
    def test_solve_refusal(self, files, method):
        code, out, err = cli(["solve", files("d.json", DUP), files("t.json", {"coords": [[1.0], [2.0]]}), "--method", method])
        doc = json.loads(out)
        assert code == 2 and doc["status"] == "refused"
        assert doc["details"]["li_dim_gap"] == 1
        assert "refused" in err

    def test_malformed_json(self, files):
        code, out, err = cli(["analyze", files("bad.json", '{"dim": 2,')])
        assert code == 1 and out == "" and "byte offset 10" in err

    def test_missing_file(self):
        code, _, err = cli(["analyze", "/nonexistent/x.json"])
        assert code == 1 and "cannot read" in err

    def test_usage_error(self):
        assert cli(["frobnicate"])[0] == 1
        assert cli(["prob", "tails", "--kind", "geometric"])[0] == 1

    @pytest.mark.parametrize("value", ["0", "-1e-3", "abc"])
    def test_bad_tolerance(self, files, value):
        assert cli(["analyze", files("a.json", AXES), "--tol", value])[0] == 1

    def test_env_tolerance(self, files, monkeypatch):
        path = files("a.json", AXES)
        monkeypatch.setenv("IBAP_TOL", "-5")
        assert cli(["analyze", path])[0] == 1
        monkeypatch.setenv("IBAP_TOL", "1e-6")
        _, out, _ = cli(["analyze", path])
        assert json.loads(out)["margins"]["3"]["threshold"] == pytest.approx(1e-6 * 2**0.5)

    def test_tol_flag_overrides_env(self, files, monkeypatch):
        monkeypatch.setenv("IBAP_TOL", "-5")
        assert cli(["analyze", files("a.json", AXES), "--tol", "1e-8"])[0] == 0

    def test_spectral(self, files):
        code, out, _ = cli(["spectral", files("s.json", {"A": [[1, 1], [0, 2]], "lambdas": [1, 2]})])
        doc = json.loads(out)
        assert code == 0 and doc["report"]["ibap"]
        assert doc["bezout"]["exact"] and doc["bezout"]["residual"] == 0.0

    def test_spectral_root(self, files):
        doc = {"A": [[0, 1, 0], [0, 0, 0], [0, 0, 1]], "lambdas": [0, 1], "mults": [2, 1]}
        code, out, _ = cli(["spectral", files("s.json", doc)])
        assert code == 0 and json.loads(out)["report"]["ranks"] == [2, 1]

    def test_riesz_family(self, files):
        code, out, _ = cli(["riesz", files("f.json", {"dim": 2, "vectors": [[1, 0], [0, 2]]})])
        doc = json.loads(out)
        assert code == 0 and doc["epsilon"] == 1.0 and doc["C"] == 2.0

    def test_riesz_families(self, files):
        doc = dict(AXES, families=[[[2, 0, 0]], [[0, 3, 0]]])
        code, out, _ = cli(["riesz", files("f.json", doc)])
        assert code == 0 and json.loads(out)["ibap"]

    def test_generate_is_seeded(self):
        a = cli(["generate", "--seed", "3", "--ibap"])
        assert a == cli(["generate", "--seed", "3", "--ibap"])
        assert a != cli(["generate", "--seed", "4", "--ibap"])
        assert check_conditions(io.parse_system(json.loads(a[1]))).ibap

    def test_prob_tails(self):
        code, out, _ = cli(["prob", "tails", "--kind", "geometric", "--q", "0.5", "--N", "100"])
        assert code == 0 and json.loads(out)["sup_ratio"] == 0.5

    def test_prob_tails_csv(self):
        code, out, _ = cli(["prob", "tails", "--kind", "power", "--N", "5", "--format", "csv"])
        lines = out.splitlines()
        assert code == 0 and lines[0] == "k,r_k,ratio,rk_over_pk,pk_ratio" and len(lines) == 6

    def test_prob_sweep_csv(self):
        code, out, _ = cli(["prob", "sweep", "--kind", "geometric", "--Ns", "10,20", "--format", "csv"])
        assert code == 0 and out.splitlines()[0] == "N,c_N,sup_ratio,imp" and len(out.splitlines()) == 3

    def test_csv_not_available(self, files):
        assert cli(["analyze", files("a.json", AXES), "--format", "csv"])[0] == 1

    def test_prob_imp_check(self, files):
        doc = {"measure": {"kind": "geometric", "params": {"q": 0.5}, "N": 10}, "alternating": 2}
        code, out, _ = cli(["prob", "imp-check", files("m.json", doc)])
        assert code == 0 and json.loads(out)["imp"]

    def test_prob_imp_solve(self, files):
        doc = {"p": [0.25, 0.25, 0.5], "partitions": [[[0, 1], [2]], [[0], [1, 2]]],
               "xis": [[1, 1, 2], [0, 2, 2]]}
        code, out, _ = cli(["prob", "imp-solve", files("m.json", doc)])
        assert code == 0 and len(json.loads(out)["xi"]) == 3
        # means 1.5 and 1.75: no solution exists
        doc["xis"] = [[1, 1, 2], [1, 2, 2]]
        code, out, _ = cli(["prob", "imp-solve", files("m.json", doc)])
        assert code == 2 and "unequal means" in json.loads(out)["message"]

    def test_prob_imp_solve_refused(self, files):
        doc = {"p": [0.5, 0.5], "labels": [[0, 1], [0, 1]], "xis": [[1, 2], [1, 2]]}
        code, out, _ = cli(["prob", "imp-solve", files("m.json", doc)])
        assert code == 2 and json.loads(out)["report"]["ibap"] is False

    def test_prob_interval(self, files):
        doc = {"pis": [[1, 2], [2, 3]], "masses": [0.4, 0.3, 0.2, 0.1]}
        code, out, _ = cli(["prob", "interval", files("i.json", doc)])
        out = json.loads(out)
        assert code == 0 and not out["imp"] and out["overlap"]["point"] == 2.0

    def test_prob_bickel(self, files):
        code, out, _ = cli(["prob", "bickel", files("b.json", {"joint": [[0.3, 0.2], [0.2, 0.3]]})])
        assert code == 0 and json.loads(out)["alpha"] == pytest.approx(0.8)

    def test_prob_shift(self):
        code, out, _ = cli(["prob", "shift", "--kind", "geometric", "--N", "10"])
        assert code == 0 and json.loads(out)["identity_residual"] < 1e-12

    def test_bad_partition(self, files):
        doc = {"p": [0.5, 0.5], "partitions": [[[0], [0, 1]]]}
        code, _, err = cli(["prob", "imp-check", files("m.json", doc)])
        assert code == 1 and "partition" in err

    def test_console_script(self, files):
        path = files("a.json", AXES)
        proc = subprocess.run([sys.executable, "-m", "ibap.cli", "analyze", path], capture_output=True, text=True)
        assert proc.returncode == 0 and json.loads(proc.stdout)["ibap"]
        again = subprocess.run([sys.executable, "-m", "ibap.cli", "analyze", path], capture_output=True, text=True)
        assert again.stdout == proc.stdout
