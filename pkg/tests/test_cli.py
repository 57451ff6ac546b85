import json
from importlib import resources
from pathlib import Path

import jsonschema
import pytest
from referencing import Registry, Resource

from sphnn import cli
from sphnn.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, EXIT_TIMEOUT, main
from sphnn.errors import NumericError

DATA = Path(__file__).parent / "data"


def _registry():
    reg = Registry()
    for f in resources.files("sphnn.schemas").iterdir():
        if f.name.endswith(".json"):
            reg = reg.with_resource(f.name, Resource.from_contents(json.loads(f.read_text())))
    return reg


REGISTRY = _registry()


def validate(obj, name):
    schema = REGISTRY.contents(name)
    jsonschema.Draft202012Validator(schema, registry=REGISTRY).validate(obj)


def run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def barbara(tmp_path):
    p = tmp_path / "barbara.txt"
    p.write_text("all s m\nall m p\ntherefore: all s p\n")
    return p


class TestDecide:
    def test_valid_task(self, capsys, barbara):
        code, out, _ = run(capsys, ["decide", str(barbara)])
        d = json.loads(out)
        assert code == EXIT_OK
        assert d["validity"] == "valid" and d["seed"] == 0
        validate(d, "decide.json")

    def test_invalid_task_has_checked_model(self, capsys):
        code, out, _ = run(capsys, ["decide", "-e", "all s m;all p m;therefore: all s p"])
        d = json.loads(out)
        assert d["validity"] == "invalid" and d["checkModel"] == 0.0
        assert set(d["model"]["spheres"]) == {"s", "m", "p"}
        validate(d, "decide.json")

    def test_satisfiability(self, capsys):
        code, out, _ = run(capsys, ["decide", "-e", "no m0 s;all p m0;some-not s p", "--dim", "3"])
        d = json.loads(out)
        assert d["verdict"] == "sat" and d["model"]["dim"] == 3
        validate(d, "decide.json")

    def test_seed_from_environment(self, capsys, barbara, monkeypatch):
        monkeypatch.setenv("SPHNN_SEED", "7")
        _, out, _ = run(capsys, ["decide", str(barbara), "--random-init"])
        assert json.loads(out)["seed"] == 7
        monkeypatch.setenv("SPHNN_SEED", "x")
        assert run(capsys, ["decide", str(barbara)])[0] == EXIT_INPUT

    def test_deterministic(self, capsys, barbara):
        outs = []
        for _ in range(2):
            d = json.loads(run(capsys, ["decide", str(barbara)])[1])
            d["trace"].pop("wallTimeMs")
            outs.append(d)
        assert outs[0] == outs[1]

    @pytest.mark.parametrize("argv", [
        ["decide", "-e", "most s m;all m p;therefore: all s p"],
        ["decide", "-e", "all s m;all n p;therefore: all s p"],
        ["decide", "/nonexistent/task.txt"],
        ["decide"],
    ])
    def test_input_errors(self, capsys, argv):
        code, _, err = run(capsys, argv)
        assert code == EXIT_INPUT and err.startswith("error:")

    def test_timeout(self, capsys, barbara):
        assert run(capsys, ["decide", str(barbara), "--time-limit-ms", "0"])[0] == EXIT_TIMEOUT

    def test_numeric_error(self, capsys, barbara, monkeypatch):
        def boom(*a, **k):
            raise NumericError("stalled")
        monkeypatch.setattr(cli, "decide_validity", boom)
        code, _, err = run(capsys, ["decide", str(barbara)])
        assert code == EXIT_NUMERIC and "stalled" in err

    def test_bad_flag_exits_with_input_code(self):
        with pytest.raises(SystemExit) as exc:
            main(["decide", "--dim", "two"])
        assert exc.value.code == EXIT_INPUT


class TestRender:
    def test_svg_is_deterministic(self, capsys, tmp_path):
        _, out, _ = run(capsys, ["decide", "-e", "all s m;all p m;therefore: all s p"])
        model = tmp_path / "m.json"
        model.write_text(out)
        svgs = [run(capsys, ["render", str(model)])[1] for _ in range(2)]
        assert svgs[0] == svgs[1]
        assert svgs[0].count("<circle") == 3 and svgs[0].startswith("<svg")

    def test_rejects_three_dimensions(self, capsys, tmp_path):
        model = tmp_path / "m.json"
        model.write_text(json.dumps({"dim": 3, "spheres": {"a": {"center": [0, 0, 0],
                                                                  "radius": 1}}}))
        assert run(capsys, ["render", str(model)])[0] == EXIT_INPUT

    @pytest.mark.parametrize("text", ["not json", '{"dim": 2, "spheres": {"a": {"center": [0],'
                                      ' "radius": 1}}}', '{"dim": 2, "spheres": {"a": '
                                      '{"center": [0, 0], "radius": 0}}}'])
    def test_malformed_models(self, capsys, tmp_path, text):
        model = tmp_path / "m.json"
        model.write_text(text)
        assert run(capsys, ["render", str(model)])[0] == EXIT_INPUT


class TestEmbedDecide:
    def test_sat_and_unsat(self, capsys, tmp_path):
        emb = tmp_path / "emb.txt"
        emb.write_text("s 1 0 0\nm 0 1 0\np 0 0 1\n")
        ok = tmp_path / "ok.txt"
        ok.write_text("all s m\nall m p\ntherefore: all s p\n")
        cyc = tmp_path / "cyc.txt"
        cyc.write_text("all s m\nall m p\nall p s\n")
        code, out, _ = run(capsys, ["embed-decide", str(ok), str(emb)])
        d = json.loads(out)
        assert code == EXIT_OK and d["verdict"] == "sat" and d["model"]["dim"] == 3
        validate(d, "embed_decide.json")
        d = json.loads(run(capsys, ["embed-decide", str(cyc), str(emb)])[1])
        assert d["verdict"] == "unsat" and d["sweeps"] == 9
        validate(d, "embed_decide.json")

    @pytest.mark.parametrize("emb_text", ["s 1 0\nm 0 1 0\np 1 1\n", "s 1 0\nm 0 1\n",
                                          "s 0 0\nm 0 1\np 1 1\n", "s 1 0\ns 0 1\n"])
    def test_bad_embeddings(self, capsys, tmp_path, emb_text):
        emb = tmp_path / "emb.txt"
        emb.write_text(emb_text)
        st = tmp_path / "st.txt"
        st.write_text("all s m\nall m p\n")
        assert run(capsys, ["embed-decide", str(st), str(emb)])[0] == EXIT_INPUT


class TestSuiteAndBench:
    def test_suite_then_bench(self, capsys, tmp_path):
        path = tmp_path / "suite.json"
        assert run(capsys, ["suite", "--n", "4", "--seed", "3", "-o", str(path)])[0] == EXIT_OK
        validate(json.loads(path.read_text()), "suite.json")
        csv_path = tmp_path / "res.csv"
        code, out, _ = run(capsys, ["bench", "--suite", str(path), "--jobs", "1",
                                    "--csv", str(csv_path), "--limits-ms", "1", "100000"])
        d = json.loads(out)
        assert code == EXIT_OK
        validate(d, "bench.json")
        assert d["summary"]["tasks"] == 120 and d["summary"]["accuracy"] == 1.0
        assert d["accuracyByLimitMs"]["100000"] == 1.0
        assert len(csv_path.read_text().splitlines()) == 121

    def test_bench_timeouts_exit_4(self, capsys):
        code, out, _ = run(capsys, ["bench", "--n", "3", "--jobs", "1", "--time-limit-ms", "0"])
        assert code == EXIT_TIMEOUT
        assert json.loads(out)["summary"]["timedOut"] == 120

    def test_bad_suite_file(self, capsys, tmp_path):
        path = tmp_path / "suite.json"
        path.write_text('{"n": 3, "seed": 0, "groups": [["all s m\\nall m p\\ntherefore: all s p"]]}')
        assert run(capsys, ["bench", "--suite", str(path)])[0] == EXIT_INPUT


class TestVerifyAndEnumerate:
    def test_verify(self, capsys):
        code, out, _ = run(capsys, ["verify", str(DATA / "transcript.txt")])
        d = json.loads(out)
        assert code == EXIT_OK
        validate(d, "verify.json")
        assert [r["class"] for r in d["rounds"]] == ["H2", "IncorrectDecision", "H1"]

    def test_enumerate(self, capsys):
        code, out, err = run(capsys, ["enumerate"])
        lines = out.splitlines()
        assert code == EXIT_OK
        assert lines[0].startswith("# seed=0 configHash=")
        assert lines[1].startswith("id,premises,conclusion,verdict")
        assert len(lines) == 256 + 3
        assert lines[-1] == "# valid=24 agree=256/256"
        assert err.strip() == "valid=24 agree=256/256"
