import io
import json

import pytest

from gowers_automatic import __version__
from gowers_automatic.cli import Command, UsageError, execute, main, parse


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = execute(parse(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_parse_examples():
    cmd = parse(["norm", "--seq", "tm", "--s", "2", "--n", "1024"])
    assert cmd.name == "norm" and cmd.output == "json"
    assert (cmd.options["seq"], cmd.options["s"], cmd.options["n"]) == ("tm", 2, 1024)
    assert parse(["graph", "--seq", "rs", "--s", "2", "--out", "dot"]).output == "dot"
    with pytest.raises(UsageError, match="s out of supported range"):
        parse(["norm", "--seq", "tm", "--s", "9"])


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["norm", "--seq", "tm", "--s", "2"],
    ["norm", "--seq", "tm", "--s", "two", "--n", "8"],
    ["norm", "--seq", "xx", "--s", "2", "--n", "8"],
    ["norm", "--seq", "tm", "--s", "2", "--n", "8", "--bogus"],
    ["aps", "--seq", "tm", "--k", "2", "--n", "8"],
    ["spectrum", "--seq", "tm", "--s", "2", "--fit-window", "30,10"],
    ["norm", "--seq", "tm", "--s", "2", "--n", "8", "--out", "dot"],
    ["scan-conjecture", "--patterns", "10"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(UsageError):
        parse(argv)
    assert main(argv) == 1


def test_norm_json_line():
    code, out, _ = run(["norm", "--seq", "tm", "--s", "2", "--n", "64"])
    assert code == 0 and out.count("\n") == 1
    doc = json.loads(out)
    assert doc["tool_version"] == __version__ and doc["seq"] == "tm" and doc["s"] == 2
    assert {"N", "power_num", "power_den", "norm", "method"} <= set(doc)


def test_output_is_deterministic():
    argv = ["spectrum", "--seq", "rs", "--s", "2"]
    assert run(argv) == run(argv)
    argv = ["norm", "--seq", "tm", "--s", "3", "--n", "40", "--threads", "3"]
    one = run(argv)[1]
    assert one == run(argv[:-2])[1]


def test_graph_outputs():
    code, out, _ = run(["graph", "--seq", "rs", "--s", "2", "--out", "dot"])
    assert code == 0 and out.startswith("digraph")
    doc = json.loads(run(["graph", "--seq", "tm", "--s", "2"])[1])
    assert doc["strongly_connected"] and doc["aperiodic"] and doc["r_symmetric"]
    assert len(doc["vertices"]) == 12 and doc["edges"][0].keys() == {"from", "to", "num", "den"}


def test_aps_sweep_is_csv(tmp_path):
    data = tmp_path / "dev.dat"
    code, out, _ = run(["aps", "--seq", "tm", "--k", "3", "--n-ladder", "256,512,1024",
                        "--data", str(data)])
    lines = out.splitlines()
    assert code == 0 and len(lines) == 4
    assert lines[0].split(",")[:4] == ["tool_version", "seq", "s", "N"]
    assert len(data.read_text().splitlines()) == 3


def test_other_commands_run():
    for argv in (
        ["cube-avg", "--seq", "rs", "--s", "2", "--L", "3", "--labels", "R0,R1,R0,R1",
         "--offsets", "0,1,1,2", "--residual"],
        ["expsum", "--seq", "tm", "--n", "256"],
        ["corr", "--seq", "tm", "--a", "3", "--b", "1", "--m", "50"],
        ["selfcorr", "--seq", "tm", "--n", "512", "--h-max", "2"],
        ["scan-conjecture", "--patterns", "1,111", "--n", "256", "--q-max", "3"],
        ["norm", "--seq", "pattern:101", "--s", "2", "--n", "16", "--csv"],
    ):
        code, out, err = run(argv)
        assert code == 0, (argv, err)
        assert out


def test_cube_avg_label_errors():
    code, _, err = run(["cube-avg", "--seq", "rs", "--s", "2", "--L", "3", "--labels", "R0,R9,R0,R0"])
    assert code == 1 and "unknown kernel element" in err


def test_budget_and_cap_exit_code_two():
    assert run(["norm", "--seq", "tm", "--s", "3", "--n", "4096", "--work-budget", "1000"])[0] == 2
    assert run(["graph", "--seq", "tm", "--s", "4", "--vertex-cap", "100"])[0] == 2
    assert run(["aps", "--seq", "tm", "--n", "4096", "--work-budget", "10"])[0] == 2


def test_command_dataclass_defaults():
    assert Command("norm").output == "json" and Command("norm").options == {}
