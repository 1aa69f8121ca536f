import json

import pytest

from sinkopt.cli import main

P3 = "1 2\n2 3\n"
C4 = "1 2\n2 3\n3 4\n4 1\n"


def run(capsys, *argv: str) -> tuple:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_p3(capsys, write_graph) -> None:
    code, out, _ = run(capsys, "solve", "--graph", write_graph(P3), "--k", "2", "--nu", "0.8")
    assert code == 0
    report = json.loads(out)
    assert report["schema"] == "sinkopt/1"
    assert report["command"] == "solve"
    assert report["offered"]["set"] == [1, 2]
    assert report["offered"]["F"] == pytest.approx(1.0)
    assert report["m"] == 1
    assert report["starters"] == [[2]]


def test_oracle_p3(capsys, write_graph) -> None:
    code, out, _ = run(capsys, "oracle", "--graph", write_graph(P3), "--k", "1")
    assert code == 0
    report = json.loads(out)
    assert report["set"] == [2]
    assert report["F"] == pytest.approx(2.0)


def test_hit_reports_labels(capsys, write_graph) -> None:
    code, out, _ = run(capsys, "hit", "--graph", write_graph(C4), "--set", "1")
    assert code == 0
    report = json.loads(out)
    assert report["target"] == [1]
    assert report["h"] == {"2": 3.0, "3": 4.0, "4": 3.0}
    assert report["F"] == 10.0


def test_hit_with_monte_carlo(capsys, write_graph) -> None:
    code, out, _ = run(
        capsys, "hit", "--graph", write_graph(P3), "--set", "1", "--mc-walks", "200", "--seed", "3"
    )
    assert code == 0
    assert set(json.loads(out)["monte_carlo"]) == {"2", "3"}


def test_cover_and_rank(capsys, write_graph) -> None:
    path = write_graph(P3)
    code, out, _ = run(capsys, "cover", "--graph", path)
    assert code == 0
    cover = json.loads(out)
    assert cover["matching"] == [[1, 2]]
    assert cover["C"] == 2
    assert cover["F_of_cover"] == 1.0

    code, out, _ = run(capsys, "rank", "--graph", path, "--set", "2")
    rank = json.loads(out)
    assert rank["F_empty"] == 13.0
    assert rank["exact_empty"] is True
    assert rank["rho_bar"] == pytest.approx(5 / 6)


def test_candidates_report(capsys, write_graph) -> None:
    code, out, _ = run(capsys, "candidates", "--graph", write_graph(P3), "--nu", "1.0")
    assert code == 0
    report = json.loads(out)
    assert report["m"] == 2
    assert [m["set"] for m in report["members"]] == [[1, 2], [1, 3], [2, 3]]
    assert report["greedoid_report"]["family"]["G2"] is False
    assert report["greedoid_report"]["closure"]["violations"] == []


def test_csv_rows(capsys, write_graph) -> None:
    code, out, _ = run(
        capsys, "compare", "--graph", write_graph(P3), "--k", "2", "--format", "csv", "--with-oracle"
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "set,F,rho,method"
    assert lines[1].startswith("1 2,1.0,")
    assert [line.rsplit(",", 1)[1] for line in lines[1:]] == ["starter", "greedy", "oracle"]


def test_curvature_and_bounds(capsys, write_graph) -> None:
    path = write_graph(P3)
    code, out, _ = run(capsys, "curvature", "--graph", path, "--nu", "0.8")
    assert code == 0
    assert json.loads(out)["gamma"] == pytest.approx(1.0)

    code, out, _ = run(capsys, "bounds", "--graph", path, "--nu", "0.8", "--k", "2")
    assert code == 0
    bounds = json.loads(out)
    assert bounds["eta_bar"] == 1.0
    assert bounds["r"] == 0


def test_backward(capsys, write_graph) -> None:
    code, out, _ = run(capsys, "backward", "--graph", write_graph(C4), "--k", "2")
    assert code == 0
    report = json.loads(out)
    assert report["set"] == [2, 4]
    assert [step["removed"] for step in report["trace"]] == [1, 3]


def test_simulate(capsys, write_graph) -> None:
    code, out, _ = run(
        capsys,
        "simulate",
        "--graph",
        write_graph(P3),
        "--set",
        "1",
        "--start",
        "3",
        "--walks",
        "5000",
        "--seed",
        "1",
    )
    assert code == 0
    report = json.loads(out)
    assert report["exact"] == 4.0
    assert abs(report["z"]) < 5


def test_validation_error_exit_code(capsys, write_graph) -> None:
    code, out, err = run(capsys, "hit", "--graph", write_graph("1 2\n3 4\n"), "--set", "1")
    assert code == 1
    assert out == ""
    assert json.loads(err)["error"]["code"] == "disconnected"


def test_k_below_starter_size_suggests_backward(capsys, write_graph) -> None:
    code, _, err = run(capsys, "solve", "--graph", write_graph(P3), "--k", "1", "--nu", "1.0")
    assert code == 1
    error = json.loads(err)["error"]
    assert error["code"] == "k_below_starter_size"
    assert "backward" in error["message"]


def test_missing_graph_is_usage_error(capsys) -> None:
    with pytest.raises(SystemExit) as info:
        main(["oracle", "--k", "1"])
    assert info.value.code == 2


def test_seed_rejected_by_deterministic_commands(capsys, write_graph) -> None:
    with pytest.raises(SystemExit) as info:
        main(["oracle", "--graph", write_graph(P3), "--k", "1", "--seed", "4"])
    assert info.value.code == 2


def test_csv_not_available_for_hit(capsys, write_graph) -> None:
    with pytest.raises(SystemExit) as info:
        main(["hit", "--graph", write_graph(P3), "--set", "1", "--format", "csv"])
    assert info.value.code == 2


K4 = "1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n"
STAR = "0 1\n0 2\n0 3\n"
PATH6 = "1 2\n2 3\n3 4\n4 5\n5 6\n6 1\n1 4\n"

DETERMINISTIC = [
    ["hit", "--set", "1"],
    ["simulate", "--set", "1", "--start", "3", "--walks", "200", "--seed", "5"],
    ["rank", "--set", "1"],
    ["cover"],
    ["candidates", "--nu", "0.5"],
    ["greedy", "--k", "2"],
    ["backward", "--k", "2"],
    ["oracle", "--k", "2"],
    ["solve", "--k", "2", "--nu", "0.5"],
    ["compare", "--k", "2", "--nu", "0.5", "--with-oracle", "--with-backward"],
    ["curvature", "--nu", "0.5"],
    ["bounds", "--k", "2", "--nu", "0.5"],
]


@pytest.mark.parametrize("text", [P3, C4, K4, STAR, PATH6], ids=["p3", "c4", "k4", "star", "hexagon"])
@pytest.mark.parametrize("argv", DETERMINISTIC, ids=[a[0] for a in DETERMINISTIC])
def test_output_is_deterministic(capsys, write_graph, text, argv) -> None:
    path = write_graph(text)
    first = run(capsys, *argv, "--graph", path)
    second = run(capsys, *argv, "--graph", path)
    threaded = run(capsys, *argv, "--graph", path, "--threads", "8")
    assert first == second
    assert threaded[:2] == first[:2]
