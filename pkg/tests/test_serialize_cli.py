import json
import math
import os

import numpy as np
import pytest

from spbench import serialize
from spbench.cli import main
from spbench.clusters import MorseCluster, ThomsonSphere
from spbench.games import NashInstance, matching_pennies
from spbench.lattices import Phi4Lattice, XYLattice
from spbench.puzzles import PuzzleInstance, generate_grid_puzzle
from spbench.solvers import SolverConfig, multistart


def test_float_formatting_round_trips():
    values = [0.1, 1 / 3, math.pi, 1e-300, -1e17, 2.0, -0.0, 5e22]
    for v in values:
        assert float(serialize._fmt_float(v)) == v


def test_dumps_orders_keys_and_keeps_floats():
    text = serialize.dumps({"b": 1.5, "a": [1, 2.0], "c": {"z": True, "y": None}})
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    back = json.loads(text)
    assert back == {"a": [1, 2.0], "b": 1.5, "c": {"y": None, "z": True}}
    assert isinstance(back["a"][1], float)


def test_dumps_rejects_non_finite():
    with pytest.raises(ValueError):
        serialize.dumps({"x": float("nan")})
    with pytest.raises(ValueError):
        serialize.dumps({"x": float("inf")})


def test_dumps_numpy_scalars():
    text = serialize.dumps({"i": np.int64(3), "f": np.float64(0.25),
                            "b": np.bool_(True), "v": np.arange(3.0)})
    assert json.loads(text) == {"b": True, "f": 0.25, "i": 3, "v": [0.0, 1.0, 2.0]}


def test_write_atomic(tmp_path):
    path = tmp_path / "f.json"
    serialize.write_atomic(path, "hello\n")
    assert path.read_text() == "hello\n"
    serialize.write_atomic(path, "world\n")
    assert path.read_text() == "world\n"
    leftovers = [p for p in os.listdir(tmp_path) if p.endswith(".tmp")]
    assert leftovers == []


@pytest.mark.parametrize("make", [
    lambda: Phi4Lattice(3, J=0.4),
    lambda: XYLattice(2, 3, disorder="uniform-signed", seed=1),
    lambda: XYLattice(1, 4, bc="anti-periodic", gauge_fixed=False),
    lambda: ThomsonSphere(5),
    lambda: MorseCluster(3, rho=6.0),
    lambda: NashInstance(matching_pennies()),
    lambda: PuzzleInstance(generate_grid_puzzle(2, 2, 3, seed=5)[0]),
])
def test_instance_file_round_trip(tmp_path, make):
    inst = make()
    path = tmp_path / "inst.json"
    serialize.save_instance(inst, path)
    back = serialize.load_instance(path)
    assert back.family == inst.family
    assert back.label == inst.label
    assert back.n == inst.n
    serialize.save_instance(back, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == path.read_bytes()
    x = np.linspace(0.1, 1.3, inst.n)
    assert np.array_equal(np.asarray(inst.residual(x)),
                          np.asarray(back.residual(x)))


def test_instance_file_schema_checks(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"schema_version": 99, "family": "phi4",
                                "label": "x", "params": {}}))
    with pytest.raises(ValueError):
        serialize.load_instance(path)
    path.write_text(json.dumps({"schema_version": 1, "family": "unknown",
                                "label": "x", "params": {}}))
    with pytest.raises(ValueError):
        serialize.load_instance(path)


def test_result_file_round_trip(tmp_path):
    inst = Phi4Lattice(2)
    cfg = SolverConfig(method="newton", seed=0)
    res = multistart(inst, cfg, starts=inst.grid_starts())
    path = tmp_path / "res.json"
    serialize.save_result(res, cfg, path)
    loaded = serialize.load_result(path)
    assert loaded["instance_label"] == inst.label
    assert loaded["config"].method == "newton"
    assert loaded["campaign_stats"].converged == 81
    assert len(loaded["solutions"]) == 81
    first = loaded["solutions"].points[0]
    assert first.residual_norm <= cfg.accept_tol
    # wall time never reaches the payload
    raw = json.loads(path.read_text())
    assert raw["campaign_stats"]["wall_time"] is None


def test_check_result_catches_tampering(tmp_path):
    inst = Phi4Lattice(2)
    cfg = SolverConfig(method="newton", seed=0)
    res = multistart(inst, cfg, starts=inst.grid_starts())
    path = tmp_path / "res.json"
    serialize.save_result(res, cfg, path)
    assert serialize.check_result(inst, serialize.load_result(path)) == []
    raw = json.loads(path.read_text())
    raw["solutions"]["points"][0]["coords"][0] += 0.5
    path.write_text(json.dumps(raw))
    issues = serialize.check_result(inst, serialize.load_result(path))
    assert issues


def test_check_result_catches_wrong_index(tmp_path):
    inst = Phi4Lattice(2)
    cfg = SolverConfig(method="newton", seed=0)
    res = multistart(inst, cfg, starts=inst.grid_starts())
    path = tmp_path / "res.json"
    serialize.save_result(res, cfg, path)
    raw = json.loads(path.read_text())
    raw["solutions"]["points"][0]["index"] += 1
    path.write_text(json.dumps(raw))
    issues = serialize.check_result(inst, serialize.load_result(path))
    assert any("index" in s for s in issues)


def run_cli(*argv):
    return main(list(argv))


def test_cli_generate_solve_report_verify(tmp_path, capsys):
    inst = tmp_path / "phi4.json"
    resf = tmp_path / "phi4-r.json"
    assert run_cli("generate", "phi4", "--N", "2", "-o", str(inst)) == 0
    out = capsys.readouterr().out
    assert "n=4" in out
    assert "bezout=81" in out

    assert run_cli("solve", str(inst), "-o", str(resf), "--starts", "grid3") == 0
    out = capsys.readouterr().out
    assert "converged=81" in out
    assert "distinct solutions=81" in out

    assert run_cli("report", str(resf)) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "0,16 1,32 2,24 3,8 4,1"
    assert "solutions,81" in out
    assert "singular,0" in out

    assert run_cli("report", str(resf), "--format", "json") == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["index_histogram"] == {"0": 16, "1": 32, "2": 24, "3": 8, "4": 1}
    assert payload["energy_min"] == pytest.approx(-40.0)

    assert run_cli("verify", str(inst), str(resf)) == 0
    assert "ok" in capsys.readouterr().out


def test_cli_generate_all_families(tmp_path, capsys):
    cases = [
        ["generate", "xy", "--d", "2", "--L", "3", "--disorder", "uniform-signed",
         "--seed", "1", "-o", str(tmp_path / "xy.json")],
        ["generate", "thomson", "--charges", "4", "-o", str(tmp_path / "t.json")],
        ["generate", "lj", "--atoms", "2", "-o", str(tmp_path / "lj.json")],
        ["generate", "morse", "--atoms", "2", "--rho", "6", "-o", str(tmp_path / "m.json")],
        ["generate", "nash", "--preset", "matching-pennies", "-o", str(tmp_path / "n.json")],
        ["generate", "puzzle", "--grid", "2x2", "--colors", "3", "--seed", "5",
         "-o", str(tmp_path / "p.json")],
    ]
    for argv in cases:
        assert main(argv) == 0, argv
        capsys.readouterr()
    for name in ("xy", "t", "lj", "m", "n", "p"):
        assert (tmp_path / f"{name}.json").exists()


def test_cli_nash_game_file(tmp_path, capsys):
    game = {"players": 2, "strategy_counts": [2, 2],
            "payoffs": [[[3, 0], [5, 1]], [[3, 5], [0, 1]]]}
    gf = tmp_path / "game.json"
    gf.write_text(json.dumps(game))
    assert run_cli("generate", "nash", "--game", str(gf),
                   "-o", str(tmp_path / "inst.json")) == 0
    capsys.readouterr()
    inst = serialize.load_instance(tmp_path / "inst.json")
    assert inst.n == 6


def test_cli_exit_codes(tmp_path, capsys):
    # 1: usage errors
    assert run_cli("generate", "phi4", "--N", "2") == 1
    assert run_cli("solve", "missing.json", "-o", "x.json", "--seed", "0") == 1
    assert run_cli("nonsense") == 1
    capsys.readouterr()
    # 1: stochastic solve without a seed
    inst = tmp_path / "lj.json"
    assert run_cli("generate", "lj", "--atoms", "2", "-o", str(inst)) == 0
    assert run_cli("solve", str(inst), "-o", str(tmp_path / "r.json"),
                   "--starts", "5") == 1
    capsys.readouterr()
    # 2: campaign with zero converged starts
    noroot = tmp_path / "n.json"
    game = {"players": 2, "strategy_counts": [2, 2],
            "payoffs": [[[1, -1], [-1, 1]], [[-1, 1], [1, -1]]]}
    (tmp_path / "game.json").write_text(json.dumps(game))
    assert run_cli("generate", "nash", "--game", str(tmp_path / "game.json"),
                   "-o", str(noroot)) == 0
    code = run_cli("solve", str(noroot), "-o", str(tmp_path / "nr.json"),
                   "--starts", "1", "--seed", "0", "--method", "gradsq",
                   "--max-iters", "3")
    assert code == 2
    capsys.readouterr()


def test_cli_grid3_only_for_phi4(tmp_path, capsys):
    inst = tmp_path / "lj.json"
    assert run_cli("generate", "lj", "--atoms", "2", "-o", str(inst)) == 0
    assert run_cli("solve", str(inst), "-o", str(tmp_path / "r.json"),
                   "--starts", "grid3") == 1
    capsys.readouterr()


def test_cli_verify_flags_tampered_file(tmp_path, capsys):
    inst = tmp_path / "phi4.json"
    resf = tmp_path / "r.json"
    assert run_cli("generate", "phi4", "--N", "2", "-o", str(inst)) == 0
    assert run_cli("solve", str(inst), "-o", str(resf), "--starts", "grid3") == 0
    capsys.readouterr()
    raw = json.loads(resf.read_text())
    raw["solutions"]["points"][3]["coords"][0] += 0.25
    resf.write_text(json.dumps(raw))
    assert run_cli("verify", str(inst), str(resf)) == 3
    err = capsys.readouterr().err
    assert "mismatch" in err


def test_cli_rerun_byte_identity(tmp_path, capsys):
    inst = tmp_path / "xy.json"
    assert run_cli("generate", "xy", "--d", "1", "--L", "4",
                   "-o", str(inst)) == 0
    r1 = tmp_path / "r1.json"
    r2 = tmp_path / "r2.json"
    assert run_cli("solve", str(inst), "-o", str(r1), "--starts", "50",
                   "--seed", "4") == 0
    os.environ["SPBENCH_THREADS"] = "2"
    try:
        assert run_cli("solve", str(inst), "-o", str(r2), "--starts", "50",
                       "--seed", "4") == 0
    finally:
        del os.environ["SPBENCH_THREADS"]
    capsys.readouterr()
    assert r1.read_bytes() == r2.read_bytes()


def test_cli_help_exits_zero(capsys):
    assert run_cli("--help") == 0
    capsys.readouterr()
    assert run_cli("generate", "--help") == 0
    capsys.readouterr()
