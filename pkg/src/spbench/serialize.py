"""Instance and result files.

Both file kinds are JSON with sorted keys and floats printed to 17
significant digits, so saving, loading and saving again reproduces the bytes
exactly, and two runs of the same seeded campaign produce identical files at
any thread count.  Writes go through a temporary file and an atomic rename.
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile

import numpy as np

from . import clusters, games, lattices, puzzles
from .core import SolutionSet, stationary_point_from_dict, stationary_point_to_dict
from .solvers import CampaignStats, SolverConfig

SCHEMA_VERSION = 1


def _fmt_float(v):
    if not np.isfinite(v):
        raise ValueError(f"cannot serialize non-finite float {v!r}")
    s = format(float(v), ".17g")
    if "." not in s and "e" not in s and "n" not in s:
        s += ".0"
    return s


def _emit(obj, out, indent):
    pad = "  " * indent
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, k in enumerate(keys):
            if not isinstance(k, str):
                raise TypeError(f"JSON keys must be strings, got {k!r}")
            out.append(pad + "  " + json.dumps(k) + ": ")
            _emit(obj[k], out, indent + 1)
            out.append(",\n" if i + 1 < len(keys) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(seq):
            out.append(pad + "  ")
            _emit(v, out, indent + 1)
            out.append(",\n" if i + 1 < len(seq) else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    out = []
    _emit(obj, out, 0)
    out.append("\n")
    return "".join(out)


def write_atomic(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".spbench-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def instance_to_dict(instance):
    return {
        "schema_version": SCHEMA_VERSION,
        "family": instance.family,
        "label": instance.label,
        "params": instance.params(),
    }


def _build_phi4(params, label):
    return lattices.Phi4Lattice(N=int(params["N"]), lam=params["lam"],
                                mu2=params["mu2"], J=params["J"], label=label)


def _build_xy(params, label):
    return lattices.XYLattice(d=int(params["d"]), L=int(params["L"]),
                              bc=params["bc"], disorder=params["disorder"],
                              seed=int(params["seed"]),
                              gauge_fixed=bool(params["gauge_fixed"]),
                              couplings=params["couplings"], label=label)


def _build_thomson(params, label):
    return clusters.ThomsonSphere(charges=int(params["charges"]), label=label)


def _build_lj(params, label):
    return clusters.LennardJonesCluster(atoms=int(params["atoms"]),
                                        epsilon=params["epsilon"],
                                        sigma=params["sigma"], label=label)


def _build_morse(params, label):
    return clusters.MorseCluster(atoms=int(params["atoms"]), rho=params["rho"],
                                 epsilon=params["epsilon"], r_e=params["r_e"],
                                 label=label)


def _build_nash(params, label):
    game = games.NashGame([np.asarray(t, dtype=float) for t in params["payoffs"]])
    counts = [int(c) for c in params["strategy_counts"]]
    if list(game.shape) != counts:
        raise ValueError(f"strategy_counts {counts} do not match payoff shape {game.shape}")
    if game.players != int(params["players"]):
        raise ValueError("player count does not match the payoff tensors")
    return games.NashInstance(game, label=label)


def _build_puzzle(params, label):
    def piece(d):
        return puzzles.Piece([puzzles.Edge(e["b"], e["c"], e["theta"])
                              for e in d["edges"]])

    k_set = [tuple(k) for k in params["k_set"]] if "k_set" in params else None
    puzzle = puzzles.Puzzle(piece(params["frame"]),
                            [piece(p) for p in params["pieces"]],
                            k_set=k_set, label=label)
    return puzzles.PuzzleInstance(puzzle, label=label)


_BUILDERS = {
    "phi4": _build_phi4,
    "xy": _build_xy,
    "thomson": _build_thomson,
    "lj": _build_lj,
    "morse": _build_morse,
    "nash": _build_nash,
    "puzzle": _build_puzzle,
}


def instance_from_dict(d):
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {d.get('schema_version')!r}")
    family = d.get("family")
    if family not in _BUILDERS:
        raise ValueError(f"unknown family {family!r}")
    return _BUILDERS[family](d["params"], d.get("label"))


def save_instance(instance, path):
    write_atomic(path, dumps(instance_to_dict(instance)))


def load_instance(path):
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def config_to_dict(cfg):
    d = dataclasses.asdict(cfg)
    if d["start_box"] is not None:
        d["start_box"] = list(d["start_box"])
    return d


def config_from_dict(d):
    from .solvers import Damping, HomotopySchedule
    d = dict(d)
    d["damping"] = Damping(**d.get("damping", {}))
    d["homotopy"] = HomotopySchedule(**d.get("homotopy", {}))
    if d.get("start_box") is not None:
        d["start_box"] = tuple(d["start_box"])
    return SolverConfig(**d)


def result_to_dict(result, cfg):
    sol = result.solutions
    stats = dataclasses.asdict(result.stats)
    stats["wall_time"] = None  # timing is run-dependent; keep files comparable
    return {
        "schema_version": SCHEMA_VERSION,
        "instance_label": sol.instance_label,
        "config": config_to_dict(cfg),
        "campaign_stats": stats,
        "solutions": {
            "instance_label": sol.instance_label,
            "tolerance": sol.tolerance,
            "metric": sol.metric,
            "points": [stationary_point_to_dict(sp) for sp in sol.points],
        },
    }


def save_result(result, cfg, path):
    write_atomic(path, dumps(result_to_dict(result, cfg)))


def load_result(path):
    with open(path) as fh:
        d = json.load(fh)
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {d.get('schema_version')!r}")
    sol_d = d["solutions"]
    label = sol_d["instance_label"]
    solutions = SolutionSet(
        instance_label=label,
        tolerance=float(sol_d["tolerance"]),
        metric=str(sol_d["metric"]),
        points=[stationary_point_from_dict(label, p) for p in sol_d["points"]],
    )
    stats_d = d.get("campaign_stats", {})
    stats = CampaignStats(
        starts=int(stats_d.get("starts", 0)),
        converged=int(stats_d.get("converged", 0)),
        diverged=int(stats_d.get("diverged", 0)),
        spurious=int(stats_d.get("spurious", 0)),
        eval_errors=int(stats_d.get("eval_errors", 0)),
        wall_time=0.0,
    )
    return {
        "instance_label": d["instance_label"],
        "config": config_from_dict(d["config"]),
        "campaign_stats": stats,
        "solutions": solutions,
    }


def check_result(instance, loaded):
    """Recompute residual norms and classifications for a loaded result.
    Returns a list of mismatch descriptions; empty means the file checks out.
    """
    from .core import classify

    issues = []
    if loaded["instance_label"] != instance.label:
        issues.append(f"instance label {loaded['instance_label']!r} does not match "
                      f"{instance.label!r}")
    tol = loaded["config"].accept_tol
    for i, sp in enumerate(loaded["solutions"].points):
        try:
            f = np.asarray(instance.residual(sp.point), dtype=float)
        except Exception as exc:
            issues.append(f"point {i}: residual evaluation failed: {exc}")
            continue
        norm = float(np.linalg.norm(f))
        if norm > tol:
            issues.append(f"point {i}: residual norm {norm:.3e} exceeds "
                          f"tolerance {tol:.3e}")
        if abs(norm - sp.residual_norm) > tol * 10.0 + 1e-15:
            issues.append(f"point {i}: stored residual norm {sp.residual_norm:.3e} "
                          f"disagrees with recomputed {norm:.3e}")
        fresh = classify(instance, sp.point)
        if fresh.index != sp.index:
            issues.append(f"point {i}: stored index {sp.index} but recomputed "
                          f"{fresh.index}")
        if fresh.singular != sp.singular:
            issues.append(f"point {i}: stored singular={sp.singular} but "
                          f"recomputed {fresh.singular}")
        if fresh.zero_eigs != sp.zero_eigs:
            issues.append(f"point {i}: stored zero_eigs={sp.zero_eigs} but "
                          f"recomputed {fresh.zero_eigs}")
        scale = 1.0 + abs(fresh.energy)
        if abs(fresh.energy - sp.energy) > 1e-9 * scale:
            issues.append(f"point {i}: stored energy {sp.energy!r} but "
                          f"recomputed {fresh.energy!r}")
    return issues
