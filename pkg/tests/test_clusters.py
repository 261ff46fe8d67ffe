import math

import numpy as np
import pytest

from spbench.core import EvaluationError, classify, fd_gradient
from spbench.clusters import (
    LennardJonesCluster,
    MorseCluster,
    ThomsonSphere,
    pair_curvature,
)


def test_thomson_variable_counts():
    assert ThomsonSphere(2).n == 1
    assert ThomsonSphere(3).n == 3
    assert ThomsonSphere(6).n == 9
    with pytest.raises(ValueError):
        ThomsonSphere(1)


def test_thomson_two_charges_antipodal():
    inst = ThomsonSphere(2)
    x = np.array([np.pi])  # second charge at the south pole
    assert inst.energy(x) == pytest.approx(0.5)
    assert np.linalg.norm(inst.gradient(x)) < 1e-12
    sp = classify(inst, x)
    assert sp.index == 0


def test_thomson_three_charges_equilateral():
    inst = ThomsonSphere(3)
    # great-circle equilateral triangle in the x-z plane
    x = np.array([2 * np.pi / 3, 4 * np.pi / 3, 0.0])
    assert inst.energy(x) == pytest.approx(math.sqrt(3.0))
    assert np.linalg.norm(inst.gradient(x)) < 1e-10


def test_thomson_gradient_matches_fd():
    rng = np.random.default_rng(0)
    for n in (2, 3, 4, 5):
        inst = ThomsonSphere(n)
        for _ in range(5):
            x = inst.sample_start(rng)
            ga = inst.gradient(x)
            gf = fd_gradient(inst, x)
            assert np.linalg.norm(ga - gf) / (1 + np.linalg.norm(ga)) < 1e-6


def test_thomson_coincident_charges_raise():
    inst = ThomsonSphere(2)
    with pytest.raises(EvaluationError):
        inst.energy(np.array([0.0]))  # both charges at the north pole


def test_thomson_sample_start_separation():
    inst = ThomsonSphere(6)
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = inst.sample_start(rng)
        pos = inst.positions(x)
        d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
        iu = np.triu_indices(6, 1)
        assert d[iu].min() >= 0.5
        assert np.allclose(np.linalg.norm(pos, axis=1), 1.0)


def test_cluster_variable_counts():
    assert LennardJonesCluster(2).n == 1
    assert LennardJonesCluster(3).n == 3
    assert LennardJonesCluster(4).n == 6
    assert MorseCluster(2, rho=6.0).n == 1
    with pytest.raises(ValueError):
        LennardJonesCluster(1)


def test_lj_dimer_minimum():
    inst = LennardJonesCluster(2)
    r_min, e_min = inst.pair_minimum()
    assert r_min == pytest.approx(2 ** (1 / 6), abs=1e-14)
    assert e_min == -1.0
    x = np.array([r_min])
    assert inst.energy(x) == pytest.approx(-1.0, abs=1e-10)
    assert abs(inst.gradient(x)[0]) < 1e-12
    sp = classify(inst, x)
    assert sp.index == 0


def test_lj_scaling_with_parameters():
    inst = LennardJonesCluster(2, epsilon=2.5, sigma=0.8)
    r_min, e_min = inst.pair_minimum()
    assert r_min == pytest.approx(0.8 * 2 ** (1 / 6))
    assert e_min == -2.5
    assert inst.energy(np.array([r_min])) == pytest.approx(-2.5, abs=1e-10)


def test_morse_dimer_minimum():
    inst = MorseCluster(2, rho=6.0)
    r_min, e_min = inst.pair_minimum()
    assert r_min == 1.0
    assert e_min == -1.0
    assert inst.energy(np.array([1.0])) == pytest.approx(-1.0, abs=1e-12)
    assert abs(inst.gradient(np.array([1.0]))[0]) < 1e-12


def test_morse_rho_changes_width_not_depth():
    for rho in (3.0, 6.0, 10.0):
        inst = MorseCluster(2, rho=rho)
        assert inst.energy(np.array([1.0])) == pytest.approx(-1.0, abs=1e-12)
    narrow = MorseCluster(2, rho=10.0).energy(np.array([1.3]))
    wide = MorseCluster(2, rho=3.0).energy(np.array([1.3]))
    assert narrow > wide  # stiffer well climbs faster


def test_pair_curvature_closed_forms():
    assert pair_curvature(LennardJonesCluster(2)) == 72.0
    assert pair_curvature(MorseCluster(2, rho=6.0)) == 72.0
    assert pair_curvature(MorseCluster(2, rho=3.0)) == 18.0


def test_pair_curvature_numeric_agrees():
    num_lj = pair_curvature(LennardJonesCluster(2), at_equilibrium=False)
    assert num_lj == pytest.approx(72.0, rel=1e-5)
    num_m = pair_curvature(MorseCluster(2, rho=6.0), at_equilibrium=False)
    assert num_m == pytest.approx(72.0, rel=1e-5)


def test_cluster_gradients_match_fd():
    rng = np.random.default_rng(1)
    for inst in (LennardJonesCluster(3), LennardJonesCluster(4),
                 MorseCluster(3, rho=6.0), MorseCluster(4, rho=4.0)):
        for _ in range(5):
            x = inst.sample_start(rng)
            ga = inst.gradient(x)
            gf = fd_gradient(inst, x)
            assert np.linalg.norm(ga - gf) / (1 + np.linalg.norm(ga)) < 1e-6


def test_cluster_coincident_atoms_raise():
    inst = LennardJonesCluster(3)
    x = np.array([0.0, 0.3, 0.4])  # first and second atom both at the origin
    with pytest.raises(EvaluationError):
        inst.energy(x)
    with pytest.raises(EvaluationError):
        inst.gradient(x)


def test_lj_trimer_equilateral_is_stationary():
    inst = LennardJonesCluster(3)
    r = 2 ** (1 / 6)
    x = np.array([r, r / 2, r * math.sqrt(3) / 2])
    assert inst.energy(x) == pytest.approx(-3.0, abs=1e-9)
    assert np.linalg.norm(inst.gradient(x)) < 1e-9
    sp = classify(inst, x)
    assert sp.index == 0
