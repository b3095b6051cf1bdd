"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (add ``-s`` to see the
lines inline; they are also written to the terminal directly).
"""

import json

import numpy as np
import pytest

from conftest import random_density, random_povm
from photonpovm.cli import main
from photonpovm.optics import (
    ModuleSettings, build_module_from_elements, build_path_rotator, gadget_unitary, module_kraus,
    path_rotation,
)
from photonpovm.qmath import dagger, phase_distance, random_state, random_unitary
from photonpovm.runtime import ExperimentConfig, run_shots, shot_width, teleport_trials
from photonpovm.states import (
    ALL_BELL_INDICES, ANCILLA_BASIS, PATH_POL, TWO_PHOTON, Bell, BellIndex, StateVector,
    ancilla_g1_tilde, bell_state, generalized_bell,
)
from photonpovm.synthesis import (
    FAIL, PASS, PovmSpec, bell_preset, compile_unitary, effect_deviation, group_kraus,
    literal_vector_map_settings, reconstruct_effects, solve_vector_map, synth_bipartition, synth_povm,
)
from photonpovm.teleport import BsmOutcome, branch, bsm_linear_optics, joint_state

SEED = 20261014


@pytest.fixture
def gate(capsys):
    """``gate(name, ok, detail)`` prints the criterion line, then asserts."""
    def check(name, ok, detail):
        with capsys.disabled():
            print("\n[%s] %s: %s" % ("PASS" if ok else "FAIL", name, detail))
        assert ok, "%s: %s" % (name, detail)
    return check


def five_sigma(count, n, p):
    return abs(count - n * p) <= 5 * np.sqrt(n * p * (1 - p))


def test_ac1_bell_example(tmp_path, capsys, gate):
    assert main(["example", "bell", "--out-dir", str(tmp_path)]) == 0
    capsys.readouterr()
    code = main(["verify", "--settings", str(tmp_path / "bell_settings.json"),
                 "--povm", str(tmp_path / "bell_povm.json")])
    rep = json.loads(capsys.readouterr().out)
    # independent target: the projectors typed in from their definitions
    f1 = 0.5 * np.array([[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]])
    f2 = 0.5 * np.array([[0, 0, 0, 0], [0, 1, -1, 0], [0, -1, 1, 0], [0, 0, 0, 0]])
    rebuilt = reconstruct_effects(bell_preset()[0])
    dev = max(np.max(np.abs(rebuilt.effect("PhiPlus") - f1)), np.max(np.abs(rebuilt.effect("PsiMinus") - f2)),
              rep["max_deviation"])
    gate("AC1 Bell preset reproduces the four Bell projectors", code == 0 and dev <= 1e-12,
         "max entry deviation %.2e (tol 1e-12), verify exit %d" % (dev, code))


def test_ac2_branch_state(gate):
    rng = np.random.default_rng(SEED)
    g16 = BellIndex(Bell.PSI_MINUS, Bell.PSI_MINUS)
    worst_res = worst_p = 0.0
    for _ in range(1000):
        a, b, c, d = random_state(4, rng)
        joint = joint_state(StateVector(np.array([a, b, c, d]), TWO_PHOTON))
        r = branch(joint, g16)
        worst_res = max(worst_res, np.max(np.abs(r.residual.amplitudes - np.array([d, -c, -b, a]))))
        for j in ALL_BELL_INDICES:
            worst_p = max(worst_p, abs(branch(joint, j).probability - 1 / 16))
    gate("AC2 g16 residual (d,-c,-b,a) and branch probabilities 1/16",
         worst_res <= 1e-12 and worst_p <= 1e-12,
         "residual %.2e, probability %.2e over 1000 states (tol 1e-12)" % (worst_res, worst_p))


def test_ac3_success_probability(gate):
    n = 10 ** 5
    rng = np.random.default_rng(SEED)
    psi = StateVector(random_state(4, rng), PATH_POL)
    tree, _ = bell_preset()
    rep = run_shots(ExperimentConfig(n, SEED, "sampled-teleport", tree=tree, state=psi))
    trials = teleport_trials(psi, n, SEED, width=shot_width(tree))
    bells = [bell_state(b) for b in Bell]
    bsm_ok = sum(bsm_linear_optics(bells[rng.integers(4)], rng) is not BsmOutcome.FAIL for _ in range(n))
    ok = (five_sigma(rep.accepted, n, 0.25) and trials.accepted == rep.accepted
          and five_sigma(trials.first_success, n, 0.5) and five_sigma(trials.second_success, n, 0.5)
          and five_sigma(bsm_ok, n, 0.5))
    gate("AC3 joint success 1/4, pairwise Bell measurement 1/2", ok,
         "joint %.4f, pair(1,A) %.4f, pair(2,B) %.4f, Bell mixture %.4f over %d trials (5 sigma)"
         % (rep.accepted / n, trials.first_success / n, trials.second_success / n, bsm_ok / n, n))


def test_ac4_povm_round_trip(gate):
    rng = np.random.default_rng(SEED)
    worst_bi = 0.0
    for _ in range(100):
        f = random_povm(2, rng)[0]
        layers, a, b = synth_bipartition(f)
        u = layers.matrix()
        ka, kb = (group_kraus(g, a, b, u) for g in (PASS, FAIL))
        worst_bi = max(worst_bi, np.max(np.abs(dagger(ka) @ ka - f)),
                       np.max(np.abs(dagger(kb) @ kb - (np.eye(4) - f))))
    worst_tree = 0.0
    for n in (3, 4, 5, 8):
        for _ in range(5):
            spec = PovmSpec(tuple(random_povm(n, rng)))
            worst_tree = max(worst_tree, effect_deviation(reconstruct_effects(synth_povm(spec)), spec))
    inside = total = 0
    for _ in range(20):
        spec = PovmSpec(tuple(random_povm(int(rng.choice([3, 4, 5, 8])), rng)))
        rep = run_shots(ExperimentConfig(10 ** 5, int(rng.integers(2 ** 63)), "direct",
                                         spec=spec, density=random_density(rng)))
        for c, p in zip(rep.counts, rep.probabilities):
            total += 1
            inside += five_sigma(c, rep.accepted, p)
    ok = worst_bi <= 1e-8 and worst_tree <= 1e-8 and inside == total
    gate("AC4 bipartitions, n-outcome trees and shot frequencies", ok,
         "bipartition %.2e, tree %.2e (tol 1e-8); %d/%d outcome frequencies within 5 sigma"
         % (worst_bi, worst_tree, inside, total))


def test_ac5_unitary_compiler(gate):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    most = 0
    for _ in range(1000):
        w = random_unitary(4, rng)
        c = compile_unitary(w)
        most = max(most, len(c.layers))
        worst = max(worst, phase_distance(c.matrix(), w))
    gate("AC5a unitary compiler", most <= 2 and worst <= 1e-9,
         "1000 unitaries, at most %d layers, error %.2e up to phase (tol 1e-9)" % (most, worst))


def _vector_map_worst(solver, pairs=1000):
    rng = np.random.default_rng(SEED + 5)
    worst = 0.0
    for _ in range(pairs):
        a, b = random_state(4, rng), random_state(4, rng)
        g = solver(StateVector(a, PATH_POL), StateVector(b, PATH_POL))
        worst = max(worst, abs(abs(np.vdot(b, gadget_unitary(g) @ a)) - 1))
    return worst


def test_ac5_vector_map(gate):
    worst = _vector_map_worst(solve_vector_map)
    gate("AC5b vector-map solver, |<v_to|U|v_from>| = 1", worst <= 1e-9,
         "1000 pairs, worst |overlap - 1| = %.2e (tol 1e-9)" % worst)


@pytest.mark.xfail(strict=True, reason="the transcribed parameter rules do not map v_from to v_to")
def test_ac5_vector_map_verbatim_rules(gate):
    worst = _vector_map_worst(literal_vector_map_settings)
    gate("AC5c vector map with the parameter rules used verbatim", worst <= 1e-9,
         "1000 pairs, worst |overlap - 1| = %.2f (tol 1e-9); see decisions log" % worst)


def test_ac6_element_fidelity(gate):
    rng = np.random.default_rng(SEED)
    rot = max(np.max(np.abs(build_path_rotator(a) - path_rotation(a))) for a in rng.uniform(-np.pi, np.pi, 100))
    mod = comp = 0.0
    for _ in range(100):
        m = ModuleSettings(*rng.uniform(-np.pi, np.pi, 4))
        e1, e2 = build_module_from_elements(m)
        k1, k2 = module_kraus(m)
        mod = max(mod, phase_distance(e1, k1), phase_distance(e2, k2))
        comp = max(comp, np.max(np.abs(dagger(k1) @ k1 + dagger(k2) @ k2 - np.eye(2))))
    gate("AC6 element-level composition equals the closed forms",
         rot <= 1e-12 and mod <= 1e-10 and comp <= 1e-12,
         "path rotator %.2e (1e-12), module exits %.2e (1e-10), completeness %.2e (1e-12)" % (rot, mod, comp))


def test_ac7_basis_integrity(gate):
    g = np.array([generalized_bell(j).amplitudes for j in ALL_BELL_INDICES])
    gram = np.max(np.abs(g.conj() @ g.T - np.eye(16)))
    complete = np.max(np.abs(sum(np.outer(v, v.conj()) for v in g) - np.eye(16)))
    expected = np.zeros(16)
    for lab in ("HHHs1", "HVHs2", "VHVs1", "VVVs2"):
        expected[ANCILLA_BASIS.index(lab)] = 0.5
    exact = np.array_equal(ancilla_g1_tilde().amplitudes, expected)
    gate("AC7 generalized Bell basis and ancilla expansion",
         gram <= 1e-12 and complete <= 1e-12 and exact,
         "Gram %.2e, completeness %.2e (tol 1e-12), ancilla exact: %s" % (gram, complete, exact))
