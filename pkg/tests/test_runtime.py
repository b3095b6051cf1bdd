import numpy as np
import pytest

from conftest import random_density, random_povm
from photonpovm.exceptions import InvalidConfig, InvalidDensity
from photonpovm.qmath import random_state
from photonpovm.runtime import (
    MODES, RNG_NAME, ExperimentConfig, born_probs, kraus_probs, run_shots, settings_digest,
    shot_uniforms, shot_width, teleport_trials, verify,
)
from photonpovm.states import PATH_POL, StateVector, bell_projector, bell_state
from photonpovm.synthesis import PovmSpec, bell_preset, reconstruct_effects, synth_povm
from photonpovm import documents as docs

UNIFORM = PovmSpec(tuple(np.eye(4) / 4 for _ in range(4)))


def sv(v):
    return StateVector(np.asarray(v, dtype=complex), PATH_POL)


def within_5_sigma(report):
    n = report.accepted
    for c, p in zip(report.counts, report.probabilities):
        sd = np.sqrt(n * p * (1 - p))
        assert abs(c - n * p) <= max(5 * sd, 1e-9), (c, n * p)


# --- Born rule -------------------------------------------------------------------

def test_born_probs_bell():
    _, spec = bell_preset()
    assert np.allclose(born_probs(spec, bell_projector("PhiPlus")), [1, 0, 0, 0], atol=1e-15)


def test_born_probs_uniform(rng):
    assert np.allclose(born_probs(UNIFORM, random_density(rng)), 0.25)


def test_born_probs_matches_kraus_paths(rng):
    for n in (2, 3, 5):
        spec = PovmSpec(tuple(random_povm(n, rng)))
        rho = random_density(rng)
        tree = synth_povm(spec)
        p = born_probs(spec, rho)
        assert abs(p.sum() - 1) <= 1e-10
        via_kraus = kraus_probs(tree, rho)
        assert np.allclose(p, [via_kraus[l] for l in spec.labels], atol=1e-9)


def test_born_probs_rejects_bad_density():
    for rho in (np.eye(4), np.diag([1.5, -0.5, 0, 0]), np.array([[0.5, 1], [0, 0.5]]),
                np.triu(np.ones((4, 4))) / 4):
        with pytest.raises(InvalidDensity):
            born_probs(UNIFORM, rho)


# --- configuration ---------------------------------------------------------------

def test_config_validation():
    tree, _ = bell_preset()
    psi = bell_state("PhiPlus")
    for kw in (dict(shots=0), dict(shots=1.5), dict(seed=-1), dict(seed=2 ** 64), dict(mode="bogus")):
        args = dict(shots=10, seed=1, mode="direct", tree=tree, state=psi)
        args.update(kw)
        with pytest.raises(InvalidConfig):
            ExperimentConfig(**args)
    with pytest.raises(InvalidConfig):
        ExperimentConfig(10, 1, tree=tree, spec=UNIFORM, state=psi)
    with pytest.raises(InvalidConfig):
        ExperimentConfig(10, 1, tree=tree)
    with pytest.raises(InvalidConfig):
        ExperimentConfig(10, 1, "postselected", tree=tree, density=np.eye(4) / 4)


# --- random streams --------------------------------------------------------------

def test_shot_rows_are_counter_addressed():
    table = shot_uniforms(99, 0, 50, 8)
    for i in (0, 1, 17, 49):
        assert np.array_equal(shot_uniforms(99, i, 1, 8)[0], table[i])
    assert np.array_equal(shot_uniforms(99, 10, 5, 8), table[10:15])
    # the documented construction, by hand
    bits = np.random.Philox(key=99, counter=17 * 2)
    assert np.array_equal(np.random.Generator(bits).random(8), table[17])


def test_shot_width():
    tree, _ = bell_preset()
    assert shot_width(tree) == 4
    assert shot_width(synth_povm(PovmSpec(tuple(random_povm(8, np.random.default_rng(0)))))) == 12


# --- sampling --------------------------------------------------------------------

def test_bell_input_is_deterministic():
    tree, _ = bell_preset()
    r = run_shots(ExperimentConfig(10 ** 4, 1, "direct", tree=tree, state=bell_state("PhiPlus")))
    assert r.counts == (10 ** 4, 0, 0, 0)
    assert r.max_abs_deviation <= 1e-12


def test_uniform_spec_counts():
    r = run_shots(ExperimentConfig(10 ** 5, 2, "direct", spec=UNIFORM, state=sv(random_state(4, np.random.default_rng(1)))))
    sd = np.sqrt(10 ** 5 * 0.25 * 0.75)
    assert all(abs(c - 25000) <= 5 * sd for c in r.counts)
    assert sum(r.counts) == r.accepted == 10 ** 5


@pytest.mark.parametrize("mode", MODES)
def test_same_seed_same_bytes(mode, rng):
    spec = PovmSpec(tuple(random_povm(3, rng)))
    psi = sv(random_state(4, rng))
    cfg = ExperimentConfig(20000, 12345, mode, spec=spec, state=psi)
    a, b = run_shots(cfg), run_shots(cfg)
    assert a.dumps() == b.dumps()
    assert run_shots(cfg, chunk=999).dumps() == a.dumps()
    other = run_shots(ExperimentConfig(20000, 12346, mode, spec=spec, state=psi))
    assert other.counts != a.counts


def test_report_contents(rng):
    spec = PovmSpec(tuple(random_povm(3, rng)), ("x", "y", "z"))
    tree = synth_povm(spec)
    r = run_shots(ExperimentConfig(1000, 7, "sampled-teleport", tree=tree, state=sv(random_state(4, rng))))
    d = r.to_doc()
    assert d["seed"] == 7 and d["rng"] == RNG_NAME and d["settings_digest"] == settings_digest(tree)
    assert [o["label"] for o in d["outcomes"]] == ["x", "y", "z"]
    assert r.teleport_success == r.accepted == sum(r.counts)
    assert abs(sum(r.probabilities) - 1) <= 1e-9
    assert r.count("y") == r.counts[1]
    assert np.isclose(r.frequencies().sum(), 1)


def test_zero_variance_outcomes_have_no_z_score():
    tree, _ = bell_preset()
    r = run_shots(ExperimentConfig(100, 1, "direct", tree=tree, state=bell_state("PsiPlus")))
    assert r.z_scores == (None, None, None, None)
    assert r.count("PsiPlus") == 100


def test_postselected_and_direct_agree(rng):
    # corrected branch states differ from the input only by a phase, and the
    # tree uses the same shot columns, so counts coincide exactly
    spec = PovmSpec(tuple(random_povm(4, rng)))
    psi = sv(random_state(4, rng))
    a = run_shots(ExperimentConfig(5000, 3, "postselected", spec=spec, state=psi))
    b = run_shots(ExperimentConfig(5000, 3, "direct", spec=spec, state=psi))
    assert a.counts == b.counts and a.accepted == 5000 and a.teleport_success is None


def test_sampled_teleport_acceptance(rng):
    psi = sv(random_state(4, rng))
    r = run_shots(ExperimentConfig(10 ** 5, 4, "sampled-teleport", spec=UNIFORM, state=psi))
    sd = np.sqrt(10 ** 5 * 0.25 * 0.75)
    assert abs(r.accepted - 25000) <= 5 * sd
    s = teleport_trials(psi, 10 ** 5, 4, width=shot_width(synth_povm(UNIFORM)))
    assert s.accepted == r.accepted
    assert s.min_fidelity >= 1 - 1e-10


def test_density_input_frequencies(rng):
    spec = PovmSpec(tuple(random_povm(5, rng)))
    r = run_shots(ExperimentConfig(10 ** 5, 8, "direct", spec=spec, density=random_density(rng)))
    within_5_sigma(r)


def test_frequencies_over_many_povms():
    # 20 random (POVM, state) pairs at 1e5 shots; count how many outcomes leave the
    # 5 sigma band and compare with what the binomial tail allows
    rng = np.random.default_rng(77)
    misses = checks = 0
    for _ in range(20):
        n = int(rng.integers(2, 7))
        spec = PovmSpec(tuple(random_povm(n, rng)))
        r = run_shots(ExperimentConfig(10 ** 5, int(rng.integers(2 ** 63)), "direct",
                                       spec=spec, state=sv(random_state(4, rng))))
        for c, p in zip(r.counts, r.probabilities):
            checks += 1
            misses += abs(c - r.accepted * p) > 5 * np.sqrt(r.accepted * p * (1 - p))
    # a single check leaves the band with probability ~6e-7, so even one miss
    # in ~80 checks is a 1-in-20000 event; two would mean a real bias
    assert checks > 40 and misses <= 1


# --- verification ----------------------------------------------------------------

def test_verify_bell():
    tree, spec = bell_preset()
    rep = verify(docs.tree_to_doc(tree), docs.povm_to_doc(spec))
    assert rep.passed and rep.max_deviation <= 1e-12


def test_verify_detects_perturbation():
    tree, spec = bell_preset()
    d = docs.tree_to_doc(tree)
    d["root"]["armA"]["theta"] += 1e-3
    rep = verify(d, docs.povm_to_doc(spec))
    assert not rep.passed and rep.max_deviation > 1e-8
    assert rep.to_doc()["passed"] is False


def test_verify_synth_round_trip(rng):
    spec = PovmSpec(tuple(random_povm(6, rng)))
    tree_doc = docs.tree_to_doc(synth_povm(spec))
    assert verify(tree_doc, docs.povm_to_doc(spec)).passed
    # documents without labels are matched by position
    assert verify(tree_doc, {"effects": docs.povm_to_doc(spec)["effects"]}).passed


def test_verify_accepts_objects():
    tree, spec = bell_preset()
    assert verify(tree, spec).passed
    assert verify(tree, reconstruct_effects(tree)).max_deviation == 0
