"""Running a synthesized measurement: Born probabilities, shot sampling, reports.

Random numbers
--------------
Every shot owns a fixed-width row of uniforms drawn from the counter-based
generator Philox4x64-10 (numpy's ``Philox`` bit generator, ``Generator.random``
doubles). The key is the 64-bit run seed; shot ``i`` starts at counter
``i * width / 4``, where ``width`` is ``2 + tree depth`` rounded up to a multiple
of four. Column 0 and 1 drive the two Bell measurements of the teleport stage,
column ``2 + k`` the stage at depth ``k``. A shot's outcome therefore depends on
``(seed, i)`` alone, so any split of the shots into chunks gives the same counts.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import documents
from .exceptions import DocumentError, InvalidConfig, InvalidDensity
from .optics import group_kraus
from .qmath import dagger
from .states import StateVector, canonical
from .synthesis import (
    Leaf,
    Node,
    PovmSpec,
    SynthesisTree,
    leaf_kraus,
    reconstruct_effects,
    synth_povm,
)
from .teleport import TeleportPlan, teleport_postselected

MODES = ("postselected", "sampled-teleport", "direct")
RNG_NAME = "Philox4x64-10 (numpy.random.Philox, key=seed, counter=shot*width/4)"
DENSITY_TOL = 1e-9
VERIFY_TOL = 1e-8
DETERMINISTIC = 1e-12
CHUNK = 1 << 16


def density_of(state) -> np.ndarray:
    v = canonical(state)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def check_density(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidDensity("density matrix must be 4x4, got %s" % (rho.shape,))
    if np.max(np.abs(rho - dagger(rho))) > DENSITY_TOL:
        raise InvalidDensity("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1) > DENSITY_TOL:
        raise InvalidDensity("density matrix has trace %.12g" % tr)
    lam = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))
    if lam[0] < -DENSITY_TOL:
        raise InvalidDensity("density matrix has eigenvalue %.3g" % lam[0])
    return 0.5 * (rho + dagger(rho))


def born_probs(spec: PovmSpec, rho) -> np.ndarray:
    """Outcome probabilities ``Tr(F_i rho)`` in the order of ``spec.labels``."""
    rho = check_density(rho)
    return np.array([np.trace(f @ rho).real for f in spec.effects])


# --- configuration and report ------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """What to run. Give ``tree`` or ``spec`` (synthesized on demand), and ``state`` or ``density``."""

    shots: int
    seed: int
    mode: str = "direct"
    tree: SynthesisTree | None = None
    spec: PovmSpec | None = None
    state: StateVector | None = None
    density: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if isinstance(self.shots, bool) or int(self.shots) != self.shots or self.shots < 1:
            raise InvalidConfig("shots must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise InvalidConfig("seed must be an integer in [0, 2**64)")
        object.__setattr__(self, "shots", int(self.shots))
        object.__setattr__(self, "seed", int(self.seed))
        if self.mode not in MODES:
            raise InvalidConfig("mode must be one of %s, got %r" % (MODES, self.mode))
        if (self.tree is None) == (self.spec is None):
            raise InvalidConfig("give exactly one of a synthesis tree or a POVM spec")
        if (self.state is None) == (self.density is None):
            raise InvalidConfig("give exactly one of a pure state or a density matrix")
        if self.density is not None and self.mode != "direct":
            raise InvalidConfig("density-matrix inputs are only supported in direct mode")
        if self.state is not None and not isinstance(self.state, StateVector):
            raise InvalidConfig("state must be a StateVector")

    def synthesis_tree(self) -> SynthesisTree:
        return self.tree if self.tree is not None else synth_povm(self.spec)

    def input_density(self) -> np.ndarray:
        return check_density(self.density) if self.density is not None else density_of(self.state)


@dataclass(frozen=True)
class ExperimentReport:
    mode: str
    shots: int
    accepted: int
    seed: int
    rng: str
    settings_digest: str
    labels: tuple[str, ...]
    counts: tuple[int, ...]
    probabilities: tuple[float, ...]
    max_abs_deviation: float | None
    z_scores: tuple[float | None, ...]
    teleport_success: int | None = None

    def count(self, label: str) -> int:
        return self.counts[self.labels.index(label)]

    def frequencies(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / max(self.accepted, 1)

    def to_doc(self) -> dict:
        return {
            "mode": self.mode,
            "shots": self.shots,
            "accepted": self.accepted,
            "teleport_success": self.teleport_success,
            "seed": self.seed,
            "rng": self.rng,
            "settings_digest": self.settings_digest,
            "max_abs_deviation": self.max_abs_deviation,
            "outcomes": [
                {"label": l, "count": c, "probability": p, "z_score": z}
                for l, c, p, z in zip(self.labels, self.counts, self.probabilities, self.z_scores)
            ],
        }

    def dumps(self) -> str:
        return documents.dumps(self.to_doc())


def settings_digest(tree: SynthesisTree) -> str:
    return hashlib.sha256(documents.dumps(documents.tree_to_doc(tree)).encode()).hexdigest()


# --- random streams ----------------------------------------------------------

def shot_width(tree: SynthesisTree) -> int:
    return 4 * math.ceil((2 + tree.depth()) / 4)


def shot_uniforms(seed: int, start: int, count: int, width: int) -> np.ndarray:
    """Rows ``start .. start+count-1`` of the per-shot uniform table."""
    if width % 4:
        raise ValueError("width must be a multiple of 4")
    bits = np.random.Philox(key=seed, counter=start * (width // 4))
    return np.random.Generator(bits).random((count, width))


def _pick(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    c = np.cumsum(weights)
    return np.minimum(np.searchsorted(c, u * c[-1], side="right"), len(c) - 1)


# --- sampling ----------------------------------------------------------------

# A group is a set of shots sharing one normalized state (vector if pure, matrix if
# mixed), so splitting a group never needs per-shot linear algebra.

def _branch_weight(k: np.ndarray, s: np.ndarray) -> tuple[float, np.ndarray]:
    if s.ndim == 1:
        post = k @ s
        return float(np.vdot(post, post).real), post
    post = k @ s @ dagger(k)
    return float(np.trace(post).real), post


def _walk(node: Union[Node, Leaf], state: np.ndarray, idx: np.ndarray, u: np.ndarray,
          level: int, counts: dict[str, int]) -> None:
    if idx.size == 0:
        return
    if isinstance(node, Leaf):
        counts[node.label] += int(idx.size)
        return
    uni = node.unitary()
    weights, posts = [], []
    for b in node.branches:
        w, post = _branch_weight(group_kraus(b.exits, node.arm_a, node.arm_b, uni), state)
        weights.append(w)
        posts.append(post)
    weights = np.array(weights)
    choice = _pick(weights, u[idx, 2 + level])
    for j, b in enumerate(node.branches):
        sel = idx[choice == j]
        if sel.size:
            _walk(b.child, posts[j] / (np.sqrt(weights[j]) if state.ndim == 1 else weights[j]),
                  sel, u, level + 1, counts)


def _input_groups(cfg: ExperimentConfig, u: np.ndarray, plan) -> tuple[list, int | None]:
    """Split a chunk into groups of shots that enter the tree with a common state."""
    n = u.shape[0]
    if cfg.mode == "direct":
        s = canonical(cfg.state) if cfg.state is not None else cfg.input_density()
        if s.ndim == 1:
            s = s / np.linalg.norm(s)
        return [(s, np.arange(n))], None
    if cfg.mode == "postselected":
        branches = plan
        pick = _pick(np.array([b.probability for b in branches]), u[:, 0])
        return [(canonical(b.corrected), np.flatnonzero(pick == j)) for j, b in enumerate(branches)], None
    k, l = plan.sample(u[:, 0], u[:, 1])
    groups = [(canonical(out), np.flatnonzero((k == kk) & (l == ll))) for (kk, ll), out in plan.outputs.items()]
    return groups, int(np.sum((k < 2) & (l < 2)))


def run_shots(cfg: ExperimentConfig, chunk: int = CHUNK) -> ExperimentReport:
    """Sample ``cfg.shots`` runs of the measurement tree and compare with the Born rule."""
    tree = cfg.synthesis_tree()
    labels = tree.labels
    counts = {l: 0 for l in labels}
    width = shot_width(tree)
    plan = None
    if cfg.mode == "postselected":
        plan = teleport_postselected(cfg.state)
    elif cfg.mode == "sampled-teleport":
        plan = TeleportPlan.for_state(cfg.state)
    success = 0
    for start in range(0, cfg.shots, chunk):
        u = shot_uniforms(cfg.seed, start, min(chunk, cfg.shots - start), width)
        groups, ok = _input_groups(cfg, u, plan)
        success += ok or 0
        for state, idx in groups:
            _walk(tree.root, state, idx, u, 0, counts)
    accepted = sum(counts.values())
    probs = born_probs(reconstruct_effects(tree), cfg.input_density())
    probs = np.clip(probs, 0.0, 1.0)
    c = np.array([counts[l] for l in labels])
    if accepted:
        dev = float(np.max(np.abs(c / accepted - probs)))
        # outcomes that are certain or impossible have no spread to normalize by
        live = (probs > DETERMINISTIC) & (probs < 1 - DETERMINISTIC)
        z = tuple(float((ci - accepted * p) / np.sqrt(accepted * p * (1 - p))) if ok else None
                  for ci, p, ok in zip(c, probs, live))
    else:
        dev, z = None, tuple(None for _ in labels)
    return ExperimentReport(
        mode=cfg.mode, shots=cfg.shots, accepted=accepted, seed=cfg.seed, rng=RNG_NAME,
        settings_digest=settings_digest(tree), labels=labels,
        counts=tuple(int(x) for x in c), probabilities=tuple(float(p) for p in probs),
        max_abs_deviation=dev, z_scores=z,
        teleport_success=success if cfg.mode == "sampled-teleport" else None)


# --- verification ------------------------------------------------------------

@dataclass(frozen=True)
class VerifyReport:
    max_deviation: float
    deviations: dict
    tolerance: float = VERIFY_TOL

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def to_doc(self) -> dict:
        return {"passed": self.passed, "max_deviation": self.max_deviation,
                "tolerance": self.tolerance, "deviations": dict(self.deviations)}


def verify(settings_doc: Union[dict, SynthesisTree], povm_doc: Union[dict, PovmSpec],
           tol: float = VERIFY_TOL) -> VerifyReport:
    """Rebuild the effects from settings and compare them entrywise with a POVM.

    Outcomes are matched by label; a POVM document without labels is matched by position.
    """
    tree = settings_doc if isinstance(settings_doc, SynthesisTree) else documents.tree_from_doc(settings_doc)
    by_position = isinstance(povm_doc, dict) and not povm_doc.get("labels")
    spec = povm_doc if isinstance(povm_doc, PovmSpec) else documents.povm_from_doc(povm_doc)[0]
    rebuilt = reconstruct_effects(tree)
    if by_position:
        if len(spec) != len(rebuilt):
            raise DocumentError("settings give %d outcomes, POVM has %d" % (len(rebuilt), len(spec)))
        pairs = list(zip(rebuilt.labels, rebuilt.effects, spec.effects))
    else:
        if set(spec.labels) != set(rebuilt.labels):
            raise DocumentError("outcome labels differ: %s vs %s" % (rebuilt.labels, spec.labels))
        pairs = [(l, rebuilt.effect(l), spec.effect(l)) for l in rebuilt.labels]
    devs = {l: float(np.max(np.abs(a - b))) for l, a, b in pairs}
    return VerifyReport(max(devs.values()), devs, tol)


def kraus_probs(tree: SynthesisTree, rho) -> dict[str, float]:
    """Outcome probabilities summed over leaf Kraus paths (independent of the effect rebuild)."""
    rho = check_density(rho)
    return {l: float(sum(np.trace(k @ rho @ dagger(k)).real for k in ks))
            for l, ks in leaf_kraus(tree).items()}


# --- teleportation trials ----------------------------------------------------

@dataclass(frozen=True)
class TeleportSummary:
    trials: int
    accepted: int
    first_success: int
    second_success: int
    min_fidelity: float | None
    seed: int
    rng: str = RNG_NAME

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.trials

    def to_doc(self) -> dict:
        return {"trials": self.trials, "accepted": self.accepted,
                "acceptance_rate": self.acceptance_rate,
                "first_bsm_success": self.first_success, "second_bsm_success": self.second_success,
                "min_fidelity": self.min_fidelity, "seed": self.seed, "rng": self.rng}


def teleport_trials(state, trials: int, seed: int, width: int = 4) -> TeleportSummary:
    """Heralded teleportation runs using columns 0 and 1 of the shot table.

    With the same ``width``, trial ``i`` sees the uniforms of shot ``i`` in a
    sampled-teleport run, so both herald exactly the same trials.
    """
    if trials < 1:
        raise InvalidConfig("trials must be positive")
    plan = TeleportPlan.for_state(state)
    target = canonical(state)
    target = target / np.linalg.norm(target)
    fid = [float(abs(np.vdot(target, canonical(out))) ** 2) for out in plan.outputs.values()]
    acc = first = second = 0
    for start in range(0, trials, CHUNK):
        u = shot_uniforms(seed, start, min(CHUNK, trials - start), width)
        k, l = plan.sample(u[:, 0], u[:, 1])
        first += int(np.sum(k < 2))
        second += int(np.sum(l < 2))
        acc += int(np.sum((k < 2) & (l < 2)))
    return TeleportSummary(trials, acc, first, second, min(fid) if acc and fid else None, seed)
