"""Compile POVMs on the 4-dimensional path-polarization space into optical settings.

A compiled measurement is a :class:`SynthesisTree`. Each :class:`Node` is a
stage: one or two gadget layers followed by a POVM module on each path
(arm A on s1, arm B on s2). The four module exits ``A1, A2, B1, B2`` are
assigned to branches; a branch made of one A exit and one B exit forms a new
path-polarization photon and may feed a further stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np

from .exceptions import InvalidPovm, NotEffect, NotUnitary
from .optics import (
    EXITS,
    GadgetSettings,
    ModuleSettings,
    assemble_four_outcome,
    group_kraus,
    layers_unitary,
    u_template,
)
from .qmath import (
    csd_2x2,
    dagger,
    eigh,
    is_hermitian,
    is_unitary,
    phase_distance,
    pinv_psd,
    polar_unitary,
)
from .states import (
    PATH_MAJOR,
    PATH_SWAP_MATRIX,
    Bell,
    StateVector,
    bell_projector,
    canonical,
    to_path_major,
)

I2 = np.eye(2, dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
POVM_TOL = 1e-8
SUPPORT_TOL = 1e-10
ZERO_TRACE = 1e-12
MAX_OUTCOMES = 32
EIG_SNAP = 1e-14


# --- state parametrization -----------------------------------------------------

class ThetaParams(NamedTuple):
    t1: float
    t2: float
    t3: float
    t4: float
    t5: float
    t6: float


def s_theta(p: Sequence[float]) -> StateVector:
    """The six-angle unit vector, in path_major order (path s1 block first)."""
    t1, t2, t3, t4, t5, t6 = p
    amps = np.array([
        np.cos(t1) * np.cos(t2) * np.exp(1j * (t3 + t4)),
        np.cos(t1) * np.sin(t2) * np.exp(1j * (t3 - t4)),
        np.sin(t1) * np.cos(t5) * np.exp(1j * (-t3 + t6)),
        np.sin(t1) * np.sin(t5) * np.exp(1j * (-t3 - t6)),
    ])
    return StateVector(amps, PATH_MAJOR)


def theta_params(v, tol: float = 1e-14) -> ThetaParams:
    """Angles reproducing ``v`` up to a global phase.

    The global phase is chosen so the four component phases sum to zero
    (the template forces this); zero components take phase 0, and angles
    left free by vanishing amplitudes are 0.
    """
    x = to_path_major(canonical(v))
    r = np.abs(x)
    t1 = np.arctan2(np.hypot(r[2], r[3]), np.hypot(r[0], r[1]))
    t2 = np.arctan2(r[1], r[0])
    t5 = np.arctan2(r[3], r[2])
    ph = np.where(r > tol, np.angle(x), 0.0)
    ph = ph - ph.mean()
    t3 = (ph[0] + ph[1]) / 2
    t4 = (ph[0] - ph[1]) / 2
    t6 = (ph[2] - ph[3]) / 2
    return ThetaParams(*(float(t) for t in (t1, t2, t3, t4, t5, t6)))


def solve_vector_map(v_from, v_to) -> GadgetSettings:
    """One gadget layer with ``U v_from = v_to`` up to a global phase.

    The source block unitaries ``U(-t2, -t4, t4)``, ``U(-t5, -t6, t6)`` act
    first (V slots), the path rotator turns the block weights with
    ``alpha = t1 - t1'``,
    ``zeta = t3' - t3``, ``xi = t3' + t3``, and ``U(t2', t4', t4')``,
    ``U(t5', t6', t6')`` rebuild the target blocks (U slots).
    """
    t = theta_params(v_from)
    tp = theta_params(v_to)
    return GadgetSettings(
        alpha=t.t1 - tp.t1,
        zeta=tp.t3 - t.t3,
        xi=tp.t3 + t.t3,
        u1=u_template(tp.t2, tp.t4, tp.t4),
        u2=u_template(tp.t5, tp.t6, tp.t6),
        v1=u_template(-t.t2, -t.t4, t.t4),
        v2=u_template(-t.t5, -t.t6, t.t6),
    )


def literal_vector_map_settings(v_from, v_to) -> GadgetSettings:
    """Direct transcription of the published parameter rules, for comparison only.

    ``alpha = t1' - t1``, ``U1 = U(-t2, -t4, t4)``, ``U2 = U(-t5, -t6, t6)``,
    ``V1 = U(t2', t4', -t4')``, ``V2 = U(t5', t6', -t6')`` placed in the
    layer's own U and V slots. These rules do not map ``v_from`` to ``v_to``
    in general; :func:`solve_vector_map` is the working solver.
    """
    t = theta_params(v_from)
    tp = theta_params(v_to)
    return GadgetSettings(
        alpha=tp.t1 - t.t1,
        zeta=tp.t3 - t.t3,
        xi=tp.t3 + t.t3,
        u1=u_template(-t.t2, -t.t4, t.t4),
        u2=u_template(-t.t5, -t.t6, t.t6),
        v1=u_template(tp.t2, tp.t4, -tp.t4),
        v2=u_template(tp.t5, tp.t6, -tp.t6),
    )


# --- unitary compilation -----------------------------------------------------

@dataclass(frozen=True)
class CompiledUnitary:
    """Gadget layers whose product ``layers[0] @ layers[1] @ ...`` is the unitary (last acts first)."""

    layers: tuple[GadgetSettings, ...]

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not 1 <= len(self.layers) <= 2:
            raise ValueError("a compiled unitary has one or two layers")

    def matrix(self) -> np.ndarray:
        return layers_unitary(self.layers)


def compile_unitary(w: np.ndarray) -> CompiledUnitary:
    """Express a 4x4 unitary (path_pol order) as one or two gadget layers.

    Uses the cosine-sine split ``W = diag(L1, L2) [Rot(a1) (+) Rot(a2)] diag(R1, R2)^dag``
    over path blocks. Unequal angles are realized as
    ``G(m) Lam G(d) Lam`` with ``m = (a1 + a2)/2``, ``d = (a1 - a2)/2`` and
    ``Lam = 1 (+) sigma_z`` (a polarization flip on path s2).
    """
    w = np.asarray(w, dtype=complex)
    if w.shape != (4, 4) or not is_unitary(w):
        raise NotUnitary("compile_unitary needs a 4x4 unitary")
    c = csd_2x2(to_path_major(w))
    r1, r2 = dagger(c.r1), dagger(c.r2)
    if abs(c.a1 - c.a2) <= 1e-12:
        return CompiledUnitary((GadgetSettings(alpha=c.a1, u1=c.l1, u2=c.l2, v1=r1, v2=r2),))
    m = (c.a1 + c.a2) / 2
    d = (c.a1 - c.a2) / 2
    outer = GadgetSettings(alpha=m, u1=c.l1, u2=c.l2, v1=I2, v2=SIGMA_Z)
    inner = GadgetSettings(alpha=d, u1=I2, u2=I2, v1=r1, v2=SIGMA_Z @ r2)
    return CompiledUnitary((outer, inner))


# --- POVMs ------------------------------------------------------------------

@dataclass(frozen=True)
class PovmSpec:
    effects: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        effects = tuple(np.asarray(f, dtype=complex) for f in self.effects)
        labels = tuple(self.labels) or tuple("F%d" % (i + 1) for i in range(len(effects)))
        if len(labels) != len(effects):
            raise InvalidPovm("%d labels for %d effects" % (len(labels), len(effects)))
        if len(set(labels)) != len(labels):
            raise InvalidPovm("outcome labels must be unique")
        for f in effects:
            if f.shape != (4, 4):
                raise InvalidPovm("effects must be 4x4")
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.effects)

    def validate(self, tol: float = POVM_TOL) -> "PovmSpec":
        if not 1 <= len(self.effects) <= MAX_OUTCOMES:
            raise InvalidPovm("need between 1 and %d outcomes" % MAX_OUTCOMES)
        for lab, f in zip(self.labels, self.effects):
            if not is_hermitian(f, tol):
                raise InvalidPovm("effect %s is not Hermitian" % lab)
            lam = np.linalg.eigvalsh(0.5 * (f + dagger(f)))
            if lam[0] < -tol:
                raise InvalidPovm("effect %s is not positive (min eigenvalue %.3g)" % (lab, lam[0]))
        dev = np.max(np.abs(sum(self.effects) - np.eye(4)))
        if dev > tol:
            raise InvalidPovm("effects do not sum to identity (deviation %.3g)" % dev)
        return self

    def effect(self, label: str) -> np.ndarray:
        return self.effects[self.labels.index(label)]


@dataclass(frozen=True)
class Leaf:
    label: str
    correction: CompiledUnitary | None = None


@dataclass(frozen=True)
class Branch:
    exits: tuple[str, ...]
    child: Union["Node", Leaf]

    def __post_init__(self):
        object.__setattr__(self, "exits", tuple(self.exits))


@dataclass(frozen=True)
class Node:
    layers: CompiledUnitary
    arm_a: ModuleSettings
    arm_b: ModuleSettings
    branches: tuple[Branch, ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        used = [e for b in self.branches for e in b.exits]
        if sorted(used) != sorted(EXITS):
            raise ValueError("branches must partition the exits %s, got %s" % (EXITS, used))
        for b in self.branches:
            if isinstance(b.child, Node) and not _is_pair(b.exits):
                raise ValueError("a further stage needs one A exit and one B exit, got %s" % (b.exits,))
            if isinstance(b.child, Leaf) and b.child.correction is not None and not _is_pair(b.exits):
                raise ValueError("exit corrections need a paired (A, B) exit group")

    def unitary(self) -> np.ndarray:
        return self.layers.matrix()

    def branch_kraus(self, b: Branch) -> np.ndarray:
        return group_kraus(b.exits, self.arm_a, self.arm_b, self.unitary())


def _is_pair(exits: Sequence[str]) -> bool:
    return len(exits) == 2 and exits[0][0] == "A" and exits[1][0] == "B"


@dataclass(frozen=True)
class SynthesisTree:
    root: Union[Node, Leaf]
    labels: tuple[str, ...]
    zero_labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "zero_labels", tuple(self.zero_labels))

    def nodes(self) -> list[Node]:
        out, stack = [], [self.root]
        while stack:
            n = stack.pop()
            if isinstance(n, Node):
                out.append(n)
                stack.extend(b.child for b in n.branches)
        return out

    def depth(self) -> int:
        def d(n):
            return 0 if isinstance(n, Leaf) else 1 + max(d(b.child) for b in n.branches)
        return d(self.root)


def synth_bipartition(f: np.ndarray) -> tuple[CompiledUnitary, ModuleSettings, ModuleSettings]:
    """Stage settings realizing ``{F, I - F}`` on the (A1, B1) and (A2, B2) exit pairs.

    The eigenbasis of ``F`` (eigenvalues descending) is rotated onto
    (Hs1, Vs1, Hs2, Vs2); each module then transmits ``cos^2 = lambda`` to E1.
    """
    f = np.asarray(f, dtype=complex)
    res = eigh(f)
    lam = res.eigenvalues
    if lam[0] < -POVM_TOL or lam[-1] > 1 + POVM_TOL:
        raise NotEffect("eigenvalues of F must lie in [0, 1], got [%.3g, %.3g]" % (lam[0], lam[-1]))
    lam = np.clip(lam[::-1], 0.0, 1.0)
    # eigh noise near 0 and 1 is amplified by arccos(sqrt(.)); snap it
    lam = np.where(lam < EIG_SNAP, 0.0, np.where(lam > 1 - EIG_SNAP, 1.0, lam))
    w = res.eigenvectors[:, ::-1]
    # row k of dagger(w) sends eigenvector k to path_major basis vector k
    target = PATH_SWAP_MATRIX @ dagger(w)
    ang = np.arccos(np.sqrt(lam))
    arm_a = ModuleSettings(theta=ang[0], phi=ang[1])
    arm_b = ModuleSettings(theta=ang[2], phi=ang[3])
    return compile_unitary(target), arm_a, arm_b


PASS = ("A1", "B1")
FAIL = ("A2", "B2")


def _clean(f: np.ndarray) -> np.ndarray:
    return 0.5 * (f + dagger(f))


def _build(effects: list[np.ndarray], labels: list[str]) -> tuple[Union[Node, Leaf], list[str]]:
    """Peel off the first outcome, recurse on the conditional POVM of the rest."""
    zero = []
    keep_f, keep_l = [], []
    for f, lab in zip(effects, labels):
        if np.trace(f).real < ZERO_TRACE:
            zero.append(lab)
        else:
            keep_f.append(f)
            keep_l.append(lab)
    if not keep_f:
        raise InvalidPovm("no outcome with nonzero weight")
    if len(keep_f) == 1:
        return Leaf(keep_l[0]), zero
    first, rest = keep_f[0], keep_f[1:]
    layers, arm_a, arm_b = synth_bipartition(first)
    node_u = layers.matrix()
    k_fail = group_kraus(FAIL, arm_a, arm_b, node_u)
    # k_fail = Y S with S = sqrt(I - F); conditional effects are Y S+ F_i S+ Y^dag.
    # S+ S+ = (I - F)+, taken directly so the support cut is not blurred by a square root.
    y = k_fail @ pinv_psd(np.eye(4) - first, SUPPORT_TOL)
    cond = [_clean(y @ f @ dagger(y)) for f in rest]
    # directions outside the range of the failure map are never populated
    cond[-1] = cond[-1] + _clean(np.eye(4) - sum(cond))
    child, zero_child = _build(cond, keep_l[1:])
    node = Node(layers, arm_a, arm_b, (Branch(PASS, Leaf(keep_l[0])), Branch(FAIL, child)))
    return node, zero + zero_child


def synth_povm(spec: PovmSpec) -> SynthesisTree:
    """Sequential peel-off tree for a POVM given by its effects."""
    spec.validate()
    if len(spec) < 2:
        raise InvalidPovm("a measurement needs at least two outcomes")
    root, zero = _build([_clean(f) for f in spec.effects], list(spec.labels))
    return SynthesisTree(root, spec.labels, tuple(zero))


def synth_instrument(kraus: Sequence[np.ndarray], labels: Sequence[str] = ()) -> SynthesisTree:
    """Like :func:`synth_povm`, plus a compiled exit unitary per leaf so each leaf applies the given Kraus map."""
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    spec = PovmSpec(tuple(_clean(dagger(k) @ k) for k in kraus), tuple(labels))
    tree = synth_povm(spec)
    target = dict(zip(spec.labels, kraus))

    def attach(n, k_in):
        if isinstance(n, Leaf):
            k_path = k_in
            w = polar_unitary(target[n.label]) @ dagger(polar_unitary(k_path))
            return Leaf(n.label, compile_unitary(w))
        u = n.unitary()
        branches = []
        for b in n.branches:
            kb = group_kraus(b.exits, n.arm_a, n.arm_b, u) @ k_in
            branches.append(Branch(b.exits, attach(b.child, kb)))
        return Node(n.layers, n.arm_a, n.arm_b, tuple(branches))

    return SynthesisTree(attach(tree.root, np.eye(4, dtype=complex)), tree.labels, tree.zero_labels)


def leaf_kraus(tree: SynthesisTree) -> dict[str, list[np.ndarray]]:
    """Every root-to-leaf Kraus product, grouped by outcome label."""
    out: dict[str, list[np.ndarray]] = {lab: [] for lab in tree.labels}

    def walk(n, k_in):
        if isinstance(n, Leaf):
            k = k_in if n.correction is None else n.correction.matrix() @ k_in
            out.setdefault(n.label, []).append(k)
            return
        u = n.unitary()
        for b in n.branches:
            walk(b.child, group_kraus(b.exits, n.arm_a, n.arm_b, u) @ k_in)

    walk(tree.root, np.eye(4, dtype=complex))
    return out


def reconstruct_effects(tree: SynthesisTree) -> PovmSpec:
    """Effects ``sum K^dag K`` over the leaves of each outcome."""
    kr = leaf_kraus(tree)
    effects = []
    for lab in tree.labels:
        f = sum((dagger(k) @ k for k in kr.get(lab, [])), np.zeros((4, 4), dtype=complex))
        effects.append(_clean(f))
    return PovmSpec(tuple(effects), tree.labels)


def effect_deviation(a: PovmSpec, b: PovmSpec) -> float:
    """Largest entrywise difference between matching effects (matched by label)."""
    if set(a.labels) != set(b.labels):
        raise InvalidPovm("label sets differ: %s vs %s" % (a.labels, b.labels))
    return max(float(np.max(np.abs(a.effect(l) - b.effect(l)))) for l in a.labels)


# --- the four-Bell-state measurement ----------------------------------------------

BELL_A = np.array([[0, 1], [-1, 0]], dtype=complex)
BELL_LABELS = ("PhiPlus", "PsiMinus", "PhiMinus", "PsiPlus")


def bell_preset() -> tuple[SynthesisTree, PovmSpec]:
    """Single-stage settings measuring all four Bell states, with the target projectors.

    ``alpha = pi/4``, ``U1 = U2 = V1 = I``, ``V2 = [[0, 1], [-1, 0]]``,
    ``zeta = xi = 0``, both arms ``theta = 0, phi = pi/2``; exits A1, A2, B1, B2
    report Phi+, Psi-, Phi-, Psi+.
    """
    gadget = GadgetSettings(alpha=np.pi / 4, v2=BELL_A)
    arm = ModuleSettings(theta=0.0, phi=np.pi / 2)
    node = Node(CompiledUnitary((gadget,)), arm, arm,
                tuple(Branch((e,), Leaf(lab)) for e, lab in zip(EXITS, BELL_LABELS)))
    tree = SynthesisTree(node, BELL_LABELS)
    spec = PovmSpec(tuple(bell_projector(Bell(l)) for l in BELL_LABELS), BELL_LABELS)
    return tree, spec


def bell_assembled() -> list[np.ndarray]:
    """The preset's four effects via the closed-form four-outcome assembly."""
    tree, _ = bell_preset()
    node = tree.root
    return assemble_four_outcome(list(node.layers.layers), node.arm_a, node.arm_b)


def unitary_phase_error(a: np.ndarray, b: np.ndarray) -> float:
    return phase_distance(a, b)
