"""Teleporting a two-photon polarization state onto one photon's path and polarization.

Joint-state factor order: ``(pol1, pol2, polA, polB, polC, pathC)``. Photons
1 and 2 carry the input; A, B, C are the ancilla photons. Bell measurements
pair photon 1 with A and photon 2 with B; photon C keeps the result.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, ZeroBranch
from .qmath import equal_up_to_phase, tensor
from .states import (
    ALL_BELL_INDICES,
    PATH_POL,
    Bell,
    BellIndex,
    StateVector,
    ancilla_g1_tilde,
    basis_labels,
    bell_projector,
    generalized_bell,
)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)

JOINT_BASIS = basis_labels(*(["HV"] * 5), ("s1", "s2"))
BRANCH_FLOOR = 1e-15


@dataclass(frozen=True)
class JointState:
    state: StateVector

    @property
    def amplitudes(self) -> np.ndarray:
        return self.state.amplitudes


def _input_amplitudes(psi) -> np.ndarray:
    if isinstance(psi, StateVector):
        if psi.dim != 4:
            raise DimensionMismatch("input state must be 4-dimensional")
        return psi.in_basis("two_photon").amplitudes
    amps = np.asarray(psi, dtype=complex)
    if amps.shape != (4,):
        raise DimensionMismatch("input state must be 4-dimensional")
    return amps


def joint_state(psi) -> JointState:
    amps = _input_amplitudes(psi)
    amps = amps / np.linalg.norm(amps)
    return JointState(StateVector(tensor(amps, ancilla_g1_tilde().amplitudes), JOINT_BASIS))


@dataclass(frozen=True)
class CorrectionOp:
    matrix: np.ndarray
    exponents: tuple[int, int, int, int]


def pauli_product(a1: int, a2: int, a3: int, a4: int) -> np.ndarray:
    """``X_pol^a1 X_path^a2 Z_pol^a3 Z_path^a4`` on path_pol order (pol is the major factor)."""
    mp = np.linalg.matrix_power
    return (tensor(mp(X, a1), I2) @ tensor(I2, mp(X, a2))
            @ tensor(mp(Z, a3), I2) @ tensor(I2, mp(Z, a4)))


def _residual(joint: np.ndarray, j: BellIndex) -> np.ndarray:
    g = generalized_bell(j).amplitudes
    return g.conj() @ joint.reshape(16, 4)


@functools.lru_cache(maxsize=None)
def _correction_exponents(j: BellIndex) -> tuple[int, int, int, int]:
    rng = np.random.default_rng(20240607)
    probes = [rng.standard_normal(4) + 1j * rng.standard_normal(4) for _ in range(4)]
    probes = [p / np.linalg.norm(p) for p in probes]
    found = []
    for exps in itertools.product((0, 1), repeat=4):
        c = pauli_product(*exps)
        ok = True
        for p in probes:
            r = _residual(joint_state(p).amplitudes, j)
            r = r / np.linalg.norm(r)
            if not equal_up_to_phase(c @ r, p, 1e-10):
                ok = False
                break
        if ok:
            found.append(exps)
    if len(found) != 1:
        raise RuntimeError("expected exactly one Pauli correction for %s, found %d" % (j, len(found)))
    return found[0]


def correction_for(j: BellIndex) -> CorrectionOp:
    """Pauli product undoing branch ``j`` (found by exhaustive search, then cached)."""
    j = BellIndex(Bell(j[0]), Bell(j[1]))
    exps = _correction_exponents(j)
    return CorrectionOp(pauli_product(*exps), exps)


@dataclass(frozen=True)
class BranchResult:
    branch: BellIndex
    probability: float
    residual: StateVector
    corrected: StateVector


def branch(joint: JointState, j: BellIndex) -> BranchResult:
    """Project the four polarizations of photons 1, 2, A, B onto generalized Bell state ``j``."""
    j = BellIndex(Bell(j[0]), Bell(j[1]))
    r = _residual(joint.amplitudes, j)
    p = float(np.vdot(r, r).real)
    if p < BRANCH_FLOOR:
        raise ZeroBranch("branch %s has probability %.3g" % (j, p))
    r = r / np.sqrt(p)
    corrected = correction_for(j).matrix @ r
    return BranchResult(j, p, StateVector(r, PATH_POL), StateVector(corrected, PATH_POL))


def teleport_postselected(psi) -> list[BranchResult]:
    """All sixteen branches, in the fixed generalized-Bell order."""
    joint = joint_state(psi)
    return [branch(joint, j) for j in ALL_BELL_INDICES]


# --- linear-optics Bell measurement -------------------------------------------------

class BsmOutcome(enum.Enum):
    PSI_MINUS = "PsiMinus"
    PSI_PLUS = "PsiPlus"
    FAIL = "Fail"


BSM_OUTCOMES = (BsmOutcome.PSI_MINUS, BsmOutcome.PSI_PLUS, BsmOutcome.FAIL)
_BSM_TO_BELL = {BsmOutcome.PSI_MINUS: Bell.PSI_MINUS, BsmOutcome.PSI_PLUS: Bell.PSI_PLUS}


@functools.lru_cache(maxsize=None)
def _bsm_table() -> tuple[np.ndarray, ...]:
    out = (bell_projector(Bell.PSI_MINUS), bell_projector(Bell.PSI_PLUS),
           bell_projector(Bell.PHI_PLUS) + bell_projector(Bell.PHI_MINUS))
    for m in out:
        m.setflags(write=False)
    return out


def bsm_projectors() -> dict[BsmOutcome, np.ndarray]:
    """Effects of the three-outcome Bell measurement (shared read-only arrays)."""
    return dict(zip(BSM_OUTCOMES, _bsm_table()))


def choose(probs, u: float) -> int:
    """Inverse-CDF draw of an index from (possibly unnormalized) weights with a uniform ``u``."""
    c = np.cumsum(probs)
    return int(min(np.searchsorted(c, u * c[-1], side="right"), len(c) - 1))


def bsm_linear_optics(pair_state, rng: np.random.Generator) -> BsmOutcome:
    """Sample the three-outcome instrument {Psi-, Psi+, Phi+ or Phi-} on a two-qubit pure state."""
    v = np.asarray(pair_state.amplitudes if isinstance(pair_state, StateVector) else pair_state, dtype=complex)
    if v.shape != (4,):
        raise DimensionMismatch("Bell measurement acts on two polarization qubits")
    probs = [float(np.vdot(v, p @ v).real) for p in _bsm_table()]
    return BSM_OUTCOMES[choose(probs, rng.random())]


def _apply_pair(op: np.ndarray, state: np.ndarray, q1: int, q2: int) -> np.ndarray:
    """Apply a two-qubit operator to factors ``q1, q2`` of the six-factor joint state."""
    t = state.reshape((2,) * 6)
    t = np.moveaxis(t, (q1, q2), (0, 1))
    t = np.tensordot(op.reshape(2, 2, 2, 2), t, axes=([2, 3], [0, 1]))
    t = np.moveaxis(t, (0, 1), (q1, q2))
    return t.reshape(64)


def _measure_pair(state: np.ndarray, q1: int, q2: int, u: float) -> tuple[BsmOutcome, np.ndarray]:
    proj = bsm_projectors()
    posts = [_apply_pair(proj[o], state, q1, q2) for o in BSM_OUTCOMES]
    probs = [float(np.vdot(p, p).real) for p in posts]
    k = choose(probs, u)
    return BSM_OUTCOMES[k], posts[k] / np.sqrt(probs[k])


def teleport_sampled(psi, rng: np.random.Generator) -> tuple[bool, StateVector | None]:
    """One heralded run: Bell measurements on (1, A) then (2, B); corrected photon-C state on success.

    Consumes exactly two uniforms from ``rng``.
    """
    joint = joint_state(psi).amplitudes
    u1, u2 = rng.random(), rng.random()
    o13, joint = _measure_pair(joint, 0, 2, u1)
    o24, joint = _measure_pair(joint, 1, 3, u2)
    if BsmOutcome.FAIL in (o13, o24):
        return False, None
    res = branch(JointState(StateVector(joint, JOINT_BASIS)), BellIndex(_BSM_TO_BELL[o13], _BSM_TO_BELL[o24]))
    return True, res.corrected


@dataclass(frozen=True)
class TeleportPlan:
    """Tabulated outcome statistics of :func:`teleport_sampled` for a fixed input.

    ``first[k]`` is the probability of outcome ``k`` on pair (1, A);
    ``second[k, l]`` the conditional probability of ``l`` on (2, B);
    ``outputs[(k, l)]`` the corrected state for successful pairs.
    """

    first: np.ndarray
    second: np.ndarray
    outputs: dict

    @classmethod
    def for_state(cls, psi) -> "TeleportPlan":
        joint = joint_state(psi).amplitudes
        proj = bsm_projectors()
        first = np.zeros(3)
        second = np.zeros((3, 3))
        outputs = {}
        for k, o13 in enumerate(BSM_OUTCOMES):
            post = _apply_pair(proj[o13], joint, 0, 2)
            first[k] = np.vdot(post, post).real
            for l, o24 in enumerate(BSM_OUTCOMES):
                post2 = _apply_pair(proj[o24], post, 1, 3)
                second[k, l] = np.vdot(post2, post2).real / first[k] if first[k] > 0 else 0.0
                if first[k] > 0 and BsmOutcome.FAIL not in (o13, o24):
                    j = BellIndex(_BSM_TO_BELL[o13], _BSM_TO_BELL[o24])
                    outputs[(k, l)] = branch(JointState(StateVector(post2, JOINT_BASIS)), j).corrected
        return cls(first, second, outputs)

    def success_probability(self) -> float:
        return float(sum(self.first[k] * self.second[k, l] for k in range(2) for l in range(2)))

    def sample(self, u1: np.ndarray, u2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized draw: returns (first outcome index, second outcome index) per shot."""
        c1 = np.cumsum(self.first)
        k = np.minimum(np.searchsorted(c1, np.asarray(u1) * c1[-1], side="right"), 2)
        c2 = np.cumsum(self.second, axis=1)
        l = np.empty_like(k)
        for kk in range(3):
            sel = k == kk
            if np.any(sel):
                row = c2[kk]
                l[sel] = np.minimum(np.searchsorted(row, np.asarray(u2)[sel] * row[-1], side="right"), 2)
        return k, l
