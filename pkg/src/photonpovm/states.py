"""Basis conventions and the fixed states used by the protocol.

Three orderings of the 4-dimensional space are in use:

``two_photon``  HH, HV, VH, VV   (polarizations of photons 1 and 2)
``path_pol``    Hs1, Hs2, Vs1, Vs2   (canonical; polarization-major)
``path_major``  Hs1, Vs1, Hs2, Vs2   (block form of the path rotator)

``two_photon`` and ``path_pol`` correspond index by index (photon 1's
polarization becomes the polarization, photon 2's becomes the path).
``path_pol`` <-> ``path_major`` is the self-inverse permutation (0, 2, 1, 3).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import DimensionMismatch, ZeroVector
from .qmath import tensor

TWO_PHOTON = ("HH", "HV", "VH", "VV")
PATH_POL = ("Hs1", "Hs2", "Vs1", "Vs2")
PATH_MAJOR = ("Hs1", "Vs1", "Hs2", "Vs2")
BASES = {"two_photon": TWO_PHOTON, "path_pol": PATH_POL, "path_major": PATH_MAJOR}

PATH_SWAP = (0, 2, 1, 3)
# v_path_major = PATH_SWAP_MATRIX @ v_path_pol (and back; the matrix is its own inverse)
PATH_SWAP_MATRIX = np.eye(4)[list(PATH_SWAP)]

H = np.array([1, 0], dtype=complex)
V = np.array([0, 1], dtype=complex)
S1 = H
S2 = V


def to_path_major(m: np.ndarray) -> np.ndarray:
    """Re-express a canonical (path_pol) vector or operator in path_major order."""
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        return m[list(PATH_SWAP)]
    return PATH_SWAP_MATRIX @ m @ PATH_SWAP_MATRIX.T


# The permutation is an involution, so the inverse map is the same function.
from_path_major = to_path_major


def basis_labels(*factors: Sequence[str]) -> tuple[str, ...]:
    return tuple("".join(p) for p in itertools.product(*factors))


@dataclass(frozen=True)
class StateVector:
    """Amplitudes together with the labels of the basis they refer to."""

    amplitudes: np.ndarray
    basis: tuple[str, ...]

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        if len(amps) != len(self.basis):
            raise DimensionMismatch("%d amplitudes for %d basis labels" % (len(amps), len(self.basis)))
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "basis", tuple(self.basis))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> StateVector:
        n = self.norm()
        if n == 0.0:
            raise ZeroVector("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.basis)

    def amplitude(self, label: str) -> complex:
        return complex(self.amplitudes[self.basis.index(label)])

    def in_basis(self, name: str) -> StateVector:
        """Convert a 4-dimensional state between the three named orderings."""
        target = BASES[name]
        src = basis_name(self.basis)
        if src == name:
            return self
        amps = self.amplitudes
        if (src == "path_major") != (name == "path_major"):
            amps = to_path_major(amps)
        return StateVector(amps, target)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


def basis_name(labels: Sequence[str]) -> str:
    for name, lab in BASES.items():
        if tuple(labels) == lab:
            return name
    raise DimensionMismatch("not one of the named 4-dimensional bases: %r" % (tuple(labels),))


def canonical(v, basis: str = "path_pol") -> np.ndarray:
    """Amplitudes of ``v`` in the canonical path_pol order.

    Plain arrays are taken to be already expressed in ``basis``.
    """
    if isinstance(v, StateVector):
        return v.in_basis("path_pol").amplitudes.copy()
    v = np.asarray(v, dtype=complex)
    if v.shape != (4,):
        raise DimensionMismatch("expected a 4-vector")
    return to_path_major(v) if basis == "path_major" else v.copy()


class Bell(enum.Enum):
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"


BELL_ORDER = (Bell.PHI_PLUS, Bell.PHI_MINUS, Bell.PSI_PLUS, Bell.PSI_MINUS)

_BELL_AMPS = {
    Bell.PHI_PLUS: (1, 0, 0, 1),
    Bell.PHI_MINUS: (1, 0, 0, -1),
    Bell.PSI_PLUS: (0, 1, 1, 0),
    Bell.PSI_MINUS: (0, 1, -1, 0),
}


class BellIndex(NamedTuple):
    """Label of a generalized Bell state: Bell pair on photons (1,3) and on (2,4)."""

    pair13: Bell
    pair24: Bell

    def __str__(self):
        return "%s_%s" % (self.pair13.value, self.pair24.value)


ALL_BELL_INDICES = tuple(BellIndex(a, b) for a in BELL_ORDER for b in BELL_ORDER)


def two_photon_state(a, b, c, d) -> StateVector:
    """``a|HH> + b|HV> + c|VH> + d|VV>``, normalized."""
    return StateVector(np.array([a, b, c, d], dtype=complex), TWO_PHOTON).normalize()


def bell_state(k: Bell | str) -> StateVector:
    k = Bell(k)
    return StateVector(np.array(_BELL_AMPS[k], dtype=complex) / np.sqrt(2), TWO_PHOTON)


def bell_projector(k: Bell | str) -> np.ndarray:
    v = bell_state(k).amplitudes
    return np.outer(v, v.conj())


FOUR_PHOTON = basis_labels("HV", "HV", "HV", "HV")


def generalized_bell(j: BellIndex) -> StateVector:
    """Bell(pair13) on photons 1,3 times Bell(pair24) on photons 2,4, in photon order 1234."""
    j = BellIndex(Bell(j[0]), Bell(j[1]))
    t = tensor(bell_state(j.pair13).amplitudes, bell_state(j.pair24).amplitudes)
    # factor order after the tensor product is (1, 3, 2, 4)
    t = t.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(16)
    return StateVector(t, FOUR_PHOTON)


THREE_PHOTON = basis_labels("HV", "HV", "HV")


def gamma_state() -> StateVector:
    """(|H1 H3> + |V1 V3>)/sqrt2 (x) (|H2> + |V2>)/sqrt2 in photon order 1, 2, 3."""
    pair = tensor(H, H) + tensor(V, V)
    plus = H + V
    # one overall factor 1/2 keeps the amplitudes exact
    t = 0.5 * tensor(pair, plus).reshape(2, 2, 2).transpose(0, 2, 1).reshape(8)
    return StateVector(t, THREE_PHOTON)


ANCILLA_BASIS = basis_labels("HV", "HV", "HV", ("s1", "s2"))


def fredkin_matrix() -> np.ndarray:
    """Controlled path flip on (pol1, pol2, pol3, path3); polarization of photon 2 is the control."""
    i2 = np.eye(2)
    x = np.array([[0, 1], [1, 0]])
    ph = np.diag([1, 0])
    pv = np.diag([0, 1])
    return tensor(i2, ph, i2, i2) + tensor(i2, pv, i2, x)


def fredkin_apply(state) -> StateVector:
    amps = np.asarray(state.amplitudes if isinstance(state, StateVector) else state, dtype=complex)
    if amps.shape != (16,):
        raise DimensionMismatch("Fredkin gate acts on the 16-dim (pol1, pol2, pol3, path3) space")
    return StateVector(fredkin_matrix() @ amps, ANCILLA_BASIS)


def ancilla_g1_tilde() -> StateVector:
    """The three-photon ancilla: gamma with photon 3 placed on path s1, then Fredkin."""
    return fredkin_apply(tensor(gamma_state().amplitudes, S1))


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced operator on the subsystems listed in ``keep`` (in their original order)."""
    n = len(dims)
    keep = sorted(keep)
    t = np.asarray(rho).reshape(tuple(dims) * 2)
    traced = [k for k in range(n) if k not in keep]
    # trace out from the highest axis down so indices stay valid
    for count, k in enumerate(sorted(traced, reverse=True)):
        m = n - count
        t = np.trace(t, axis1=k, axis2=k + m)
    d = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d, d)
