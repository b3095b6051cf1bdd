"""Linear-optical elements and the two closed-form constructions built from them.

The path rotator / SU(4) gadget acts on one photon's path and polarization.
The single-photon POVM module splits a polarization qubit over two exits.

Element conventions:

* ``PBS(a, b)`` transmits H (keeps its rail) and reflects V (swaps the V
  amplitudes of rails ``a`` and ``b``), with reflection phase +1.
* ``PolRotator(angle)`` is ``[[cos, sin], [-sin, cos]]`` on (H, V).
* ``PhaseShifter(phase)`` multiplies both polarizations on a rail by
  ``exp(i phase)``.
* ``Mirror(a, b)`` reroutes: it exchanges the contents of rails ``a`` and
  ``b``; it carries no phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .exceptions import UnsupportedSettings
from .qmath import block_diag, dagger, is_unitary
from .states import PATH_SWAP_MATRIX, from_path_major

I2 = np.eye(2, dtype=complex)


def _unitary2(m, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2) or not is_unitary(m):
        raise ValueError("%s must be a 2x2 unitary" % name)
    m = m.copy()
    m.setflags(write=False)
    return m


def rotator(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, s], [-s, c]], dtype=complex)


def u_template(ti: float, tj: float, tk: float) -> np.ndarray:
    """General 2x2 unitary ``[[e^{i tj} cos ti, -e^{i tk} sin ti], [e^{-i tk} sin ti, e^{-i tj} cos ti]]``."""
    return np.array([
        [np.exp(1j * tj) * np.cos(ti), -np.exp(1j * tk) * np.sin(ti)],
        [np.exp(-1j * tk) * np.sin(ti), np.exp(-1j * tj) * np.cos(ti)],
    ])


# --- element-level circuits -------------------------------------------------

@dataclass(frozen=True)
class PBS:
    a: str
    b: str


@dataclass(frozen=True)
class PolRotator:
    rail: str
    angle: float


@dataclass(frozen=True)
class PhaseShifter:
    rail: str
    phase: float


@dataclass(frozen=True)
class Mirror:
    a: str
    b: str


@dataclass(frozen=True)
class PolUnitary:
    """An arbitrary polarization unitary on one rail (a wave-plate stack)."""

    rail: str
    matrix: np.ndarray = field(compare=False)


Element = Union[PBS, PolRotator, PhaseShifter, Mirror, PolUnitary]


@dataclass
class ElementCircuit:
    """Ordered optical elements on a set of named rails.

    Modes are ordered rail-major: ``(rail_0, H), (rail_0, V), (rail_1, H), ...``.
    With rails ``("s1", "s2")`` this coincides with the path_major basis.
    """

    rails: tuple[str, ...]
    elements: list[Element] = field(default_factory=list)

    def add(self, *elements: Element) -> "ElementCircuit":
        self.elements.extend(elements)
        return self

    @property
    def n_modes(self) -> int:
        return 2 * len(self.rails)

    def mode(self, rail: str, pol: int) -> int:
        return 2 * self.rails.index(rail) + pol

    def element_matrix(self, el: Element) -> np.ndarray:
        n = self.n_modes
        m = np.eye(n, dtype=complex)
        if isinstance(el, PBS):
            va, vb = self.mode(el.a, 1), self.mode(el.b, 1)
            m[[va, vb]] = m[[vb, va]]
        elif isinstance(el, Mirror):
            for pol in (0, 1):
                x, y = self.mode(el.a, pol), self.mode(el.b, pol)
                m[[x, y]] = m[[y, x]]
        elif isinstance(el, (PolRotator, PolUnitary)):
            blk = rotator(el.angle) if isinstance(el, PolRotator) else np.asarray(el.matrix, dtype=complex)
            k = self.mode(el.rail, 0)
            m[k:k + 2, k:k + 2] = blk
        elif isinstance(el, PhaseShifter):
            k = self.mode(el.rail, 0)
            m[k, k] = m[k + 1, k + 1] = np.exp(1j * el.phase)
        else:
            raise TypeError("unknown element %r" % (el,))
        return m

    def matrix(self) -> np.ndarray:
        out = np.eye(self.n_modes, dtype=complex)
        for el in self.elements:
            out = self.element_matrix(el) @ out
        return out

    def transfer(self, inputs: Sequence[str], outputs: Sequence[str]) -> np.ndarray:
        """Block of the circuit matrix from the ``inputs`` rails to the ``outputs`` rails."""
        rows = [self.mode(r, p) for r in outputs for p in (0, 1)]
        cols = [self.mode(r, p) for r in inputs for p in (0, 1)]
        return self.matrix()[np.ix_(rows, cols)]


def pbs_unitary() -> np.ndarray:
    """The PBS on (pol x two paths), canonical path_pol order: H keeps its path, V swaps."""
    return from_path_major(ElementCircuit(("s1", "s2"), [PBS("s1", "s2")]).matrix())


# --- path rotator and the SU(4) gadget ---------------------------------------

def path_rotator_circuit(alpha: float) -> ElementCircuit:
    return ElementCircuit(("s1", "s2"), [
        PolRotator("s2", -np.pi / 2),
        PBS("s1", "s2"),
        PolRotator("s1", alpha),
        PolRotator("s2", alpha),
        PBS("s1", "s2"),
        PolRotator("s2", np.pi / 2),
    ])


def build_path_rotator(alpha: float) -> np.ndarray:
    """Path rotation by ``alpha`` composed from elements; path_major order."""
    return path_rotator_circuit(alpha).matrix()


def path_rotation(alpha: float) -> np.ndarray:
    """Closed form ``[[1 cos a, 1 sin a], [-1 sin a, 1 cos a]]`` in path_major order."""
    c, s = np.cos(alpha), np.sin(alpha)
    return np.block([[c * I2, s * I2], [-s * I2, c * I2]])


def u_path(alpha: float, zeta: float, xi: float) -> np.ndarray:
    """``[[e^{iz} cos a, e^{ix} sin a], [-e^{-ix} sin a, e^{-iz} cos a]]`` (x 1_pol), path_major."""
    c, s = np.cos(alpha), np.sin(alpha)
    return np.block([
        [np.exp(1j * zeta) * c * I2, np.exp(1j * xi) * s * I2],
        [-np.exp(-1j * xi) * s * I2, np.exp(-1j * zeta) * c * I2],
    ])


def u_path_circuit(alpha: float, zeta: float, xi: float) -> ElementCircuit:
    into = (zeta - xi) / 2
    out = (zeta + xi) / 2
    c = ElementCircuit(("s1", "s2"), [PhaseShifter("s1", into), PhaseShifter("s2", -into)])
    c.add(*path_rotator_circuit(alpha).elements)
    c.add(PhaseShifter("s1", out), PhaseShifter("s2", -out))
    return c


@dataclass(frozen=True)
class GadgetSettings:
    """One gadget layer ``diag(U1, U2) U_path(alpha, zeta, xi) diag(V1, V2)``.

    ``V1``, ``V2`` act on paths s1, s2 before the rotator, ``U1``, ``U2`` after.
    """

    alpha: float = 0.0
    zeta: float = 0.0
    xi: float = 0.0
    u1: np.ndarray = field(default=I2, compare=False)
    u2: np.ndarray = field(default=I2, compare=False)
    v1: np.ndarray = field(default=I2, compare=False)
    v2: np.ndarray = field(default=I2, compare=False)

    def __post_init__(self):
        for name in ("u1", "u2", "v1", "v2"):
            object.__setattr__(self, name, _unitary2(getattr(self, name), name))
        for name in ("alpha", "zeta", "xi"):
            object.__setattr__(self, name, float(getattr(self, name)))


def gadget_unitary_path_major(g: GadgetSettings) -> np.ndarray:
    return block_diag(g.u1, g.u2) @ u_path(g.alpha, g.zeta, g.xi) @ block_diag(g.v1, g.v2)


def gadget_unitary(g: GadgetSettings) -> np.ndarray:
    """The layer's 4x4 unitary in canonical path_pol order."""
    return from_path_major(gadget_unitary_path_major(g))


def gadget_circuit(g: GadgetSettings) -> ElementCircuit:
    c = ElementCircuit(("s1", "s2"), [PolUnitary("s1", g.v1), PolUnitary("s2", g.v2)])
    c.add(*u_path_circuit(g.alpha, g.zeta, g.xi).elements)
    c.add(PolUnitary("s1", g.u1), PolUnitary("s2", g.u2))
    return c


def layers_unitary(layers: Sequence[GadgetSettings]) -> np.ndarray:
    """Product ``layers[0] @ layers[1] @ ...`` (the last layer acts first), path_pol order."""
    out = np.eye(4, dtype=complex)
    for g in layers:
        out = out @ gadget_unitary(g)
    return out


# --- single-photon POVM module ----------------------------------------------

@dataclass(frozen=True)
class ModuleSettings:
    theta: float = 0.0
    phi: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    us: np.ndarray = field(default=I2, compare=False)
    v1s: np.ndarray = field(default=I2, compare=False)
    v2s: np.ndarray = field(default=I2, compare=False)

    def __post_init__(self):
        for name in ("us", "v1s", "v2s"):
            object.__setattr__(self, name, _unitary2(getattr(self, name), name))
        for name in ("theta", "phi", "beta", "gamma"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def has_outer_unitaries(self) -> bool:
        return any(np.max(np.abs(m - I2)) > 1e-12 for m in (self.us, self.v1s, self.v2s))


def d1(theta: float, phi: float, beta: float = 0.0) -> np.ndarray:
    return np.diag([np.exp(1j * beta) * np.cos(theta), np.cos(phi)])


def d2(theta: float, phi: float, gamma: float = 0.0) -> np.ndarray:
    return np.diag([np.exp(1j * gamma) * np.sin(theta), np.sin(phi)]).astype(complex)


def module_kraus(m: ModuleSettings) -> tuple[np.ndarray, np.ndarray]:
    """Kraus pair of the module: exit E1 gets ``V1s D1 Us``, exit E2 gets ``V2s D2 Us``."""
    k1 = m.v1s @ d1(m.theta, m.phi, m.beta) @ m.us
    k2 = m.v2s @ d2(m.theta, m.phi, m.gamma) @ m.us
    return k1, k2


MODULE_RAILS = ("s1", "s2", "t1", "t2", "t3", "t4", "p1", "p2")
MODULE_EXITS = {"E1": "p1", "E2": "t3"}


def module_circuit(m: ModuleSettings) -> ElementCircuit:
    """Rail layout of the module core. The photon enters on s1 and leaves on p1 (E1) or t3 (E2)."""
    return ElementCircuit(MODULE_RAILS, [
        PBS("s1", "s2"),                      # H stays on s1, V reflected to s2
        Mirror("s1", "t1"), Mirror("s2", "t2"),
        PolRotator("t1", m.theta), PolRotator("t2", m.phi),
        PBS("t1", "t3"),                      # t1: cos(theta) H, t3: -sin(theta) V
        PBS("t2", "t4"),                      # t2: sin(phi) H,   t4: cos(phi) V
        Mirror("t1", "p1"), Mirror("t4", "p2"),
        PhaseShifter("p1", m.beta),
        PBS("p1", "p2"),                      # E1 recombination
        PolRotator("t3", np.pi / 2), PolRotator("t3", np.pi),
        PhaseShifter("t3", m.gamma),
        PolRotator("t2", -np.pi / 2),
        PBS("t3", "t2"),                      # E2 recombination
    ])


def build_module_from_elements(m: ModuleSettings) -> tuple[np.ndarray, np.ndarray]:
    """Exit maps (E1, E2) of the element-level module; outer unitaries must be identity."""
    if m.has_outer_unitaries():
        raise UnsupportedSettings("element layout covers the module core only (Us = V1s = V2s = I)")
    circ = module_circuit(m)
    return circ.transfer(["s1"], [MODULE_EXITS["E1"]]), circ.transfer(["s1"], [MODULE_EXITS["E2"]])


# --- two modules behind a gadget ---------------------------------------------

EXITS = ("A1", "A2", "B1", "B2")


def exit_kraus(arm_a: ModuleSettings, arm_b: ModuleSettings) -> dict[str, np.ndarray]:
    """Per-exit 2x4 maps from the canonical 4-dim input of the arms to each exit's polarization.

    Arm A sits on path s1, arm B on path s2; exit ``A1`` is arm A's E1 and so on.
    """
    ka1, ka2 = module_kraus(arm_a)
    kb1, kb2 = module_kraus(arm_b)
    z = np.zeros((2, 2), dtype=complex)
    path_major = {
        "A1": np.hstack([ka1, z]), "A2": np.hstack([ka2, z]),
        "B1": np.hstack([z, kb1]), "B2": np.hstack([z, kb2]),
    }
    return {k: v @ PATH_SWAP_MATRIX for k, v in path_major.items()}


def group_kraus(exits: Sequence[str], arm_a: ModuleSettings, arm_b: ModuleSettings,
                layer_u: np.ndarray) -> np.ndarray:
    """Kraus map of a group of exits behind a stage with total gadget unitary ``layer_u``.

    A pair made of one A exit and one B exit is returned as a 4x4 map onto the
    pair's own path_pol space (A exit as path s1); other groups are the
    vertically stacked 2x4 exit maps.
    """
    per = exit_kraus(arm_a, arm_b)
    k = np.vstack([per[e] for e in exits]) @ layer_u
    if len(exits) == 2 and exits[0][0] == "A" and exits[1][0] == "B":
        k = PATH_SWAP_MATRIX @ k
    return k


def assemble_four_outcome(gadget, arm_a: ModuleSettings, arm_b: ModuleSettings) -> list[np.ndarray]:
    """Effects F1..F4 (exits A1, A2, B1, B2) of a gadget followed by one module per arm."""
    if isinstance(gadget, GadgetSettings):
        u = gadget_unitary(gadget)
    elif isinstance(gadget, np.ndarray):
        u = gadget
    else:
        u = layers_unitary(gadget)
    per = exit_kraus(arm_a, arm_b)
    effects = []
    for e in EXITS:
        k = per[e] @ u
        f = dagger(k) @ k
        effects.append(0.5 * (f + dagger(f)))
    return effects
