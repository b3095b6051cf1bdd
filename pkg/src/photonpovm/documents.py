"""JSON documents: states, POVMs, synthesized settings and experiment reports.

Complex numbers are ``[re, im]`` pairs. Matrices are lists of rows; 2x2
unitaries inside settings records are flat lists of four entries, row-major.
Floats are written with Python's shortest round-trip representation, so
reading a document back reproduces every double exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Union

import numpy as np

from .exceptions import DocumentError
from .optics import GadgetSettings, ModuleSettings
from .states import BASES, StateVector, basis_name, to_path_major
from .synthesis import Branch, CompiledUnitary, Leaf, Node, PovmSpec, SynthesisTree

SETTINGS_FORMAT = "photonpovm.settings"
FORMAT_VERSION = 1


# --- complex numbers ---------------------------------------------------------

def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_complex(pair) -> complex:
    if isinstance(pair, (int, float)) and not isinstance(pair, bool):
        return complex(pair)
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise DocumentError("complex entries are [re, im] pairs, got %r" % (pair,))
    try:
        return complex(float(pair[0]), float(pair[1]))
    except (TypeError, ValueError) as exc:
        raise DocumentError("bad complex entry %r" % (pair,)) from exc


def encode_vector(v) -> list[list[float]]:
    return [encode_complex(z) for z in np.asarray(v).ravel()]


def decode_vector(items) -> np.ndarray:
    if not isinstance(items, list):
        raise DocumentError("expected a list of complex entries")
    return np.array([decode_complex(p) for p in items], dtype=complex)


def encode_matrix(m) -> list[list[list[float]]]:
    return [encode_vector(row) for row in np.asarray(m)]


def decode_matrix(rows, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Accepts a list of rows, or a flat row-major list when ``shape`` is given."""
    if not isinstance(rows, list) or not rows:
        raise DocumentError("expected a non-empty matrix")
    if shape is not None and len(rows) == shape[0] * shape[1] and not _is_row(rows[0]):
        m = decode_vector(rows).reshape(shape)
    else:
        m = np.array([decode_vector(r) for r in rows], dtype=complex) if all(map(_is_row, rows)) else None
        if m is None or m.ndim != 2:
            raise DocumentError("matrix rows are lists of [re, im] pairs")
    if shape is not None and m.shape != shape:
        raise DocumentError("expected a %dx%d matrix, got %s" % (shape + (m.shape,)))
    return m


def _is_row(x) -> bool:
    return isinstance(x, list) and (not x or isinstance(x[0], list))


# --- states ------------------------------------------------------------------

def state_to_doc(state: StateVector, density: np.ndarray | None = None) -> dict:
    doc = {"basis": basis_name(state.basis), "amplitudes": encode_vector(state.amplitudes)}
    if density is not None:
        doc["density"] = encode_matrix(density)
    return doc


def density_to_doc(rho: np.ndarray, basis: str = "path_pol") -> dict:
    return {"basis": basis, "density": encode_matrix(rho)}


def state_from_doc(doc: dict) -> tuple[StateVector | None, np.ndarray | None]:
    """Returns ``(state, density)``; either may be absent but not both.

    A density matrix is re-expressed in the canonical path_pol order.
    """
    if not isinstance(doc, dict):
        raise DocumentError("state document must be an object")
    basis = doc.get("basis", "path_pol")
    if basis not in BASES:
        raise DocumentError("unknown basis %r; expected one of %s" % (basis, sorted(BASES)))
    state = rho = None
    if "amplitudes" in doc:
        amps = decode_vector(doc["amplitudes"])
        if amps.shape != (4,):
            raise DocumentError("a state has 4 amplitudes, got %d" % amps.size)
        try:
            state = StateVector(amps, BASES[basis])
            if abs(state.norm() - 1) > 1e-14:
                state = state.normalize()
        except ValueError as exc:
            raise DocumentError(str(exc)) from exc
    if "density" in doc:
        rho = decode_matrix(doc["density"], (4, 4))
        if basis == "path_major":
            rho = to_path_major(rho)
    if state is None and rho is None:
        raise DocumentError("state document needs 'amplitudes' or 'density'")
    return state, rho


# --- POVMs -------------------------------------------------------------------

def povm_to_doc(spec: PovmSpec, kraus=None) -> dict:
    doc: dict[str, Any] = {"labels": list(spec.labels),
                           "effects": [encode_matrix(f) for f in spec.effects]}
    if kraus is not None:
        doc["kraus"] = [encode_matrix(k) for k in kraus]
    return doc


def povm_from_doc(doc: dict) -> tuple[PovmSpec, list[np.ndarray] | None]:
    if not isinstance(doc, dict):
        raise DocumentError("POVM document must be an object")
    kraus = None
    if "kraus" in doc:
        kraus = [decode_matrix(k, (4, 4)) for k in doc["kraus"]]
    if "effects" in doc:
        effects = tuple(decode_matrix(f, (4, 4)) for f in doc["effects"])
    elif kraus is not None:
        effects = tuple(k.conj().T @ k for k in kraus)
    else:
        raise DocumentError("POVM document needs 'effects' (or 'kraus')")
    labels = doc.get("labels") or ()
    if not all(isinstance(l, str) for l in labels):
        raise DocumentError("labels must be strings")
    try:
        return PovmSpec(effects, tuple(labels)), kraus
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


# --- settings records --------------------------------------------------------

def gadget_to_record(g: GadgetSettings) -> dict:
    return {"alpha": g.alpha, "zeta": g.zeta, "xi": g.xi,
            "u1": encode_vector(g.u1), "u2": encode_vector(g.u2),
            "v1": encode_vector(g.v1), "v2": encode_vector(g.v2)}


def gadget_from_record(r: dict) -> GadgetSettings:
    try:
        return GadgetSettings(
            alpha=float(r["alpha"]), zeta=float(r.get("zeta", 0.0)), xi=float(r.get("xi", 0.0)),
            **{k: decode_matrix(r[k], (2, 2)) for k in ("u1", "u2", "v1", "v2") if k in r})
    except KeyError as exc:
        raise DocumentError("gadget record is missing %s" % exc) from exc
    except (TypeError, ValueError) as exc:
        raise DocumentError("bad gadget record: %s" % exc) from exc


def module_to_record(m: ModuleSettings) -> dict:
    return {"theta": m.theta, "phi": m.phi, "beta": m.beta, "gamma": m.gamma,
            "us": encode_vector(m.us), "v1s": encode_vector(m.v1s), "v2s": encode_vector(m.v2s)}


def module_from_record(r: dict) -> ModuleSettings:
    try:
        return ModuleSettings(
            theta=float(r["theta"]), phi=float(r["phi"]),
            beta=float(r.get("beta", 0.0)), gamma=float(r.get("gamma", 0.0)),
            **{k: decode_matrix(r[k], (2, 2)) for k in ("us", "v1s", "v2s") if k in r})
    except KeyError as exc:
        raise DocumentError("module record is missing %s" % exc) from exc
    except (TypeError, ValueError) as exc:
        raise DocumentError("bad module record: %s" % exc) from exc


def _compiled_to_list(c: CompiledUnitary) -> list[dict]:
    return [gadget_to_record(g) for g in c.layers]


def _compiled_from_list(items) -> CompiledUnitary:
    if not isinstance(items, list):
        raise DocumentError("layers must be a list of gadget records")
    try:
        return CompiledUnitary(tuple(gadget_from_record(r) for r in items))
    except DocumentError:
        raise
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def _node_to_doc(n: Union[Node, Leaf]) -> dict:
    if isinstance(n, Leaf):
        return {"type": "leaf", "label": n.label,
                "correction": None if n.correction is None else _compiled_to_list(n.correction)}
    return {"type": "node", "layers": _compiled_to_list(n.layers),
            "armA": module_to_record(n.arm_a), "armB": module_to_record(n.arm_b),
            "children": [{"exits": list(b.exits), "child": _node_to_doc(b.child)} for b in n.branches]}


def _node_from_doc(d: dict) -> Union[Node, Leaf]:
    if not isinstance(d, dict):
        raise DocumentError("tree entries must be objects")
    kind = d.get("type")
    if kind == "leaf":
        corr = d.get("correction")
        return Leaf(str(d["label"]), None if corr is None else _compiled_from_list(corr))
    if kind != "node":
        raise DocumentError("tree entry type must be 'node' or 'leaf', got %r" % (kind,))
    try:
        branches = tuple(Branch(tuple(c["exits"]), _node_from_doc(c["child"])) for c in d["children"])
        return Node(_compiled_from_list(d["layers"]), module_from_record(d["armA"]),
                    module_from_record(d["armB"]), branches)
    except KeyError as exc:
        raise DocumentError("node is missing %s" % exc) from exc
    except DocumentError:
        raise
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def tree_to_doc(tree: SynthesisTree) -> dict:
    return {"format": SETTINGS_FORMAT, "version": FORMAT_VERSION,
            "labels": list(tree.labels), "zero_labels": list(tree.zero_labels),
            "root": _node_to_doc(tree.root)}


def tree_from_doc(doc: dict) -> SynthesisTree:
    if not isinstance(doc, dict) or "root" not in doc:
        raise DocumentError("settings document needs a 'root' entry")
    if doc.get("format", SETTINGS_FORMAT) != SETTINGS_FORMAT:
        raise DocumentError("not a settings document: format %r" % doc.get("format"))
    root = _node_from_doc(doc["root"])
    labels = doc.get("labels")
    if not labels:
        labels = _leaf_labels(root)
    return SynthesisTree(root, tuple(labels), tuple(doc.get("zero_labels", ())))


def _leaf_labels(n) -> list[str]:
    if isinstance(n, Leaf):
        return [n.label]
    out = []
    for b in n.branches:
        out += [l for l in _leaf_labels(b.child) if l not in out]
    return out


# --- files -------------------------------------------------------------------

def dumps(doc: dict) -> str:
    """Deterministic text form (fixed key order, two-space indent, trailing newline)."""
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_doc(path, doc: dict) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def read_doc(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError("cannot read %s: %s" % (path, exc.strerror or exc)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("%s is not valid JSON: %s" % (path, exc)) from exc
