import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_povm
from photonpovm import documents as docs
from photonpovm.exceptions import DocumentError
from photonpovm.optics import GadgetSettings, ModuleSettings
from photonpovm.qmath import random_unitary
from photonpovm.states import TWO_PHOTON
from photonpovm.synthesis import PovmSpec, bell_preset, leaf_kraus, synth_instrument, synth_povm

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(finite, finite)
def test_complex_round_trip_is_exact(re, im):
    z = complex(re, im)
    back = docs.decode_complex(json.loads(json.dumps(docs.encode_complex(z))))
    assert back == z


def test_bad_complex_entries():
    for bad in ("x", [1], [1, 2, 3], ["a", 0], None):
        with pytest.raises(DocumentError):
            docs.decode_complex(bad)


def test_matrix_forms(rng):
    m = random_unitary(2, rng)
    rows = docs.encode_matrix(m)
    flat = docs.encode_vector(m)
    assert np.array_equal(docs.decode_matrix(rows, (2, 2)), m)
    assert np.array_equal(docs.decode_matrix(flat, (2, 2)), m)
    with pytest.raises(DocumentError):
        docs.decode_matrix(rows, (4, 4))


def test_state_documents():
    doc = {"basis": "two_photon", "amplitudes": [[1, 0], [0, 0], [0, 0], [1, 0]]}
    s, rho = docs.state_from_doc(doc)
    assert rho is None and s.basis == TWO_PHOTON and np.isclose(s.norm(), 1)
    s2, _ = docs.state_from_doc(docs.state_to_doc(s))
    assert np.array_equal(s2.amplitudes, s.amplitudes)
    pm, _ = docs.state_from_doc({"basis": "path_major", "amplitudes": [[0, 0], [1, 0], [0, 0], [0, 0]]})
    assert pm.in_basis("path_pol").amplitude("Vs1") == 1
    for bad in ({"basis": "nope", "amplitudes": []}, {"basis": "path_pol"},
                {"amplitudes": [[0, 0]] * 4}, {"amplitudes": [[1, 0]] * 3}, []):
        with pytest.raises(DocumentError):
            docs.state_from_doc(bad)


def test_density_documents_reorder_path_major(rng):
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    from photonpovm.states import to_path_major
    _, back = docs.state_from_doc(docs.density_to_doc(to_path_major(rho), "path_major"))
    assert np.array_equal(back, rho)


def test_povm_documents(rng):
    spec = PovmSpec(tuple(random_povm(3, rng)), ("a", "b", "c"))
    back, kraus = docs.povm_from_doc(json.loads(docs.dumps(docs.povm_to_doc(spec))))
    assert kraus is None and back.labels == spec.labels
    assert all(np.array_equal(x, y) for x, y in zip(back.effects, spec.effects))
    unlabeled, _ = docs.povm_from_doc({"effects": docs.povm_to_doc(spec)["effects"]})
    assert unlabeled.labels == ("F1", "F2", "F3")
    with pytest.raises(DocumentError):
        docs.povm_from_doc({"labels": ["x"]})
    with pytest.raises(DocumentError):
        docs.povm_from_doc({"effects": docs.povm_to_doc(spec)["effects"], "labels": ["a", "a", "b"]})


def test_kraus_only_povm_document(rng):
    u = random_unitary(8, rng)[:, :4]
    ks = [u[:4], u[4:]]
    spec, kraus = docs.povm_from_doc({"kraus": [docs.encode_matrix(k) for k in ks]})
    assert len(kraus) == 2 and np.allclose(sum(spec.effects), np.eye(4))


def test_gadget_and_module_records(rng):
    g = GadgetSettings(0.1, 0.2, -0.3, *(random_unitary(2, rng) for _ in range(4)))
    r = json.loads(json.dumps(docs.gadget_to_record(g)))
    assert len(r["u1"]) == 4  # four complex entries, row-major
    g2 = docs.gadget_from_record(r)
    assert (g2.alpha, g2.zeta, g2.xi) == (g.alpha, g.zeta, g.xi)
    assert all(np.array_equal(getattr(g, k), getattr(g2, k)) for k in ("u1", "u2", "v1", "v2"))
    m = ModuleSettings(0.4, 0.5, 0.6, 0.7, *(random_unitary(2, rng) for _ in range(3)))
    m2 = docs.module_from_record(json.loads(json.dumps(docs.module_to_record(m))))
    assert m2 == m and np.array_equal(m2.v2s, m.v2s)
    assert docs.gadget_from_record({"alpha": 0.5}).alpha == 0.5
    with pytest.raises(DocumentError):
        docs.gadget_from_record({"zeta": 0})
    with pytest.raises(DocumentError):
        docs.module_from_record({"theta": 0, "phi": 0, "us": [[2, 0], [0, 0], [0, 0], [2, 0]]})


def _same_tree(a, b):
    ka, kb = leaf_kraus(a), leaf_kraus(b)
    return a.labels == b.labels and all(
        all(np.array_equal(x, y) for x, y in zip(ka[l], kb[l])) for l in a.labels)


def test_tree_round_trip(rng):
    for tree in (bell_preset()[0], synth_povm(PovmSpec(tuple(random_povm(5, rng)))),
                 synth_instrument(np.split(random_unitary(8, rng)[:, :4], 2))):
        text = docs.dumps(docs.tree_to_doc(tree))
        back = docs.tree_from_doc(json.loads(text))
        assert _same_tree(tree, back)
        assert docs.dumps(docs.tree_to_doc(back)) == text


def test_tree_document_errors():
    tree_doc = docs.tree_to_doc(bell_preset()[0])
    for mutate in (lambda d: d.pop("root"),
                   lambda d: d.update(format="other"),
                   lambda d: d["root"].update(type="blob"),
                   lambda d: d["root"].pop("armA"),
                   lambda d: d["root"]["children"].pop(),
                   lambda d: d["root"].update(layers=[])):
        d = json.loads(json.dumps(tree_doc))
        mutate(d)
        with pytest.raises(DocumentError):
            docs.tree_from_doc(d)


def test_read_doc_errors(tmp_path):
    with pytest.raises(DocumentError):
        docs.read_doc(tmp_path / "missing.json")
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(DocumentError):
        docs.read_doc(p)
    docs.write_doc(tmp_path / "ok.json", {"a": 1.5})
    assert docs.read_doc(tmp_path / "ok.json") == {"a": 1.5}
