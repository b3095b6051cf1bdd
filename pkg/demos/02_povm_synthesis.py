"""From a random four-dimensional POVM to optical settings and back."""

import numpy as np

from photonpovm import PovmSpec, reconstruct_effects, synth_povm
from photonpovm.documents import dumps, tree_to_doc
from photonpovm.synthesis import effect_deviation

rng = np.random.default_rng(7)


def random_povm(n):
    # positive operators rescaled by S^(-1/2) so that they sum to the identity
    ms = [rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(n)]
    ps = [m @ m.conj().T for m in ms]
    w, v = np.linalg.eigh(sum(ps))
    s = v @ np.diag(w ** -0.5) @ v.conj().T
    return [s @ p @ s for p in ps]


for n in (2, 3, 5, 8):
    spec = PovmSpec(tuple(random_povm(n)))
    tree = synth_povm(spec)
    err = effect_deviation(reconstruct_effects(tree), spec)
    print("n=%d: %d stages, depth %d, max deviation %.1e" % (n, len(tree.nodes()), tree.depth(), err))

# A settings document is plain JSON. Module angles of the first stage:
spec = PovmSpec(tuple(random_povm(3)), ("a", "b", "c"))
doc = tree_to_doc(synth_povm(spec))
arm = doc["root"]["armA"]
print(dumps({k: arm[k] for k in ("theta", "phi", "beta", "gamma")}), end="")
print("document size: %d bytes" % len(dumps(doc)))

# Rank-one effects (a symmetric informationally complete set would be one
# example) go through the same path.
v = rng.normal(size=(6, 4)) + 1j * rng.normal(size=(6, 4))
ps = [np.outer(x, x.conj()) for x in v]
w, u = np.linalg.eigh(sum(ps))
s = u @ np.diag(w ** -0.5) @ u.conj().T
rank_one = PovmSpec(tuple(s @ p @ s for p in ps))
print("rank-one, 6 outcomes: deviation %.1e" % effect_deviation(reconstruct_effects(synth_povm(rank_one)), rank_one))
