"""Moving a two-photon polarization state onto one photon's polarization and path.

Two linear-optics Bell measurements each succeed half the time, so a run is
heralded with probability one quarter. Accepted runs carry the input state.
"""

import numpy as np

from photonpovm import teleport_postselected, teleport_trials, two_photon_state
from photonpovm.teleport import TeleportPlan

psi = two_photon_state(0.6, 0.0, 0.48j, 0.64)

# All sixteen branches: each has probability 1/16 and, after correction,
# equals the input state up to a phase.
for r in teleport_postselected(psi)[:4]:
    overlap = abs(np.vdot(r.corrected.amplitudes, psi.amplitudes))
    print(r.branch, "p = %.4f" % r.probability, "|<psi|out>| = %.12f" % overlap)

plan = TeleportPlan.for_state(psi)
print("heralding probability:", plan.success_probability())

summary = teleport_trials(psi, 100000, seed=11)
print("accepted %d of %d (rate %.4f)" % (summary.accepted, summary.trials, summary.acceptance_rate))
print("first pair succeeded %d times, second %d" % (summary.first_success, summary.second_success))
print("worst output fidelity %.12f" % summary.min_fidelity)
