#!/usr/bin/env python3
"""State families: Bell-diagonal geometry and amplitude-damped phase structure.

Shows the hyperspherical-angle construction of Bell-diagonal states (with the
four-qubit register cross-check), then maps out where amplitude damping
destroys the entanglement of depolarized Bell states.
"""

import numpy as np

import entbandit as eb
from entbandit.states import bds_circuit_reference, canonical_angles_from_probs, min_ppt_eigenvalue
from entbandit.verify import damped_pt_eigenvalues_phi

np.set_printoptions(precision=4, suppress=True)

print("=== Bell-diagonal states from angles on the weight 3-sphere ===")
for p in ([0.7, 0.1, 0.1, 0.1], [0.1, 0.2, 0.3, 0.4]):
    psi, theta, phi = canonical_angles_from_probs(np.array(p))
    p_back, rho = eb.bds_from_canonical_angles(psi, theta, phi)
    via_register = bds_circuit_reference(psi, theta, phi)
    print(f"  weights {p}: angles ({psi:.4f}, {theta:.4f}, {phi:.4f})")
    print(f"    round trip max error {np.max(np.abs(p_back - p)):.1e}; "
          f"register construction matches to {np.max(np.abs(rho - via_register)):.1e}")

print("\n=== separability boundary of damped depolarized phi-states ===")
print(" w      boundary r*   smallest PT eigenvalue at r=0 / r=0.99")
for w in (0.4, 0.6, 0.8, 0.95):
    f0 = min_ppt_eigenvalue(eb.amplitude_damp(eb.depolarized_bell("phi_plus", w), 0.0))
    f1 = min_ppt_eigenvalue(eb.amplitude_damp(eb.depolarized_bell("phi_plus", w), 0.99))
    r_star = (3 * w - 1) / (1 + w)
    print(f"{w:.2f}    {r_star:.4f}      {f0:+.4f} / {f1:+.4f}")

print("\nclosed-form spectrum check at (w, r) = (0.5, 0.2):")
rho = eb.amplitude_damp(eb.depolarized_bell("phi_plus", 0.5), 0.2)
eigs = np.sort(np.linalg.eigvalsh(eb.partial_transpose(rho)))
print("  numeric:", eigs)
print("  closed :", damped_pt_eigenvalues_phi(0.5, 0.2))

print("\n=== random families ===")
inst = eb.ginibre_promise_instance(5, seed=11)
print(f"promise batch: K={inst.k}, entangled arm {inst.entangled_arms()}")
print("criterion values by WBM (rows = arms):")
print(inst.criterion_values)
