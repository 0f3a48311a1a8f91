"""Resonating valence-bond states as singlet ground states of the model.

Superposing valence-bond coverings with roots-of-unity phases gives states
with S_T = 0. Every such state is an exact eigenstate, hence immune to the
global bath. Bipartite entanglement entropies are listed for a few cuts.
"""
# %%
import itertools

import numpy as np

from irhm_decoherence import ModelParams, SpinBasis, build_hirhm, build_rvb4, build_rvb6, entanglement_entropy
from irhm_decoherence.hilbert import total_s_squared

for n, builder in ((4, build_rvb4), (6, build_rvb6)):
    basis = SpinBasis(n)
    psi = builder(basis)
    h = build_hirhm(basis, ModelParams(1.0, 1.0, n))
    energy = np.vdot(psi, h @ psi).real
    print(f"N={n}: <S^2> = {np.vdot(psi, total_s_squared(basis) @ psi).real:.2e}, "
          f"E = {energy:.6f}, eigen residual = {np.max(np.abs(h @ psi - energy * psi)):.1e}")
    for cut in itertools.combinations(range(1, n), n // 2 - 1):
        part = (0,) + cut
        print(f"   S({part}) = {entanglement_entropy(psi, part):.10f} bits")
