"""Strong-coupling effective Hamiltonian after the Lang-Firsov transformation.

The hopping is narrowed by exp(-g^2), and second-order virtual phonon
processes generate extra XXZ-type couplings. Both keep the infinite-range
structure, so they commute with the original Hamiltonian.
"""
# %%
import numpy as np

from irhm_decoherence import CouplingParams, ModelParams, SpinBasis, build_h2, build_hirhm, build_hs, f1, f2
from irhm_decoherence.effective import (
    IDENTITIES,
    ThirdOrderCoefficients,
    appendix_a_identity,
    build_h3,
    second_order_couplings,
    spin_form_couplings,
    valid_site_pairs,
)
from irhm_decoherence.hilbert import commutator, max_abs

# %% Series coefficients and couplings as the coupling grows
print(f"{'g':>4} {'f1':>12} {'f2':>14} {'J_perp2':>12} {'J_par2':>12} {'J_par2 / (J^2/4g^2w)':>22}")
for g in (1.0, 2.0, 3.0, 4.0, 5.0):
    p = CouplingParams(g, 1.0, ModelParams(0.5, 1.0, 6))
    jp, jl = second_order_couplings(p)
    asym = p.model.j ** 2 / (4 * g * g * p.omega)
    print(f"{g:4.1f} {f1(g):12.5g} {f2(g):14.5g} {jp:12.4e} {jl:12.4e} {jl / asym:22.4f}")

# %% The effective terms commute with the original model
p = CouplingParams(2.0, 1.0, ModelParams(0.5, 0.8, 5))
basis = SpinBasis(5)
h = build_hirhm(basis, p.model)
print("|[H_s, H]| =", max_abs(commutator(build_hs(basis, p), h)))
print("|[H2, H]|  =", max_abs(commutator(build_h2(basis, p), h)))
rng = np.random.default_rng(0)
coeffs = ThirdOrderCoefficients(tuple(rng.normal(size=6)), tuple(rng.normal(size=3)), tuple(rng.normal(size=3)))
print("|[H3, H]|  =", max_abs(commutator(build_h3(basis, p, coeffs), h)), "(random third-order coefficients)")
print("spin-form couplings (J_tr, J_lng, shift):", spin_form_couplings(p))

# %% Third-order operator products reduce to functions of the particle number
for which in IDENTITIES:
    worst = max(appendix_a_identity(basis, which, l, i)[2] for l, i in valid_site_pairs(basis, which))
    print(f"{which:>4}: max residual {worst:.1e}")
