# %% [markdown]
# Chaotic transform, coherent states and the Hermite flow
#
# One dimension, kappa = 0.25.

# %%
import cmath
import math

import numpy as np

from dunklab.core import build_structure
from dunklab.fock import chaotic_transform, coherent_state
from dunklab.poly import orthonormal_basis
from dunklab.propagators import (KernelPropagator, SpectralPropagator, coherent_image, fit_kernel_constant,
                                 kernel_relation_check, relation_constant)

s = build_structure(1, [0.25])
basis = orthonormal_basis(s, 60)

# %% [markdown]
# C_k sends h_nu to phi_nu, so the coefficient vector of C_k h_3 is a unit vector.

# %%
fv = chaotic_transform(basis, {(3,): 1.0}, max_degree=8)
print(np.round(fv.array(basis.indices(8)).real, 12))

# %% [markdown]
# A Gaussian source (pure ground state) in pointwise form
# goes through the same transform.

# %%
fv = chaotic_transform(basis, lambda x: np.exp(-x[:, 0] ** 2 / 2), max_degree=6)
print({nu: round(float(abs(c)), 12) for nu, c in fv.coefficients.items() if abs(c) > 1e-12})

# %% [markdown]
# Under exp(-itH) a coherent state stays coherent: the label rotates by
# exp(-it) and the state picks up the phase exp(-it(gamma + n/2)).

# %%
P = SpectralPropagator(basis)
for t in (0.5, 1.0, math.pi):
    rep = coherent_image(P, [0.8], t)
    print(f"t={t:.3f} label {rep.label:.6f} phase {rep.constant:.6f} residual {rep.residual:.1e}")

cs = coherent_state(basis, [0.8])
print("|F_z|^2 =", cs.norm_squared())

# %% [markdown]
# Kernel quadrature against spectral propagation. The ratio is one constant,
# 2^-(gamma + n/2), for every time and point.

# %%
K = KernelPropagator(s, "hermite")
c, spread = fit_kernel_constant(K, basis, {(0,): 1.0, (2,): 0.5j}, [0.3, 1.2, -2.0], [[0.1], [0.9]])
print(f"fitted constant {c:.12f}, expected {2 ** -s.homogeneity:.12f}, spread {spread:.1e}")

# %% [markdown]
# The Hermite and free kernels are related by a lens change of variables.

# %%
lhs, rhs = kernel_relation_check(s, [0.4], [-0.7], 0.8)
print("lhs", lhs, "\nconst * rhs", relation_constant(s) * rhs)
print("phase of constant:", cmath.phase(relation_constant(s)))
