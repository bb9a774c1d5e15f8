# %% [markdown]
# Kernel, basis and the Hermite functions
#
# A walk through the building blocks for the product group Z_2^2 with
# multiplicities (0.5, 1): the Dunkl kernel, the orthonormal polynomial basis
# phi_nu and the generalized Hermite functions h_nu.

# %%
import numpy as np

from dunklab.core import build_structure
from dunklab.hermite import HermiteFunctionEvaluator, eigen_check, l2_gram, mehler_eval
from dunklab.kernels import KernelEvaluator, dunkl_kernel_closed
from dunklab.poly import orthonormal_basis

s = build_structure(2, [0.5, 1.0])
print("gamma =", s.gamma, " gamma + n/2 =", s.homogeneity)
print("c_k =", s.c_k, " c_l2 =", s.c_l2)

# %% [markdown]
# The kernel has a closed form as a product of rank-one Bessel factors. The
# basis series sum_nu phi_nu(z) phi_nu(w) should reproduce it.

# %%
basis = orthonormal_basis(s, 64)
kev = KernelEvaluator(basis)
z = np.array([0.7 + 0.2j, -0.4])
w = np.array([1.1, 0.3 - 0.5j])
series = kev(z, w)
closed = complex(dunkl_kernel_closed(s, z, w))
print(f"series {series:.15f}\nclosed {closed:.15f}\nrel err {abs(series - closed) / abs(closed):.1e}")

# %% [markdown]
# Hermite functions are eigenfunctions of -(Delta_k - |x|^2)/2 with
# eigenvalue |nu| + gamma + n/2, and orthonormal in L^2 with c_l2 dw_k.

# %%
ev = HermiteFunctionEvaluator(basis)
for nu in [(0, 0), (1, 0), (2, 3)]:
    rep = eigen_check(ev, nu)
    print(nu, "eigenvalue", rep.eigenvalue, "residual", rep.residual)

g = l2_gram(ev, 10)
print("Gram deviation from identity, |nu| <= 10:", np.max(np.abs(g - np.eye(len(g)))))

# %% [markdown]
# Mehler: sum_nu r^|nu| h_nu(x) h_nu(y) in closed form, for complex r inside the unit disc.
# The series is cut at |nu| <= 64, so convergence slows as |r| grows.

# %%
x, y = np.array([0.9, -0.3]), np.array([0.2, 1.2])
for r in (0.3, 0.6j, -0.7):
    ser, cl = mehler_eval(kev, r, x, y)
    print(f"r={r}: series {ser:.12g}  closed {cl:.12g}  rel err {abs(ser - cl) / abs(cl):.1e}")
