# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Pseudospectra and resolvent growth along curves
#
# The eigenvalues are well behaved, but the operator is far from normal.
# Away from the ray, `sigma_min(H - z)` can be tiny, so `z` is an eigenvalue
# of a very small perturbation.  We map `log10 sigma_min` over a window and
# then follow the resolvent norm along curves `z = b eta + c eta^p`.

# %%
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pseudospec import pseudospectra as ps
from pseudospec.operator import compute_spectrum, discretize, exact_eigenvalue

FIG = Path("figures")
FIG.mkdir(exist_ok=True)
c = 1 + 5j

# %% [markdown]
# ## The sigma_min field
#
# One LU per grid point, then a few steps of block inverse iteration.  A
# coarser grid than the CLI default keeps this cell quick.

# %%
op = discretize(c, 160, 7.0)
win = ps.ComplexWindow(0.0, 110.0, -10.0, 100.0, 40, 40)
field = ps.compute_field(op, win)
levels = [10.0**-k for k in range(1, 11)]
print("nesting holds:", field.nesting_holds(levels))

lam = compute_spectrum(op).eigenvalues
fig, ax = plt.subplots(figsize=(6, 5.5))
cs = ax.contour(win.re, win.im, field.log10().T, levels=np.log10(levels)[::-1], cmap="viridis")
fig.colorbar(cs, label="log10 eps")
ax.plot(lam.real, lam.imag, "k.", ms=3)
ax.set(xlim=(0, 110), ylim=(-10, 100), xlabel="Re z", ylabel="Im z")
fig.savefig(FIG / "pseudospectra.png", dpi=120)

# %% [markdown]
# The contours open up into the sector between the ray and the real axis.
# The same level sets also come from the package's own marching squares,
# which the CLI uses for its SVG output.

# %%
lines = ps.contours(field, [1e-2, 1e-6])
print([len(group) for group in lines], "polylines at eps = 1e-2, 1e-6")

# %% [markdown]
# ## Growth and decay along curves
#
# Along `z_eta = eta + c eta^p` the resolvent norm grows for `p` above the
# critical index 1/3 and decays for `p` at or below it.  Only samples that
# lie inside the trust radius and agree with a refined discretization are
# kept.

# %%
op = discretize(c, 300, 10.0)
fig, ax = plt.subplots(figsize=(6, 4))
for p in (1.0, 0.5, 1 / 3):
    eta_max = ps.eta_at_modulus(1.0, c, p, abs(exact_eigenvalue(c, 30)))
    tr = ps.trace_curve(op, 1.0, p, (1.0, eta_max), 24)
    s = tr.stable
    ax.loglog(np.abs(tr.z[s]), tr.resolvent_norms[s], "o-", ms=3, label=f"p = {p:.3g}")
    if p == 1 / 3:
        fit = ps.fit_exponent(tr, 0.5)
        print(f"p = 1/3 tail slope {fit.slope:.3f} over {fit.n_points} points")
ax.set(xlabel="|z|", ylabel="||(H - z)^-1||")
ax.legend()
fig.savefig(FIG / "curves.png", dpi=120)

# %% [markdown]
# ## Perturbed spectra stay inside the pseudospectrum
#
# Eigenvalues of `H + E` with `||E|| = eps` must satisfy
# `sigma_min(H - lambda) <= eps`.  The check below is exact up to rounding.

# %%
rep = ps.perturbation_check(discretize(c, 100, 6.0), 1e-2, 20, seed=1)
print(f"max sigma_min / eps = {rep.max_ratio:.6f}")
