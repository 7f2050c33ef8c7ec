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
# # The h^(-2/3) kernel bound
#
# In semiclassical variables the resolvent in the critical sector reduces to
# a first-order operator whose approximate inverse is an explicit integral
# kernel.  The Schur test bounds its norm by `S1 = sup_x int |K| dy` (and the
# transposed sup).  Here we compute `S1` numerically and watch it scale like
# `h^(-2/3)`.

# %%
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pseudospec import kernelbound as kb

FIG = Path("figures")
FIG.mkdir(exist_ok=True)

# %%
h = np.logspace(-4, -1, 8)
rep = kb.scaling_fit(h, 1 + 6j, 0.5, 0.5)
print(f"fitted slope {rep.fitted_slope:.4f} (target -2/3)")

fig, ax = plt.subplots(figsize=(5, 4))
ax.loglog(h, rep.S1, "o", label="S1")
ax.loglog(h, rep.S1[0] * (h / h[0]) ** (-2 / 3), "--", label="h^(-2/3)")
ax.set(xlabel="h", ylabel="Schur bound")
ax.legend()
fig.savefig(FIG / "kernel_scaling.png", dpi=120)

# %% [markdown]
# The exponent is only asymptotic.  Rescaling `x = a u` shows that `S1`
# depends on `h`, `Im c` and `a` through `h / (Im c a^3)`, so small `a` or
# small `Im c` pushes the same `h` range out of the asymptotic regime.

# %%
for c_im, a in [(6.0, 0.5), (2.0, 0.25)]:
    r = kb.scaling_fit(h, complex(1, c_im), a, 0.5)
    print(f"Im c = {c_im}, a = {a}: slope {r.fitted_slope:.3f}")

# %% [markdown]
# ## The Airy-type tail
#
# The pointwise estimate rests on `I(x) = int_x^inf exp(-lambda (y^3 - x^3)) dy`.
# At `x = 0` it equals `Gamma(4/3) lambda^(-1/3)`, it decays like
# `1/(3 lambda x^2)` for large positive `x`, and for negative `x` it grows
# while `x^2 I(x)` stays bounded.

# %%
xs = np.linspace(-20, 20, 161)
vals = np.array([kb.airy_tail_integral(x, 1.0) for x in xs])
print(f"I(0) - Gamma(4/3) = {vals[80] - math.gamma(4 / 3):.1e}")

fig, ax = plt.subplots(figsize=(6, 3.5))
ax.plot(xs, xs**2 * vals)
ax.axhline(1.0, ls=":", color="k")
ax.set(xlabel="x", ylabel="x^2 I(x)")
fig.savefig(FIG / "airy_tail.png", dpi=120)
