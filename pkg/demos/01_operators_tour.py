"""A tour of the fractional operators on the step-h time scale.

Builds a few grid functions, applies the order-nu sum and the two
fractional differences, and shows the identities that tie them together:
the two equivalent forms of each difference, the bridge between the
Riemann-Liouville and Caputo operators, and the telescoping of the
order-1 case back to the plain forward difference.
"""

import numpy as np

from hfrac import (
    GridFunction,
    HGrid,
    caputo_difference,
    caputo_difference_direct,
    forward_difference,
    fractional_sum,
    h_factorial,
    reciprocal_gamma,
    rl_difference,
    rl_difference_direct,
    write_grid_csv,
)

rng = np.random.default_rng(0)

# A scalar function on the scale {0, 0.5, 1.0, ...}
grid = HGrid(a=0.0, h=0.5, n_points=16)
f = GridFunction(grid, np.cos(grid.points))

print("grid points:", grid.points[:6], "...")

# ---------------------------------------------------------------------------
# The order-nu sum generalizes repeated summation.  Its output lives on the
# scale shifted by nu*h, and the offset is carried explicitly.
s = fractional_sum(f, 0.5)
print("\norder-0.5 sum lives on points", s.points[:4], "... (offset", s.offset, ")")

# order 1 of a constant accumulates c * (t - a)
const = GridFunction(grid, np.full(16, 2.0))
s1 = fractional_sum(const, 1.0)
print("order-1 sum of the constant 2:", s1.values[:4, 0], "at", s1.points[:4])

# ---------------------------------------------------------------------------
# Both fractional differences come in two equivalent forms; the package
# implements each independently so they can cross-check one another.
nu = 0.3
r_two_stage = rl_difference(f, nu)
r_single_sum = rl_difference_direct(f, nu)
print("\nRL two-stage vs single-sum, worst gap:",
      np.max(np.abs(r_two_stage.values - r_single_sum.values)))

c_two_stage = caputo_difference(f, nu)
c_binomial = caputo_difference_direct(f, nu)
print("Caputo two-stage vs binomial form, worst gap:",
      np.max(np.abs(c_two_stage.values - c_binomial.values)))

# The two operators differ exactly by a falling-factorial multiple of f(a):
bridge = np.array([
    f.values[0, 0] * h_factorial(t - grid.a, -nu, grid.h) * reciprocal_gamma(1 - nu)
    for t in c_two_stage.points
])
print("bridge identity, worst gap:",
      np.max(np.abs(c_two_stage.values[:, 0] - (r_two_stage.values[:, 0] - bridge))))

# ---------------------------------------------------------------------------
# At nu = 1 both collapse to the forward difference.
d = forward_difference(f)
print("\nnu=1 RL equals forward difference:",
      np.array_equal(rl_difference(f, 1.0).values, d.values))
print("nu=1 Caputo equals forward difference:",
      np.array_equal(caputo_difference(f, 1.0).values, d.values))

# The Caputo difference annihilates constants; the RL difference does not.
print("Caputo of a constant:", np.max(np.abs(caputo_difference(const, nu).values)))
print("RL of a constant at the first point:", rl_difference(const, nu).values[0, 0])

# Grid functions round-trip through CSV at full precision.
write_grid_csv(f, "operators_tour.csv")
print("\nwrote operators_tour.csv")
