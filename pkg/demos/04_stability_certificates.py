"""Sampled stability certificates for fractional order-nu systems.

A system is certified stable when its sufficient condition (quadratic:
x^T P f(t,x) <= 0; componentwise power: x_i^(p-1) f_i(t,x) <= 0) holds at
every point of a deterministic low-discrepancy lattice around the origin.
The verdict is sampled evidence, not a proof, and the report says so.
"""

import numpy as np

from hfrac import (
    LatticeSampler,
    OperatorKind,
    QuadraticCondition,
    SystemDef,
    certify_theorem,
    get_builtin,
)

# Certify the four built-in systems with their natural conditions.
for key in ("ex5.1", "ex5.2", "ex5.3", "ex5.4"):
    builtin = get_builtin(key)
    report = certify_theorem(builtin.system, builtin.condition,
                             LatticeSampler(count=10_000, seed=0))
    print(f"{key}: {report.verdict}  (worst condition value "
          f"{report.worst_margin:+.3e} at {np.round(report.worst_point, 3)})")

# An antistable system is not certified: the condition is positive away
# from the origin and the report pinpoints a witness.
anti = SystemDef(
    dim=1, kind=OperatorKind.CAPUTO, nu=0.5, a=0.0, h=1.0,
    x0=np.array([0.1]), rhs=lambda t, x: np.array([x[0]]),
)
report = certify_theorem(anti, QuadraticCondition(np.eye(1)), LatticeSampler(count=2000))
print("\nantistable system:", report.verdict,
      f"(condition value {report.worst_margin:+.3e} at x = {report.worst_point})")

# Strict negativity at every nonzero sample plus an actually decaying
# confirmation run upgrade the verdict to asymptotic.
linear = SystemDef(
    dim=1, kind=OperatorKind.CAPUTO, nu=1.0, a=0.0, h=1.0,
    x0=np.array([1.0]), rhs=lambda t, x: np.array([-x[0]]),
)
report = certify_theorem(linear, QuadraticCondition(np.eye(1)), LatticeSampler(count=2000))
print("strictly decaying system:", report.verdict)

# The full report serializes as a key=value block plus a margins CSV.
print("\n" + report.to_text())
report.write_margins_csv("certificate_margins.csv")
print("wrote certificate_margins.csv")
