"""Defining systems from expression text instead of Python callables.

Right-hand sides can be written in a tiny arithmetic language over t and
x1..xn (operators + - * / ^ with integer exponents), so new systems need no
code.  The same format drives the CLI's --file option.
"""

from hfrac import certify_theorem, decay_report, parse_system_source, solve
from hfrac.lyapunov import LatticeSampler, PowerCondition

definition = """
# a Caputo system with cubic damping in both components
kind=caputo
nu=0.5
h=1
a=0
x0=0.3,0.5
f1=-x1^3 - 0.1*x1
f2=-x2^3
"""

system, sources = parse_system_source(definition)
print("parsed components:", sources)
print("dimension:", system.dim, "| kind:", system.kind.value, "| order:", system.nu)

traj = solve(system, 60)
print("\nafter 60 steps:", traj.state(60))
print(decay_report(traj).summary())

report = certify_theorem(system, PowerCondition(3), LatticeSampler(count=5000))
print("\ncubic-power certificate:", report.verdict)
