# Newton orbits of f = exp(int h) and g = z exp(int (h - 1)/t)
#
# N_f(z) = z - 1/h(z) never has a finite fixed point.  N_g(z) = z (1 - 1/h(z))
# has a superattracting fixed point at 0, and with even exponents h > 1 on
# the real axis, so every real orbit moves toward 0.

import numpy as np

from baker_scope import NewtonMap, ParameterSequence, orbit, real_descent_check

seq = ParameterSequence((1, 2, 4), (2, 4, 8), parity=True)
f_map, g_map = NewtonMap("f", seq), NewtonMap("g", seq)

rec = orbit(f_map, 0.0, max_iter=30)
print(rec.classification.value, [round(z.real, 4) for z in rec.iterates[:6]])

rec = orbit(g_map, 1.0)
print(rec.classification.value, "after", rec.steps, "steps:", rec.moduli())

rep = real_descent_check(g_map, np.linspace(-8, 8, 161))
print("descent holds on [-8, 8]:", rep.passed, "worst ratio", rep.worst_ratio)

# The descent is real but slow: at |x| = 8 the step is |x|/h(x), about 2e-6.
# Counting steps to reach 1e-12 shows how quickly the cost grows with x.
for x in (2.0, 4.0, 6.0, 7.0, 8.0):
    rec = orbit(g_map, x, max_iter=10 ** 6, escape_radius=np.inf)
    print(f"x0 = {x}: {rec.classification.value} in {rec.steps} steps")
