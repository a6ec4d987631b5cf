# Products with astronomically large exponents
#
# h(z) = prod (1 + (z/r_k)**n_k).  With radii 1, 2, 4 the smallest exponents
# that satisfy every growth condition are 2, 256 and 2**2048, so the last
# factor cannot be evaluated in doubles anywhere near |z| = 4.

import math

from baker_scope import ExtReal, eval_h, generate_strict, pole_point, validate

seq = generate_strict((1, 2, 4))
print([n.bit_length() for n in seq.exponents])  # 2, 9 and 2049 bits

for entry in validate(seq).to_dict():
    print(entry)

# On the circle |z| = 4 the huge factor is exactly 2, everything else is moderate.
pv = eval_h(seq, 4.0)
print("log h(4) =", pv.log_abs, " vs ln17 + ln(1+2^256) + ln2 =",
      math.log(17) + 256 * math.log(2) + math.log(2))

# Just outside the circle the same factor explodes; the log modulus is itself
# an ExtReal with a binary exponent of about 2008.
pv = eval_h(seq, 4.0 * (1 + 2.0 ** -40))
print("log h(4(1+2^-40)) =", pv.log_abs)

# 1/h underflows any float but is still an ordinary ExtReal.
print("1/h =", ExtReal.exp(-pv.log_abs).approx())

# Ring points are stored as exact angles, so a pole with a 2048-bit index
# still makes the product vanish exactly.
nu = 3 ** 1200
p = pole_point(seq, 3, nu)
print("h at pole nu=3^1200 is zero:", eval_h(seq, p).is_zero)
