# Obstruction certificates and a small basin picture
#
# At a mid-arc point z_k of |z| = r_k the neighbouring poles a_k, b_k are
# 2 r_k sin(pi/n_k) apart, while N moves z_k by 1/|h(z_k)|.  After the affine
# map sending a_k, b_k to 0, 1 the image of z_k sits in D(1/2, 1/2) but the
# image of N(z_k) is enormous, and a density bound turns that into a
# hyperbolic distance.

import os
import tempfile

from baker_scope import (
    NewtonMap,
    generate_strict,
    load_config,
    obstruction_certificate,
    render,
    run_suite,
    write_ppm,
)

seq = generate_strict((1, 2, 4))
for k in (2, 3):
    cert = obstruction_certificate(NewtonMap("f", seq), k, samples=16)
    print(f"k={k}: bound {cert.bound.corrected.approx()}, certified min {cert.min_value.approx()},"
          f" distance witness {cert.min_witness:.4f}, passed {cert.passed}")

report = run_suite(load_config({"preset": "strict-3"}))
print("suite:", report.passed, {name: c["status"] for name, c in report.checks.items()})

# A coarse g-mode basin of the relaxed sequence; green brightens with step count.
cfg = load_config({"preset": "relaxed-A", "mode": "g", "width": 160, "height": 160,
                   "max_iter": 400})
image = render(cfg)
path = os.path.join(tempfile.gettempdir(), "basin_relaxed_g.ppm")
write_ppm(image, out=path)
print("wrote", path, "classes:", {c: int((image.classes == i).sum()) for i, c in
                                  enumerate(["converged", "escaped", "pole", "budget"])})
