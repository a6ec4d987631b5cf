"""Command line interface: check, eval, orbit, verify, certificate, render.

Exit codes: 0 pass, 1 a check failed, 2 usage or configuration error.
"""

import argparse
import json
import sys

from .construction import eval_h, validate
from .errors import BakerScopeError, ConfigInvalid, IoFailure, WindowOutOfRange
from .harness import (
    PRESETS,
    SUITES,
    load_config,
    render,
    run_suite,
    write_ppm,
)
from .hyperbolic import DensityConstants, obstruction_certificate
from .newton import CLASS_CODES, orbit
from .numerics import Point

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _exponent(text):
    text = text.strip()
    for sep in ("^", "**"):
        if sep in text:
            b, e = text.split(sep, 1)
            return {"base": int(b), "exp": int(e)}
    return text


def _complex(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _floats(n):
    def parse(text):
        parts = [float(p) for p in text.split(",")]
        if len(parts) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers")
        return parts
    return parse


def _common(p):
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="JSON configuration file")
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--radii", help="comma-separated radii, e.g. 1,2,4")
    g.add_argument("--exponents", help="comma-separated exponents, e.g. 2,256,2^2048")
    g.add_argument("--parity", dest="parity", action="store_true", default=None)
    g.add_argument("--no-parity", dest="parity", action="store_false")
    g.add_argument("--mode", choices=("f", "g"))
    g.add_argument("--prec", type=int, help="working precision in bits")
    g.add_argument("--out", help="output path (report or image)")


def _overrides(args):
    o = {}
    if args.preset:
        o["preset"] = args.preset
    if args.radii:
        o["radii"] = [r.strip() for r in args.radii.split(",")]
    if args.exponents:
        o["exponents"] = [_exponent(n) for n in args.exponents.split(",")]
    for name in ("parity", "mode", "prec"):
        if getattr(args, name) is not None:
            o[name] = getattr(args, name)
    for name, key in (("max_iter", "max_iter"), ("escape_radius", "escape_radius"),
                      ("conv_eps", "conv_eps"), ("width", "width"), ("height", "height"),
                      ("window", "window"), ("workers", "workers"),
                      ("growth_samples", "growth_samples"),
                      ("certificate_samples", "certificate_samples"),
                      ("density_c", "density_C")):
        v = getattr(args, name, None)
        if v is not None:
            o[key] = v
    if getattr(args, "suites", None):
        o["suites"] = [s.strip() for s in args.suites.split(",")]
    return o


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"
    if out:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoFailure(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _default(obj):
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return str(obj)


def cmd_check(cfg, args):
    rep = validate(cfg.sequence())
    _emit({"entries": rep.to_dict(), "all_hold": rep.all_hold(),
           "failures": [list(f) for f in rep.failures()]}, args.out)
    return EXIT_PASS if rep.all_hold() else EXIT_FAIL


def cmd_eval(cfg, args):
    pv = eval_h(cfg.sequence(), Point.from_complex(args.z), cfg.eval_eps, cfg.prec)
    out = {"z": args.z, "is_zero": pv.is_zero, "truncation_index": pv.truncation_index,
           "tail_log_bound": pv.tail_log_bound, "continuation_bound": pv.continuation_bound}
    if not pv.is_zero:
        out["log_abs"] = pv.log_abs
        out["arg"] = float(pv.value.argument.approx(64))
        try:
            out["value"] = pv.to_complex()
        except BakerScopeError:
            out["value"] = None
    _emit(out, args.out)
    return EXIT_PASS


def cmd_orbit(cfg, args):
    rec = orbit(cfg.newton_map(), args.z, cfg.max_iter, cfg.escape(), cfg.conv_eps)
    _emit({"seed": rec.seed, "classification": rec.classification.value, "steps": rec.steps,
           "final": rec.final, "pole": rec.pole, "escape_radius": rec.escape_radius,
           "trace_truncated": rec.truncated, "trace": rec.iterates}, args.out)
    return EXIT_PASS


def cmd_verify(cfg, args):
    report = run_suite(cfg)
    out = args.out or cfg.report_path
    if out:
        report.write(out)
    else:
        sys.stdout.write(report.to_json())
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_certificate(cfg, args):
    entry = obstruction_certificate(cfg.newton_map(), args.k, cfg.certificate_samples,
                                    cfg.seed() + args.k, DensityConstants(cfg.density_C),
                                    cfg.prec)
    d = entry.to_dict()
    if not args.samples_detail:
        d.pop("samples")
    _emit(d, args.out)
    return EXIT_PASS if entry.passed else EXIT_FAIL


def cmd_render(cfg, args):
    out = args.out or cfg.image_path
    if not out:
        raise ConfigInvalid({"out": "render needs --out or image_path"})
    image = render(cfg)
    write_ppm(image, out=out)
    counts = {c.value: int((image.classes == i).sum()) for i, c in enumerate(CLASS_CODES)}
    sys.stderr.write(json.dumps({"out": out, "config_hash": image.config_hash,
                                 "counts": counts}, sort_keys=True) + "\n")
    return EXIT_PASS


def build_parser():
    parser = argparse.ArgumentParser(prog="baker-scope",
                                     description="Newton maps of exp(int h) and their certificates")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate the growth conditions of a sequence")
    _common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", help="evaluate h at a point")
    _common(p)
    p.add_argument("--z", type=_complex, required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("orbit", help="iterate the Newton map from a seed")
    _common(p)
    p.add_argument("--z", type=_complex, required=True)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--escape-radius", type=float)
    p.add_argument("--conv-eps", type=float)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("verify", help="run the full verification suite")
    _common(p)
    p.add_argument("--suites", help=f"comma-separated subset of {','.join(SUITES)}")
    p.add_argument("--growth-samples", type=int)
    p.add_argument("--certificate-samples", type=int)
    p.add_argument("--density-c", type=float)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("certificate", help="obstruction certificate at one index k")
    _common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--certificate-samples", type=int)
    p.add_argument("--density-c", type=float)
    p.add_argument("--samples-detail", action="store_true", help="include every sample")
    p.set_defaults(func=cmd_certificate)

    p = sub.add_parser("render", help="render a basin image as binary PPM")
    _common(p)
    p.add_argument("--window", type=_floats(4), help="xmin,xmax,ymin,ymax")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--escape-radius", type=float)
    p.add_argument("--conv-eps", type=float)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args))
        return args.func(cfg, args)
    except (ConfigInvalid, WindowOutOfRange, IoFailure) as exc:
        sys.stderr.write(f"baker-scope: {exc}\n")
        return EXIT_USAGE
    except BakerScopeError as exc:
        sys.stderr.write(f"baker-scope: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


__all__ = ["main", "build_parser"]
