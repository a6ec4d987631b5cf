"""Suite orchestration, the basin renderer, JSON configuration and report/image formats."""

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction

import numpy as np

from . import _kernel
from .construction import (
    ParameterSequence,
    Verdict,
    growth_check,
    pole_residual,
    random_pole_indices,
    validate,
)
from .errors import ConfigInvalid, IoFailure, WindowOutOfRange
from .hyperbolic import DensityConstants, obstruction_certificate
from .newton import (
    CLASS_CODES,
    Classification,
    NewtonMap,
    consistency_points,
    orbit,
    quadrature_consistency,
    real_descent_check,
)
from .numerics import ExtReal

SCHEMA = "baker-scope/1"

PRESETS = {
    "relaxed-A": ParameterSequence((1, 2, 4), (2, 4, 8), parity=True),
    "strict-3": ParameterSequence((1, 2, 4), (2, 256, 2 ** 2048), parity=True),
}

SUITES = ("conditions", "growth", "poles", "descent", "certificate", "quadrature")

# exponents given as {"base": b, "exp": e} may not exceed this many bits
MAX_EXPONENT_BITS = 1 << 20

DEFAULT_PALETTE = {
    Classification.CONVERGED.value: (20, 40, 150),
    Classification.ESCAPED.value: (200, 30, 30),
    Classification.POLE_HIT.value: (255, 255, 255),
    Classification.BUDGET.value: (0, 0, 0),
}


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteConfig:
    radii: tuple
    exponents: tuple
    parity: bool = True
    preset: str = None
    mode: str = "f"
    suites: tuple = SUITES
    growth_samples: int = 256
    pole_samples: int = 20
    descent_samples: int = 101
    certificate_samples: int = 64
    quadrature_points: int = 50
    eval_eps: float = 1e-15
    quad_tol: float = 1e-12
    fd_rel_tol: float = 1e-6
    pole_tol_bits: int = 200
    prec: int = 256
    require_strict: bool = False
    window: tuple = (-8.0, 8.0, -8.0, 8.0)
    width: int = 800
    height: int = 800
    max_iter: int = 1000
    escape_radius: float = None
    conv_eps: float = 1e-12
    density_C: float = 4.38
    palette: dict = None
    workers: int = None
    report_path: str = None
    image_path: str = None

    def sequence(self):
        return ParameterSequence(self.radii, self.exponents, self.parity)

    def newton_map(self):
        return NewtonMap(self.mode, self.sequence(), self.eval_eps, self.prec)

    def to_dict(self):
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["radii"] = [str(r) for r in self.radii]
        d["exponents"] = [_exponent_to_json(n) for n in self.exponents]
        d["suites"] = list(self.suites)
        d["window"] = list(self.window)
        if self.palette is not None:
            d["palette"] = {k: list(v) for k, v in sorted(self.palette.items())}
        return d

    def content_dict(self):
        """Everything that affects results; worker count and output paths do not."""
        d = self.to_dict()
        for key in ("workers", "report_path", "image_path"):
            d.pop(key)
        return d

    def hash(self):
        blob = json.dumps(self.content_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def seed(self):
        return int(self.hash()[:16], 16)

    def escape(self):
        if self.escape_radius is not None:
            return self.escape_radius
        return 2.0 * float(self.radii[-1])


def _exponent_to_json(n):
    if n > 1 << 64 and n & (n - 1) == 0:
        return {"base": 2, "exp": n.bit_length() - 1}
    return str(n)


def _parse_exponent(v):
    if isinstance(v, bool):
        raise ValueError(f"not an exponent: {v!r}")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        return int(v.strip())
    if isinstance(v, dict):
        if set(v) != {"base", "exp"}:
            raise ValueError("power form needs exactly the keys 'base' and 'exp'")
        b, e = int(v["base"]), int(v["exp"])
        if b < 1 or e < 0:
            raise ValueError("power form needs base >= 1 and exp >= 0")
        if e * max(b.bit_length() - 1, 0) > MAX_EXPONENT_BITS:
            raise ValueError(f"{b}^{e} exceeds {MAX_EXPONENT_BITS} bits")
        return b ** e
    raise ValueError(f"not an exponent: {v!r}")


def _parse_radius(v):
    if isinstance(v, bool):
        raise ValueError(f"not a radius: {v!r}")
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(v)


_INT_FIELDS = ("growth_samples", "pole_samples", "descent_samples", "certificate_samples",
               "quadrature_points", "pole_tol_bits", "prec", "width", "height", "max_iter")
_POS_FLOAT_FIELDS = ("eval_eps", "quad_tol", "fd_rel_tol", "conv_eps", "density_C")


def config_from_dict(data):
    """Build a SuiteConfig, collecting every field-level problem into one ConfigInvalid."""
    if not isinstance(data, dict):
        raise ConfigInvalid("configuration must be a JSON object")
    known = {f.name for f in fields(SuiteConfig)}
    errors = {k: "unknown field" for k in data if k not in known}
    kw = {}

    preset = data.get("preset")
    explicit = "radii" in data or "exponents" in data
    if preset is not None and explicit:
        errors["preset"] = "give either a preset or radii/exponents, not both"
    elif explicit:
        try:
            kw["radii"] = tuple(_parse_radius(r) for r in data.get("radii", []))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            errors["radii"] = str(exc)
        try:
            kw["exponents"] = tuple(_parse_exponent(n) for n in data.get("exponents", []))
        except (TypeError, ValueError) as exc:
            errors["exponents"] = str(exc)
    else:
        name = "relaxed-A" if preset is None else preset
        if name not in PRESETS:
            errors["preset"] = f"unknown preset {name!r} (known: {', '.join(PRESETS)})"
        else:
            kw["radii"], kw["exponents"] = PRESETS[name].radii, PRESETS[name].exponents
            kw["preset"] = name
    kw["parity"] = data.get("parity", True)
    if not isinstance(kw["parity"], bool):
        errors["parity"] = "must be true or false"

    if "radii" in kw and "exponents" in kw and "radii" not in errors:
        try:
            ParameterSequence(kw["radii"], kw["exponents"], kw["parity"] is True)
        except ValueError as exc:
            errors["sequence"] = str(exc)

    mode = data.get("mode", "f")
    if mode not in ("f", "g"):
        errors["mode"] = "must be 'f' or 'g'"
    kw["mode"] = mode

    suites = data.get("suites", list(SUITES))
    if not isinstance(suites, (list, tuple)) or any(s not in SUITES for s in suites):
        errors["suites"] = f"must be a list drawn from {list(SUITES)}"
    else:
        kw["suites"] = tuple(s for s in SUITES if s in suites)

    for name in _INT_FIELDS:
        if name in data:
            v = data[name]
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                errors[name] = "must be a positive integer"
            else:
                kw[name] = v
    for name in _POS_FLOAT_FIELDS:
        if name in data:
            v = data[name]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not (0 < v < math.inf):
                errors[name] = "must be a positive number"
            else:
                kw[name] = float(v)
    if "require_strict" in data:
        if not isinstance(data["require_strict"], bool):
            errors["require_strict"] = "must be true or false"
        else:
            kw["require_strict"] = data["require_strict"]

    if "window" in data:
        w = data["window"]
        try:
            w = tuple(float(x) for x in w)
            if len(w) != 4 or not all(math.isfinite(x) for x in w):
                raise ValueError
            if not (w[0] < w[1] and w[2] < w[3]):
                errors["window"] = "needs xmin < xmax and ymin < ymax"
            kw["window"] = w
        except (TypeError, ValueError):
            errors["window"] = "must be four finite numbers [xmin, xmax, ymin, ymax]"
    if data.get("escape_radius") is not None:
        v = data["escape_radius"]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not (0 < v < math.inf):
            errors["escape_radius"] = "must be a positive number"
        else:
            kw["escape_radius"] = float(v)
    if data.get("workers") is not None:
        v = data["workers"]
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            errors["workers"] = "must be a positive integer"
        else:
            kw["workers"] = v
    if data.get("palette") is not None:
        try:
            kw["palette"] = _parse_palette(data["palette"])
        except ValueError as exc:
            errors["palette"] = str(exc)
    for name in ("report_path", "image_path"):
        if data.get(name) is not None:
            if not isinstance(data[name], str):
                errors[name] = "must be a path string"
            else:
                kw[name] = data[name]

    if errors:
        raise ConfigInvalid(errors)
    return SuiteConfig(**kw)


def _parse_palette(p):
    if not isinstance(p, dict):
        raise ValueError("palette must map classification names to [r, g, b]")
    out = {}
    for name, rgb in p.items():
        if name not in DEFAULT_PALETTE:
            raise ValueError(f"unknown classification {name!r}")
        if (not isinstance(rgb, (list, tuple)) or len(rgb) != 3
                or not all(isinstance(c, int) and 0 <= c <= 255 for c in rgb)):
            raise ValueError(f"colour for {name} must be three integers in 0..255")
        out[name] = tuple(rgb)
    return out


def load_config(source=None, overrides=None):
    """Config from a JSON file path, a dict, or nothing (defaults), plus overrides."""
    if source is None:
        data = {}
    elif isinstance(source, dict):
        data = dict(source)
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigInvalid({"config": f"cannot read {source}: {exc}"}) from exc
        except json.JSONDecodeError as exc:
            raise ConfigInvalid({"config": f"invalid JSON: {exc}"}) from exc
    if overrides:
        if not isinstance(data, dict):
            raise ConfigInvalid("configuration must be a JSON object")
        if "radii" in overrides or "exponents" in overrides:
            data.pop("preset", None)
        if "preset" in overrides:
            data.pop("radii", None)
            data.pop("exponents", None)
        data.update(overrides)
    return config_from_dict(data)


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, ExtReal):
        return obj.to_json()
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, int) and not isinstance(obj, bool) and abs(obj) >= 1 << 53:
        return str(obj)
    return obj


@dataclass
class CertificateReport:
    """JSON-native report document; ExtReal values appear as {"m", "e2", "approx"}."""

    data: dict

    @property
    def passed(self):
        return self.data["passed"]

    @property
    def checks(self):
        return self.data["checks"]

    def to_json(self):
        return json.dumps(self.data, sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        return cls(data)

    def write(self, path):
        _write_bytes(path, self.to_json().encode())


def _write_bytes(path, blob):
    try:
        with open(path, "wb") as fh:
            fh.write(blob)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _status(passed, vacuous=False):
    if vacuous:
        return "vacuous"
    return "pass" if passed else "fail"


def _check_conditions(cfg, seq):
    rep = validate(seq)
    verdicts = [v for e in rep.entries for v in (e.c0, e.c1, e.c2, e.c3) if v is not None]
    undetermined = any(v.value == "undetermined" for v in verdicts)
    regime = "strict" if rep.all_hold() else "relaxed"
    if undetermined:
        status = "fail"
    elif rep.all_hold():
        status = "pass"
    else:
        # a relaxed sequence is reported as such, not counted as a failure
        status = "fail" if cfg.require_strict else "vacuous"
    return {"status": status, "regime": regime, "entries": rep.to_dict(),
            "failures": [list(f) for f in rep.failures()]}


def _check_growth(cfg, seq):
    if seq.K < 3:
        return {"status": "vacuous", "reason": "growth bound needs k >= 3", "entries": []}
    entries = [growth_check(seq, k, cfg.growth_samples, cfg.eval_eps, cfg.prec)
               for k in range(3, seq.K + 1)]
    return {"status": _status(all(e.passed for e in entries)),
            "entries": [e.to_dict() for e in entries]}


def _check_poles(cfg, seq):
    tol = ExtReal.pow2(-cfg.pole_tol_bits)
    entries = []
    for k in range(1, seq.K + 1):
        n = seq.n(k)
        worst, worst_nu = None, None
        for nu in random_pole_indices(n, cfg.pole_samples, cfg.seed() + k):
            res = ExtReal.from_mpf(pole_residual(seq, k, nu, cfg.prec), rounding="ceil")
            if worst is None or res > worst:
                worst, worst_nu = res, nu
        entries.append({"k": k, "max_residual": worst, "worst_nu": str(worst_nu),
                        "passed": worst <= tol})
    return {"status": _status(all(e["passed"] for e in entries)), "tolerance": tol,
            "entries": entries}


def _check_descent(cfg, seq):
    if cfg.mode != "g":
        return {"status": "vacuous", "reason": "descent applies to g-mode"}
    edge = cfg.escape()
    xs = np.linspace(-edge, edge, cfg.descent_samples)
    rep = real_descent_check(cfg.newton_map(), xs)
    return {"status": _status(rep.passed), **rep.to_dict()}


def _check_certificate(cfg, seq):
    nmap = cfg.newton_map()
    consts = DensityConstants(cfg.density_C)
    entries = [obstruction_certificate(nmap, k, cfg.certificate_samples, cfg.seed() + k, consts,
                                       cfg.prec)
               for k in range(2, seq.K + 1)]
    conditions = validate(seq)
    ok = True
    out = []
    for i, e in enumerate(entries):
        d = e.to_dict()
        d.pop("samples")
        # the bounds are only claimed where the growth conditions hold up to k
        d["applicable"] = all(v in (None, Verdict.HOLDS) for entry in conditions.entries[:e.k]
                              for v in (entry.c0, entry.c1, entry.c2, entry.c3))
        # the certified value should grow with k once the bounds are meaningful
        d["exceeds_previous"] = (None if i == 0 or e.vacuous
                                 else bool(e.min_value > entries[i - 1].max_value))
        entry_ok = e.passed and d["exceeds_previous"] is not False
        d["status"] = _status(entry_ok, (e.vacuous and e.passed) or not d["applicable"])
        ok = ok and (entry_ok or not d["applicable"])
        out.append(d)
    if not entries:
        return {"status": "vacuous", "reason": "certificate needs k >= 2", "entries": []}
    return {"status": _status(ok), "entries": out}


def _check_quadrature(cfg, seq):
    pts = consistency_points(seq, cfg.quadrature_points, cfg.seed())
    rep = quadrature_consistency(seq, pts, cfg.quad_tol, cfg.fd_rel_tol)
    return {"status": _status(rep.passed), **rep.to_dict()}


_CHECKS = {
    "conditions": _check_conditions,
    "growth": _check_growth,
    "poles": _check_poles,
    "descent": _check_descent,
    "certificate": _check_certificate,
    "quadrature": _check_quadrature,
}


def run_suite(cfg):
    """Run the selected checks; deterministic given the config.

    Checks run one after another: mpmath keeps its working precision in
    process-global state, so they cannot safely share threads.
    """
    if not isinstance(cfg, SuiteConfig):
        cfg = load_config(cfg)
    seq = cfg.sequence()
    checks = {name: _jsonable(_CHECKS[name](cfg, seq)) for name in cfg.suites}
    passed = all(c["status"] in ("pass", "vacuous") for c in checks.values())
    data = {
        "schema": SCHEMA,
        "config_hash": cfg.hash(),
        "config": _jsonable(cfg.content_dict()),
        "mode": cfg.mode,
        "passed": passed,
        "checks": checks,
    }
    return CertificateReport(data)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


@dataclass
class BasinImage:
    classes: np.ndarray
    steps: np.ndarray
    max_iter: int
    mode: str
    window: tuple
    config_hash: str
    palette: dict = field(default_factory=dict)

    @property
    def width(self):
        return self.classes.shape[1]

    @property
    def height(self):
        return self.classes.shape[0]

    def classification(self, i, j):
        return CLASS_CODES[self.classes[i, j]]


def pixel_axes(cfg):
    """Sample coordinates: column j at xmin + (xmax - xmin) j / width, row i likewise from ymax.

    Samples sit on a corner-anchored lattice, so with an even height and a
    symmetric window one row lies exactly on the real axis.
    """
    xmin, xmax, ymin, ymax = cfg.window
    xs = xmin + (xmax - xmin) * np.arange(cfg.width, dtype=np.float64) / cfg.width
    ys = ymax - (ymax - ymin) * np.arange(cfg.height, dtype=np.float64) / cfg.height
    return xs, ys


def pixel_point(cfg, i, j):
    xs, ys = pixel_axes(cfg)
    return complex(xs[j], ys[i])


def _check_window(cfg):
    edge = cfg.escape()
    if max(abs(x) for x in cfg.window) > edge:
        raise WindowOutOfRange(f"window {cfg.window} leaves the escape box |x|, |y| <= {edge:g}")


def _default_workers():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover
        return os.cpu_count() or 1


ROW_BLOCK = 16


def render(cfg, workers=None):
    """Classification and step count for every pixel sample of the window."""
    _check_window(cfg)
    nmap = cfg.newton_map()
    xs, ys = pixel_axes(cfg)
    classes = np.empty((cfg.height, cfg.width), dtype=np.int8)
    steps = np.empty((cfg.height, cfg.width), dtype=np.int64)
    escape = float(cfg.escape())
    if nmap.direct:
        workers = workers or cfg.workers or _default_workers()
        blocks = [(a, min(a + ROW_BLOCK, cfg.height)) for a in range(0, cfg.height, ROW_BLOCK)]

        def work(block):
            a, b = block
            _kernel.render_block(xs, ys[a:b], nmap._radii, nmap._exps, nmap.gmode,
                                 cfg.max_iter, escape, cfg.conv_eps, classes[a:b], steps[a:b])

        if workers == 1:
            for blk in blocks:
                work(blk)
        else:
            # each block writes a disjoint slice, so the result does not depend on scheduling
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(work, blocks))
    else:
        for i, y in enumerate(ys):
            for j, x in enumerate(xs):
                rec = orbit(nmap, complex(x, y), cfg.max_iter, escape, cfg.conv_eps, 0, 0)
                classes[i, j] = CLASS_CODES.index(rec.classification)
                steps[i, j] = rec.steps
    palette = dict(DEFAULT_PALETTE)
    palette.update(cfg.palette or {})
    return BasinImage(classes, steps, cfg.max_iter, cfg.mode, tuple(cfg.window), cfg.hash(),
                      palette)


def ppm_bytes(image, palette=None):
    """Binary P6 stream; green gains floor(255 steps / max_iter), clipped at 255."""
    pal = dict(DEFAULT_PALETTE)
    pal.update(image.palette or {})
    pal.update(palette or {})
    table = np.array([pal[c.value] for c in CLASS_CODES], dtype=np.int64)
    rgb = table[image.classes.astype(np.int64)]
    shade = (255 * image.steps.astype(np.int64)) // image.max_iter
    rgb[..., 1] = np.minimum(255, rgb[..., 1] + shade)
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + rgb.astype(np.uint8).tobytes()


def write_ppm(image, palette=None, out=None):
    """PPM bytes for ``image``; also written to ``out`` (a path or binary file) if given."""
    blob = ppm_bytes(image, palette)
    if out is not None:
        if isinstance(out, (str, os.PathLike)):
            _write_bytes(out, blob)
        else:
            try:
                out.write(blob)
            except (OSError, ValueError) as exc:
                raise IoFailure(f"cannot write PPM stream: {exc}") from exc
    return blob


def with_overrides(cfg, **changes):
    """Copy of ``cfg`` with fields replaced, re-validated through the dict form."""
    d = cfg.to_dict()
    if "radii" in changes or "exponents" in changes:
        d.pop("preset", None)
    d.update(changes)
    d = {k: v for k, v in d.items() if v is not None}
    if d.get("preset") is not None:
        d.pop("radii", None)
        d.pop("exponents", None)
    return config_from_dict(d)


__all__ = [
    "SCHEMA", "PRESETS", "SUITES", "DEFAULT_PALETTE", "SuiteConfig", "config_from_dict",
    "load_config", "CertificateReport", "run_suite", "BasinImage", "pixel_axes", "pixel_point",
    "render", "ppm_bytes", "write_ppm", "with_overrides",
]
