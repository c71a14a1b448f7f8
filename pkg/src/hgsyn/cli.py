"""Command-line front end: `hg <subcommand> [flags]`.

Every subcommand prints JSON with sorted keys, so identical inputs give
byte-identical output.  Flags override values read from `--config FILE`
(one `key = value` per line, `#` comments allowed).
"""

import argparse
import json
import random
import sys
from fractions import Fraction

from .errors import HgsynError, NonOrdinary
from .padic_core import PadicScalar, PrimeContext, unramified_ring
from .series import SigmaLift, TruncSeries

COMMON_KEYS = ("p", "N", "M", "L", "a", "n", "alpha", "zeta1", "zeta2", "r")
DEFAULTS = {"p": 7, "M": 12, "L": 60, "a": 1, "r": 1, "zeta1": 0, "zeta2": 1}


class ConfigError(HgsynError, ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


def read_config_file(path):
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _int(name, value):
    try:
        return int(str(value).strip())
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {value!r}") from None


def _residue(name, value):
    """A residue class: an integer, or comma-separated coordinates."""
    text = str(value).strip()
    if "," in text:
        return tuple(_int(name, c) for c in text.split(","))
    return _int(name, text)


def _rational(name, value):
    try:
        return Fraction(str(value).strip())
    except ValueError:
        raise ConfigError(f"{name} must be a rational number, got {value!r}") from None


class RunConfig:
    """Merged configuration (defaults < config file < flags), validated up front."""

    def __init__(self, values):
        self.raw = dict(values)
        v = {**DEFAULTS, **{k: x for k, x in values.items() if x is not None}}
        self.p = _int("p", v["p"])
        if values.get("N") is None:
            # only the prime was given: use the largest of N = 3, 2 it supports
            v["N"] = 3 if (self.p - 1) % 3 == 0 else 2
        self.N = _int("N", v["N"])
        self.M = _int("M", v["M"])
        self.L = _int("L", v["L"])
        self.r = _int("r", v["r"])
        self.a = _int("a", v["a"])
        self.n = None if v.get("n") is None else _int("n", v["n"])
        self.alpha = None if v.get("alpha") is None else _residue("alpha", v["alpha"])
        self.zeta1 = _int("zeta1", v["zeta1"])
        self.zeta2 = _int("zeta2", v["zeta2"])
        self.extra = {k: x for k, x in v.items() if k not in COMMON_KEYS}
        self.validate()

    def validate(self):
        try:
            self.ctx = PrimeContext(self.p, self.N, self.M)
        except HgsynError as exc:
            raise ConfigError(str(exc)) from None
        if (self.a - 1) % self.p:
            raise ConfigError(f"lift parameter a={self.a} is not 1 mod p")
        if self.L < 8:
            raise ConfigError("L must be at least 8")
        if self.n is not None and not 1 <= self.n <= self.N - 1:
            raise ConfigError(f"n must lie in 1..{self.N - 1}")
        if self.r < 1:
            raise ConfigError("r must be positive")
        if (self.zeta1 - self.zeta2) % self.N == 0:
            raise ConfigError("zeta1 and zeta2 must name different roots of unity")

    def lift(self, ring):
        return SigmaLift(ring(self.a))

    def as_json(self):
        return {"p": self.p, "N": self.N, "M": self.M, "L": self.L, "a": self.a, "r": self.r,
                "n": self.n, "alpha": _jsonify(self.alpha), "zeta1": self.zeta1,
                "zeta2": self.zeta2}


# ---------------------------------------------------------------------------
# output


def _jsonify(obj):
    if isinstance(obj, (PadicScalar, TruncSeries)):
        return obj.to_json()
    if hasattr(obj, "to_json") and callable(obj.to_json):
        return _jsonify(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    if hasattr(obj, "item"):
        return obj.item()
    return str(obj)


def dumps(obj):
    return json.dumps(_jsonify(obj), sort_keys=True, indent=2)


def _summary_lines(obj, prefix=""):
    """Flat `key: value` text for the non-JSON mode."""
    if isinstance(obj, dict):
        if set(obj) == {"value", "prec", "d", "coeffs"}:
            yield f"{prefix}: {obj['value']} + O(p^{obj['prec']})"
            return
        for k in sorted(obj):
            yield from _summary_lines(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and len(obj) > 6:
        yield f"{prefix}: [{len(obj)} entries]"
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _summary_lines(v, f"{prefix}[{i}]")
    else:
        yield f"{prefix}: {obj}"


def emit(obj, as_json, stream=None):
    stream = stream or sys.stdout
    if as_json:
        stream.write(dumps(obj) + "\n")
    else:
        for line in _summary_lines(_jsonify(obj)):
            stream.write(line + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_polylog(cfg, args):
    from .hg_functions import build_polylog, polylog_limit_oracle

    if args.z is None:
        raise ConfigError("--z is required")
    p = cfg.p
    r = _int("r", args.order if args.order is not None else cfg.r)
    fn = build_polylog(p, r, cfg.M)
    ring = fn.ring
    z = _int("z", args.z)
    z = ring.teichmuller(z % p) if args.teichmuller else ring(z)
    if args.method == "limit":
        s = _int("s", args.s)
        value = polylog_limit_oracle(r, z, s)
        return {"value": value, "prec": value.prec, "method": "limit", "terms": p ** s}
    value = fn(z)
    return {"value": value, "prec": value.prec, "method": "x-expansion", "terms": fn.terms}


def cmd_frobenius_matrix(cfg, args):
    from .frobenius_structure import eigen_component, working_ring

    ns = [cfg.n] if cfg.n else list(range(1, cfg.N))
    ring = working_ring(cfg.ctx)
    out = {}
    for n in ns:
        comp = eigen_component(cfg.ctx, n, lift=cfg.lift(ring), L=cfg.L)
        out[str(n)] = {k: comp.entries[k] for k in ("F11", "F12", "F21", "F22")}
    return {"p": cfg.p, "N": cfg.N, "a": cfg.a, "L": cfg.L, "entries": out}


def _point(cfg, value, name="alpha"):
    if value is None:
        raise ConfigError(f"--{name} is required")
    ring = unramified_ring(cfg.p, cfg.r, cfg.M)
    if cfg.r == 1:
        if isinstance(value, tuple):
            raise ConfigError(f"{name} needs a single coordinate when r = 1")
        residue = value % cfg.p
    else:
        if not isinstance(value, tuple) or len(value) != cfg.r:
            raise ConfigError(f"{name} needs r={cfg.r} comma-separated coordinates")
        residue = tuple(c % cfg.p for c in value)
    if cfg.a != 1:
        if cfg.r != 1:
            raise ConfigError("a lift a != 1 is only supported over Z_p")
        return SigmaLift(ring(cfg.a)).compatible_point(residue, ring)
    return ring.teichmuller(residue)


def cmd_unit_root(cfg, args):
    from .frobenius_structure import dwork_unit_root, is_ordinary

    digits = _int("digits", args.digits)
    alpha = _point(cfg, cfg.alpha)
    lift = None if cfg.a == 1 else SigmaLift(unramified_ring(cfg.p, 1, cfg.M)(cfg.a))
    ns = [cfg.n] if cfg.n else list(range(1, cfg.N))
    out = {}
    for n in ns:
        ordinary = is_ordinary(cfg.ctx, n, alpha)
        entry = {"ordinary": ordinary, "unit_root": None, "prec": None}
        if ordinary:
            u = dwork_unit_root(cfg.ctx, n, alpha, r=cfg.r, lift=lift, digits=digits)
            entry.update({"unit_root": u, "prec": u.prec})
        out[str(n)] = entry
    return {"p": cfg.p, "N": cfg.N, "r": cfg.r, "alpha": cfg.alpha, "components": out}


def cmd_verify_unit_root(cfg, args):
    from .point_count_oracle import CurveInstance, verify_unit_root, zeta_crossfoot

    lam = args.lam if args.lam is not None else cfg.alpha
    if lam is None:
        raise ConfigError("--lambda is required")
    lam = _residue("lambda", lam)
    curve = CurveInstance(cfg.p, cfg.N, cfg.r, lam, M=cfg.M)
    alpha = _point(cfg, lam, "lambda")
    digits = _int("digits", args.digits)
    ns = [cfg.n] if cfg.n else list(range(1, cfg.N))
    reports = {}
    for n in ns:
        try:
            reports[str(n)] = verify_unit_root(curve, n, alpha, digits=digits)
        except NonOrdinary:
            reports[str(n)] = {"n": n, "ordinary_points": False, "ordinary_dwork": False,
                               "match": None}
    cross = {str(k): {"bruteforce": b, "predicted": pr, "agree": ok}
             for k, (b, pr, ok) in zeta_crossfoot(curve).items()}
    return {"p": cfg.p, "N": cfg.N, "r": cfg.r, "lambda": lam, "q": curve.q,
            "components": reports, "zeta_crossfoot": cross}


def cmd_regulator_series(cfg, args):
    from .frobenius_structure import working_ring
    from .regulator_series import SymbolChoice, regulator_bundles, regulator_series_at

    ring = working_ring(cfg.ctx)
    bundles = regulator_bundles(cfg.ctx, lift=cfg.lift(ring), L=cfg.L)
    symbol = SymbolChoice.from_indices(ring, cfg.N, cfg.zeta1, cfg.zeta2)
    weighted = regulator_series_at(bundles, symbol)
    out = {}
    for b in bundles:
        entry = b.to_json()
        entry["symbol"] = _jsonify(weighted[b.n])
        out[str(b.n)] = entry
    return {"p": cfg.p, "N": cfg.N, "a": cfg.a, "L": cfg.L, "zeta1": cfg.zeta1,
            "zeta2": cfg.zeta2, "bundles": out}


def cmd_coleman(cfg, args):
    from .regulator_series import coleman_solve, synthetic_frobenius_values

    alpha = _point(cfg, cfg.alpha)
    ring = alpha.ring
    eps = [ring(_rational("eps1", args.eps1)), ring(_rational("eps2", args.eps2))]
    given = [args.F11, args.F12, args.F21, args.F22]
    if all(x is not None for x in given):
        F = {k: ring(_rational(k, x)) for k, x in zip(("F11", "F12", "F21", "F22"), given)}
        source = "given"
    elif any(x is not None for x in given):
        raise ConfigError("give all four of --F11 --F12 --F21 --F22 or none")
    else:
        F = synthetic_frobenius_values(alpha, random.Random(_int("seed", args.seed)), r=cfg.r)
        source = f"synthetic(seed={args.seed})"
    res = coleman_solve(alpha, F, eps, r=cfg.r, method=args.method)
    out = res.to_json()
    out.update({"frobenius_values": F, "frobenius_source": source, "n": cfg.n})
    return out


def cmd_fiber_regulator(cfg, args):
    from .fiber_oracle import FIBER_GUARD, fiber_regulator

    if cfg.alpha is None or isinstance(cfg.alpha, tuple):
        raise ConfigError("--alpha must be a single residue class")
    Mf = _int("M", args.fiber_M) if args.fiber_M is not None else 6
    vec = fiber_regulator(cfg.p, cfg.N, cfg.alpha, cfg.zeta1, cfg.zeta2, a=cfg.a, M=Mf,
                          guard=_int("guard", args.guard or FIBER_GUARD), order=args.order,
                          strict=not args.non_strict)
    return vec.to_json()


def cmd_selfcheck(cfg, args):
    from .selfcheck import run_selfcheck

    return run_selfcheck(cfg, mutate_kappa=_int("mutate_kappa", args.mutate_kappa),
                         fiber=args.fiber)


COMMANDS = {
    "polylog": cmd_polylog,
    "frobenius-matrix": cmd_frobenius_matrix,
    "unit-root": cmd_unit_root,
    "verify-unit-root": cmd_verify_unit_root,
    "regulator-series": cmd_regulator_series,
    "coleman": cmd_coleman,
    "fiber-regulator": cmd_fiber_regulator,
    "selfcheck": cmd_selfcheck,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    for key in COMMON_KEYS:
        common.add_argument(f"--{key}", default=None)
    common.add_argument("--json", action="store_true", help="print JSON (default: key: value lines)")
    common.add_argument("--config", default=None, help="key = value file; flags win")

    parser = argparse.ArgumentParser(prog="hg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("polylog", parents=[common], help="ln_r at a point")
    sp.add_argument("--z", default=None)
    sp.add_argument("--order", default=None, help="polylog order (defaults to --r)")
    sp.add_argument("--method", choices=("x-expansion", "limit"), default="x-expansion")
    sp.add_argument("--s", default="4", help="limit approximant index")
    sp.add_argument("--teichmuller", action="store_true", help="Teichmueller-lift z first")

    sub.add_parser("frobenius-matrix", parents=[common], help="F_ij series of one component")

    sp = sub.add_parser("unit-root", parents=[common], help="Dwork unit root at alpha")
    sp.add_argument("--digits", default="4")

    sp = sub.add_parser("verify-unit-root", parents=[common], help="point counts vs Dwork")
    sp.add_argument("--lambda", dest="lam", default=None)
    sp.add_argument("--digits", default="4")

    sub.add_parser("regulator-series", parents=[common], help="E_i and eps_i series")

    sp = sub.add_parser("coleman", parents=[common], help="Coleman fixed-point solve")
    sp.add_argument("--eps1", default="0")
    sp.add_argument("--eps2", default="0")
    for k in ("F11", "F12", "F21", "F22"):
        sp.add_argument(f"--{k}", default=None)
    sp.add_argument("--seed", default="0")
    sp.add_argument("--method", choices=("direct", "series"), default=None)

    sp = sub.add_parser("fiber-regulator", parents=[common], help="fiberwise regulator class")
    sp.add_argument("--order", choices=("h1h2", "h2h1"), default="h1h2")
    sp.add_argument("--fiber-M", dest="fiber_M", default=None, help="fiber precision (default 6)")
    sp.add_argument("--guard", default=None)
    sp.add_argument("--non-strict", action="store_true", help="report residues instead of failing")

    sp = sub.add_parser("selfcheck", parents=[common], help="run the invariant suite")
    sp.add_argument("--mutate-kappa", dest="mutate_kappa", default="0",
                    help="shift the first kappa form by this multiple of p")
    sp.add_argument("--fiber", action="store_true", help="include the fiber oracle checks")
    return parser


def load_config(args):
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key in COMMON_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return RunConfig(values)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
    except (ConfigError, OSError) as exc:
        sys.stderr.write(f"hg: invalid configuration: {exc}\n")
        return 2
    try:
        result = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        sys.stderr.write(f"hg: invalid configuration: {exc}\n")
        return 2
    except HgsynError as exc:
        sys.stderr.write(f"hg: {type(exc).__name__}: {exc}\n")
        return 1
    emit(result, args.json)
    if args.command == "selfcheck":
        return 0 if result["passed"] else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
