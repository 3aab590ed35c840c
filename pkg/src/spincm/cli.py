"""Command-line front end: ``spincm check | simulate | eval``.

Configuration comes from an optional JSON or YAML file (``--config``) whose
keys are the :class:`RunConfig` field names; command-line flags override file
values, and ``SPINCM_SEED`` supplies the seed when neither sets it. Complex
numbers may be written as ``"a+bi"`` strings or ``[re, im]`` pairs.

Exit codes: 0 success, 1 usage or configuration error, 2 a check failed,
3 singular configuration or trajectory.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import dynamics as dyn
from . import rmatrix as rm
from . import verify
from .algebra import parse_root_subset, root_label
from .errors import SingularApproach, SingularConfiguration, SpinCMError, StepError

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_SINGULAR = 0, 1, 2, 3
SEED_ENV = "SPINCM_SEED"
SUITE_NAMES = tuple(verify.SUITES) + ("all",)
WHAT = ("H", "L", "r", "spectral")


class ConfigError(Exception):
    """Invalid configuration; ``key`` names the offending field if known."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


# -- value parsing --------------------------------------------------------------------


def parse_complex(v) -> complex:
    """``3``, ``"1-2i"``, ``"0+1i"``, ``"-i"`` or ``[re, im]`` -> complex."""
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex pair must have two entries, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float, complex)) and not isinstance(v, bool):
        return complex(v)
    if not isinstance(v, str):
        raise ValueError(f"not a complex number: {v!r}")
    s = v.strip().replace(" ", "").lower().replace("i", "j")
    s = re.sub(r"(^|[+-])j", r"\g<1>1j", s)
    try:
        return complex(s)
    except ValueError:
        raise ValueError(f"not a complex number: {v!r}") from None


def format_complex(z) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}i"


def parse_vector(v):
    """List or comma-separated string of (possibly complex) numbers -> array."""
    if isinstance(v, str):
        v = [s for s in v.split(",") if s.strip()]
    arr = np.array([parse_complex(x) for x in v])
    return arr.real.copy() if np.all(arr.imag == 0) else arr


# -- configuration --------------------------------------------------------------------


@dataclass
class RunConfig:
    """Effective settings of one command invocation."""

    suite: str = "all"
    algebra: str | None = None
    family: str | None = None
    delta_prime: object = None
    pi_prime: object = None
    omega1: complex = 1.0
    omega2: complex = 1j
    samples: int = 100
    seed: int = 0
    negative_control: bool = False
    energy: str = "display"
    point: dict | None = None
    free: bool = False
    on_sigma: bool = True
    t_end: float = 10.0
    dt: float = 1e-3
    method: str = "rk4"
    output_every: int = 100
    spectral_z: list = field(default_factory=lambda: list(verify.SPECTRAL_Z))
    k_max: int = 3
    z: complex = 0.5 + 0.25j
    what: list = field(default_factory=lambda: list(WHAT))
    output: str | None = None
    format: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("omega1", "omega2", "z"):
            d[k] = format_complex(d[k])
        d["spectral_z"] = [format_complex(z) for z in self.spectral_z]
        if self.point is not None:
            d["point"] = {k: [float(np.real(x)) for x in v] for k, v in self.point.items()}
        return d

    # defaults that depend on the command
    def family_or(self, default="rational"):
        return self.family or default

    def algebra_or(self, default="A1"):
        return self.algebra or default


def _coerce(key, value):
    try:
        if key in ("omega1", "omega2", "z"):
            return parse_complex(value)
        if key == "spectral_z":
            return [parse_complex(z) for z in (value.split(",") if isinstance(value, str) else value)]
        if key in ("samples", "seed", "output_every", "k_max"):
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise ValueError(f"expected an integer, got {value!r}")
            return int(float(value))
        if key in ("t_end", "dt"):
            return float(value)
        if key in ("negative_control", "free", "on_sigma"):
            if isinstance(value, str):
                if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(f"expected a boolean, got {value!r}")
                return value.lower() in ("true", "1", "yes")
            return bool(value)
        if key == "point":
            if value is None:
                return None
            if not isinstance(value, dict) or set(value) != {"q", "p", "xi"}:
                raise ValueError("point needs exactly the keys q, p and xi")
            return {k: parse_vector(value[k]) for k in ("q", "p", "xi")}
        if key == "what":
            items = value.split(",") if isinstance(value, str) else list(value)
            items = [s.strip() for s in items if s.strip()]
            bad = [s for s in items if s not in WHAT]
            if bad:
                raise ValueError(f"unknown quantities {bad}; choose from {list(WHAT)}")
            return items
        if key in ("delta_prime", "pi_prime"):
            return value if value is None or isinstance(value, str) else [int(k) for k in value]
        if key == "suite" and value not in SUITE_NAMES:
            raise ValueError(f"unknown suite {value!r}; choose from {list(SUITE_NAMES)}")
        if key == "family" and value is not None and value not in rm.FAMILIES:
            raise ValueError(f"unknown family {value!r}; choose from {list(rm.FAMILIES)}")
        if key == "method" and value not in ("rk4", "dop853"):
            raise ValueError(f"unknown method {value!r}; choose rk4 or dop853")
        if key == "format" and value not in (None, "json", "csv"):
            raise ValueError(f"unknown format {value!r}; choose json or csv")
        if key == "energy" and value not in ("display", "contour"):
            raise ValueError(f"unknown energy {value!r}; choose display or contour")
        if key == "algebra" and value is not None:
            verify.parse_algebra(value)
        return value
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}", key) from None


def _line_of(text, key):
    pat = re.compile(rf'^\s*"?{re.escape(key)}"?\s*:', re.M)
    m = pat.search(text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def load_config_file(path):
    """Parse a JSON or YAML config file into a plain dict.

    Raises:
        ConfigError: with ``path:line`` context on syntax or schema errors.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    if path.endswith((".yaml", ".yml")):
        import yaml

        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f"{path}:{mark.line + 1}" if mark else path
            raise ConfigError(f"{where}: {getattr(exc, 'problem', exc)}") from None
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for k, v in data.items():
        line = _line_of(text, k)
        where = f"{path}:{line}" if line else path
        if k not in known:
            raise ConfigError(f"{where}: unknown key {k!r}")
        try:
            out[k] = _coerce(k, v)
        except ConfigError as exc:
            raise ConfigError(f"{where}: {exc}", k) from None
    return out


def build_config(file_values: dict, flag_values: dict, env=None) -> RunConfig:
    """Defaults < environment seed < config file < flags."""
    env = os.environ if env is None else env
    cfg = RunConfig()
    if SEED_ENV in env:
        cfg.seed = _coerce("seed", env[SEED_ENV])
    for k, v in file_values.items():
        setattr(cfg, k, v)
    for k, v in flag_values.items():
        setattr(cfg, k, _coerce(k, v))
    return cfg


# -- command helpers ------------------------------------------------------------------


def make_spec(cfg: RunConfig):
    family = cfg.family_or()
    algebra = cfg.algebra_or()
    rs = verify.representation(algebra).root_system
    if family == "rational":
        sub = parse_root_subset(rs, "all" if cfg.delta_prime is None else cfg.delta_prime)
    elif family == "trigonometric":
        sub = parse_root_subset(rs, "simple" if cfg.pi_prime is None else cfg.pi_prime)
    else:
        sub = ()
    return verify.make_spec(family, algebra, sub, cfg.omega1, cfg.omega2)


def initial_point(sys: dyn.SpinSystem, cfg: RunConfig) -> dyn.PhasePoint:
    if cfg.point is not None:
        try:
            x = sys.point(cfg.point["q"], cfg.point["p"], cfg.point["xi"])
        except ValueError as exc:
            raise ConfigError(f"point: {exc}", "point") from None
    else:
        x = dyn.random_point(sys, np.random.default_rng(cfg.seed), on_sigma=cfg.on_sigma)
    if cfg.free:
        x = x.replace(xi=np.zeros_like(x.xi))
    return x


def _cx(z):
    return [float(np.real(z)), float(np.imag(z))]


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _suite_config(cfg: RunConfig) -> verify.SuiteConfig:
    return verify.SuiteConfig(
        families=(cfg.family,) if cfg.family else rm.FAMILIES,
        algebras=(cfg.algebra,) if cfg.algebra else verify.SuiteConfig().algebras,
        samples=cfg.samples,
        seed=cfg.seed,
        delta_prime=None if cfg.delta_prime is None else (cfg.delta_prime,),
        pi_prime=None if cfg.pi_prime is None else (cfg.pi_prime,),
        omega1=cfg.omega1,
        omega2=cfg.omega2,
        negative_control=cfg.negative_control,
        t_end=cfg.t_end,
        dt=cfg.dt,
    )


# -- commands -------------------------------------------------------------------------


def cmd_check(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    scfg = _suite_config(cfg)
    names = list(verify.SUITES) if cfg.suite == "all" else [cfg.suite]
    reports = [verify.SUITES[name](scfg) for name in names]
    checks = [c for r in reports for c in r.checks]
    passed = all(r.passed for r in reports)
    doc = {
        "schema": verify.SCHEMA,
        "config": cfg.to_dict(),
        "suites": names,
        "pass": passed,
        "checks": [c.to_dict() for c in checks],
    }
    path = cfg.output or "report.json"
    _write(path, json.dumps(doc, indent=1, sort_keys=True))
    for r in reports:
        print(f"[{r.suite}]", file=out)
        print(r.table(), file=out)
    print(f"{'PASS' if passed else 'FAIL'}: {sum(c.passed for c in checks)}/{len(checks)} checks; report {path}", file=out)
    return EXIT_OK if passed else EXIT_FAIL


def _summary(sys, traj, out):
    last = traj.states[-1]
    print(f"t_final        {traj.times[-1]:.6g}", file=out)
    print(f"samples        {len(traj.times)}", file=out)
    print(f"energy drift   {traj.energy_drift():.3e}", file=out)
    print(f"momentum drift {traj.momentum_drift():.3e}", file=out)
    print(f"spectral drift {traj.spectral_drift():.3e}", file=out)
    print(f"on sigma       {dyn.sigma_membership(sys, traj.states[0], 1e-6)} -> {dyn.sigma_membership(sys, last, 1e-6)}", file=out)


def cmd_simulate(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    if not cfg.dt > 0:
        raise ConfigError(f"dt must be positive, got {cfg.dt}", "dt")
    if not cfg.t_end > 0:
        raise ConfigError(f"t_end must be positive, got {cfg.t_end}", "t_end")
    if cfg.output_every < 1:
        raise ConfigError("output_every must be at least 1", "output_every")
    sys_ = dyn.SpinSystem(make_spec(cfg), energy=cfg.energy)
    x0 = initial_point(sys_, cfg)
    status = EXIT_OK
    try:
        traj = dyn.integrate(
            sys_, x0, cfg.t_end, dt=cfg.dt, method=cfg.method, output_every=cfg.output_every,
            spectral_z=tuple(cfg.spectral_z), k_max=cfg.k_max,
        )
    except SingularApproach as exc:
        traj = exc.trajectory
        print(f"aborted: singular approach at t={exc.t:.6g}: {exc}", file=out)
        status = EXIT_SINGULAR
    traj.config = cfg.to_dict()
    if cfg.output:
        fmt = cfg.format or ("csv" if cfg.output.endswith(".csv") else "json")
        if fmt == "csv":
            text = "# config: " + json.dumps(traj.config, sort_keys=True) + "\n" + traj.to_csv()
        else:
            text = traj.to_json()
        _write(cfg.output, text)
    if traj.times:
        _summary(sys_, traj, out)
    return status


def cmd_eval(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    sys_ = dyn.SpinSystem(make_spec(cfg), energy=cfg.energy)
    x = initial_point(sys_, cfg)
    rs = sys_.spec.root_system
    doc = {"config": cfg.to_dict(), "point": {k: [float(np.real(v)) for v in getattr(x, k)] for k in ("q", "p", "xi")}}
    z = cfg.z
    if "H" in cfg.what:
        doc["H"] = _cx(dyn.hamiltonian(sys_, x))
    if "L" in cfg.what:
        doc["L"] = [[_cx(v) for v in row] for row in dyn.lax(sys_, x, z)]
    if "r" in cfg.what:
        c, phi = rm.coefficients(sys_.spec, x.q, z)
        doc["r"] = {
            "z": _cx(z),
            "cartan": _cx(c),
            "z_times_cartan": _cx(z * c),
            "roots": [
                {"index": k, "label": root_label(rs, k), "phi": _cx(phi[k]), "z_times_phi": _cx(z * phi[k])}
                for k in range(len(rs.roots))
            ],
        }
    if "spectral" in cfg.what:
        doc["spectral"] = [_cx(s) for s in dyn.spectral_invariants(sys_, x, z, cfg.k_max)]
    text = json.dumps(doc, indent=1, sort_keys=True)
    if cfg.output:
        _write(cfg.output, text)
    print(text, file=out)
    return EXIT_OK


COMMANDS = {"check": cmd_check, "simulate": cmd_simulate, "eval": cmd_eval}


# -- argument parsing -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = _Parser(add_help=False, argument_default=S)
    g = common.add_argument_group("system")
    g.add_argument("--config", help="JSON or YAML config file")
    g.add_argument("--algebra", help="algebra label, e.g. A1, A2, B2, C3, D4")
    g.add_argument("--family", choices=rm.FAMILIES)
    g.add_argument("--delta-prime", dest="delta_prime", help="rational subset: all, none, or tokens like '+-a1,a1+a2'")
    g.add_argument("--pi-prime", dest="pi_prime", help="trigonometric simple roots: simple, none, or 'a1,a2'")
    g.add_argument("--omega1", help="elliptic half-period (complex, e.g. 1)")
    g.add_argument("--omega2", help="elliptic half-period (complex, e.g. 0+1i)")
    g.add_argument("--seed", help=f"random seed (default from ${SEED_ENV}, else 0)")
    g.add_argument("--energy", choices=("display", "contour"), help="trigonometric Hamiltonian variant")
    g.add_argument("--output", "-o", help="output file")

    pt = _Parser(add_help=False, argument_default=S)
    h = pt.add_argument_group("phase point")
    h.add_argument("--q", dest="q", help="positions, comma separated")
    h.add_argument("--p", dest="p", help="momenta, comma separated")
    h.add_argument("--xi", dest="xi", help="spin coordinates, comma separated")
    h.add_argument("--free", action="store_const", const=True, help="set all spins to zero")
    h.add_argument("--off-sigma", dest="on_sigma", action="store_const", const=False,
                   help="do not project a random point onto the anomaly-free set")

    top = _Parser(prog="spincm", description="Spin Calogero-Moser systems: r-matrix checks, simulation and evaluation.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], argument_default=S, help="run verification suites")
    c.add_argument("--suite", choices=SUITE_NAMES)
    c.add_argument("--samples", help="samples per case")
    c.add_argument("--negative-control", dest="negative_control", action="store_const", const=True,
                   help="add a non-closed rational subset that must fail CDYBE")
    c.add_argument("--t-end", dest="t_end", help="conservation suite horizon")
    c.add_argument("--dt", help="conservation suite step")

    s = sub.add_parser("simulate", parents=[common, pt], argument_default=S, help="integrate a trajectory")
    s.add_argument("--t-end", dest="t_end")
    s.add_argument("--dt")
    s.add_argument("--method", choices=("rk4", "dop853"))
    s.add_argument("--output-every", dest="output_every")
    s.add_argument("--spectral-z", dest="spectral_z", help="comma separated complex sample points")
    s.add_argument("--k-max", dest="k_max")
    s.add_argument("--format", choices=("json", "csv"))

    e = sub.add_parser("eval", parents=[common, pt], argument_default=S, help="evaluate r, H, L, spectral invariants")
    e.add_argument("--z", help="spectral parameter (complex)")
    e.add_argument("--what", help=f"comma separated subset of {','.join(WHAT)}")
    e.add_argument("--k-max", dest="k_max")
    return top


def main(argv=None, env=None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    path = args.pop("config", None)
    point = {k: args.pop(k) for k in ("q", "p", "xi") if k in args}
    try:
        file_values = load_config_file(path) if path else {}
        if point:
            if set(point) != {"q", "p", "xi"}:
                raise ConfigError("--q, --p and --xi must be given together", "point")
            args["point"] = point
        cfg = build_config(file_values, args, env)
        return COMMANDS[command](cfg)
    except ConfigError as exc:
        print(f"spincm {command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SingularConfiguration as exc:
        print(f"spincm {command}: singular configuration: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except SingularApproach as exc:
        print(f"spincm {command}: singular approach at t={exc.t:.6g}: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (StepError, SpinCMError, ValueError) as exc:
        print(f"spincm {command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
