"""Experiment configuration: a YAML tree mapped onto small dataclasses.

Every validation failure raises ConfigError naming the dotted key and the
YAML line it came from.
"""

from dataclasses import asdict, dataclass, field, fields
import math
from typing import Optional

import numpy as np
import yaml

from .errors import ConfigError, KernelDomainError
from . import kernel as kn
from . import potential as pt
from .grid import Grid, TimeGrid
from .quadrature import QuadratureSpec

INITIAL_PROFILES = ("sine", "bump", "constant", "zero")
FORCING_PROFILES = ("constant", "sine", "bump", "zero")
POTENTIAL_PROFILES = ("quadratic", "absolute", "saturating", "zero")


@dataclass(frozen=True)
class DomainCfg:
    a: float = -1.0
    b: float = 1.0
    n: int = 128


@dataclass(frozen=True)
class TimeCfg:
    T: float = 0.5
    steps: int = 64


@dataclass(frozen=True)
class KernelCfg:
    family: str = "fractional"
    s: Optional[float] = 0.5
    profile: Optional[str] = None
    params: dict = field(default_factory=dict)
    rescale_epsilon: Optional[float] = None


@dataclass(frozen=True)
class QuadratureCfg:
    near_cut: int = 1
    far_radius: float = 100.0
    tol: float = 1e-12


@dataclass(frozen=True)
class PotentialCfg:
    profile: str = "quadratic"
    c: float = 1.0


@dataclass(frozen=True)
class ProfileCfg:
    profile: str = "sine"
    amplitude: float = 1.0


@dataclass(frozen=True)
class SolverCfg:
    tol: float = 1e-10
    max_iters: int = 50
    damping: float = 1.0
    theta: float = 1.0
    elliptic_tol: float = 1e-10


@dataclass(frozen=True)
class StudyCfg:
    s_list: tuple = (0.25, 0.5, 0.75)
    n_list: tuple = (64, 128, 256, 512)
    eps_list: tuple = (0.4, 0.2, 0.1)
    T_list: tuple = (0.25, 0.5, 1.0)
    diffusivity: float = 0.5


@dataclass(frozen=True)
class ExperimentConfig:
    domain: DomainCfg = field(default_factory=DomainCfg)
    time: TimeCfg = field(default_factory=TimeCfg)
    kernel: KernelCfg = field(default_factory=KernelCfg)
    quadrature: QuadratureCfg = field(default_factory=QuadratureCfg)
    potential: PotentialCfg = field(default_factory=PotentialCfg)
    initial: ProfileCfg = field(default_factory=ProfileCfg)
    forcing: ProfileCfg = field(default_factory=lambda: ProfileCfg("constant", 1.0))
    weight: ProfileCfg = field(default_factory=lambda: ProfileCfg("zero", 0.0))
    solver: SolverCfg = field(default_factory=SolverCfg)
    study: StudyCfg = field(default_factory=StudyCfg)
    output: str = "out"

    def echo(self):
        return asdict(self)

    # -- builders ----------------------------------------------------------

    def build_grid(self):
        return Grid(self.domain.a, self.domain.b, self.domain.n)

    def build_time(self):
        return TimeGrid(self.time.T, self.time.steps)

    def build_quad(self):
        q = self.quadrature
        return QuadratureSpec(near_cut=q.near_cut, far_radius=q.far_radius, tol=q.tol)

    def build_kernel(self, epsilon="config"):
        k = self.kernel
        if k.family == "fractional":
            base = kn.fractional(k.s)
        else:
            base = kn.BUILTIN_PROFILES[k.profile](**k.params)
        eps = k.rescale_epsilon if epsilon == "config" else epsilon
        if eps is not None:
            return kn.rescale(base, eps, self.build_quad())
        return base

    def build_potential(self):
        return pt.from_profile(self.potential.profile, self.potential.c)

    def build_initial(self, grid):
        return profile_function(grid, self.initial)

    def build_forcing(self, grid):
        return profile_function(grid, self.forcing)

    def build_weight(self, grid):
        return profile_function(grid, self.weight)


def profile_function(grid, cfg):
    x, a, b = grid.x, grid.a, grid.b
    L = b - a
    A = cfg.amplitude
    if cfg.profile == "sine":
        vals = A * np.sin(np.pi * (x - a) / L)
    elif cfg.profile == "bump":
        t = 2 * (x - a) / L - 1
        with np.errstate(divide="ignore", over="ignore"):
            vals = np.where(np.abs(t) < 1, A * np.exp(1 - 1 / np.maximum(1 - t**2, 1e-300)), 0.0)
    elif cfg.profile == "constant":
        vals = np.full(grid.n, float(A))
    elif cfg.profile == "zero":
        vals = np.zeros(grid.n)
    else:
        raise ValueError(f"unknown profile {cfg.profile!r}")
    return grid.function(vals)


# -- loading -------------------------------------------------------------------

def _line_map(node, prefix="", out=None):
    """Dotted key -> 1-based line number, from a composed YAML node tree."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = f"{prefix}.{k.value}" if prefix else str(k.value)
            out[key] = k.start_mark.line + 1
            _line_map(v, key, out)
    return out


class _Reader:
    def __init__(self, data, lines):
        self.data = data
        self.lines = lines

    def fail(self, key, msg):
        # missing keys fall back to the nearest enclosing section that has a line
        probe = key
        line = self.lines.get(probe)
        while line is None and "." in probe:
            probe = probe.rsplit(".", 1)[0]
            line = self.lines.get(probe)
        raise ConfigError(msg, key=key, line=line)

    def section(self, name, cls, casts):
        raw = self.data.get(name, {})
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            self.fail(name, f"expected a mapping, got {type(raw).__name__}")
        known = {f.name for f in fields(cls)}
        for k in raw:
            if k not in known:
                self.fail(f"{name}.{k}", f"unknown key (allowed: {', '.join(sorted(known))})")
        kwargs = {}
        for k, v in raw.items():
            cast = casts.get(k)
            try:
                kwargs[k] = cast(v) if cast else v
            except (TypeError, ValueError) as exc:
                self.fail(f"{name}.{k}", f"bad value {v!r}: {exc}")
        return cls(**kwargs)


def _int(v):
    if isinstance(v, bool) or (isinstance(v, float) and not v.is_integer()):
        raise ValueError("expected an integer")
    return int(v)


def _float(v):
    if isinstance(v, bool):
        raise ValueError("expected a number")
    return float(v)


def _opt_float(v):
    return None if v is None else _float(v)


def _list(cast):
    def conv(v):
        if not isinstance(v, (list, tuple)):
            v = [v]
        return tuple(cast(x) for x in v)
    return conv


def loads(text, source="<string>"):
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"{source}: YAML syntax error: {getattr(exc, 'problem', exc)}",
                          line=mark.line + 1 if mark else None) from exc
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    lines = _line_map(node) if node is not None else {}
    r = _Reader(data, lines)

    top = {f.name for f in fields(ExperimentConfig)}
    for k in data:
        if k not in top:
            r.fail(str(k), f"unknown section (allowed: {', '.join(sorted(top))})")

    cfg = ExperimentConfig(
        domain=r.section("domain", DomainCfg, {"a": _float, "b": _float, "n": _int}),
        time=r.section("time", TimeCfg, {"T": _float, "steps": _int}),
        kernel=r.section("kernel", KernelCfg, {"s": _opt_float, "rescale_epsilon": _opt_float,
                                               "params": lambda v: dict(v or {})}),
        quadrature=r.section("quadrature", QuadratureCfg,
                             {"near_cut": _int, "far_radius": _float, "tol": _float}),
        potential=r.section("potential", PotentialCfg, {"c": _float}),
        initial=r.section("initial", ProfileCfg, {"amplitude": _float}),
        forcing=(r.section("forcing", ProfileCfg, {"amplitude": _float})
                 if "forcing" in data else ProfileCfg("constant", 1.0)),
        weight=(r.section("weight", ProfileCfg, {"amplitude": _float})
                if "weight" in data else ProfileCfg("zero", 0.0)),
        solver=r.section("solver", SolverCfg, {"tol": _float, "max_iters": _int, "damping": _float,
                                               "theta": _float, "elliptic_tol": _float}),
        study=r.section("study", StudyCfg, {"s_list": _list(_float), "n_list": _list(_int),
                                            "eps_list": _list(_float), "T_list": _list(_float),
                                            "diffusivity": _float}),
        output=str(data.get("output", "out")),
    )
    validate(cfg, r)
    return cfg


def load(path):
    with open(path) as fh:
        return loads(fh.read(), source=str(path))


def validate(cfg, r):
    d = cfg.domain
    if not d.a < d.b:
        r.fail("domain.b", f"need a < b, got a={d.a}, b={d.b}")
    if d.n < 2:
        r.fail("domain.n", f"need at least 2 interior nodes, got {d.n}")
    if not cfg.time.T > 0:
        r.fail("time.T", "must be positive")
    if cfg.time.steps < 1:
        r.fail("time.steps", "must be at least 1")

    k = cfg.kernel
    if k.family == "fractional":
        if k.s is None or not 0 < k.s < 1:
            r.fail("kernel.s", f"fractional order must lie in (0, 1), got {k.s}")
    elif k.family == "general":
        if k.profile not in kn.BUILTIN_PROFILES:
            r.fail("kernel.profile", f"unknown kernel profile {k.profile!r} "
                                     f"(known: {', '.join(sorted(kn.BUILTIN_PROFILES))})")
        try:
            kn.BUILTIN_PROFILES[k.profile](**k.params)
        except (TypeError, KernelDomainError) as exc:
            r.fail("kernel.params", str(exc))
    else:
        r.fail("kernel.family", f"must be 'fractional' or 'general', got {k.family!r}")
    if k.rescale_epsilon is not None and not 0 < k.rescale_epsilon <= 1:
        r.fail("kernel.rescale_epsilon", f"must lie in (0, 1], got {k.rescale_epsilon}")

    q = cfg.quadrature
    if q.near_cut < 1:
        r.fail("quadrature.near_cut", "must be a positive integer")
    if not q.far_radius > d.b - d.a:
        r.fail("quadrature.far_radius", f"must exceed the domain diameter {d.b - d.a}")
    if not q.tol > 0:
        r.fail("quadrature.tol", "must be positive")

    if cfg.potential.profile not in POTENTIAL_PROFILES:
        r.fail("potential.profile", f"unknown potential {cfg.potential.profile!r} "
                                    f"(known: {', '.join(POTENTIAL_PROFILES)})")
    if not cfg.potential.c >= 0:
        r.fail("potential.c", "scale must be nonnegative")
    for name in ("initial", "forcing"):
        if getattr(cfg, name).profile not in INITIAL_PROFILES:
            r.fail(f"{name}.profile", f"unknown profile {getattr(cfg, name).profile!r} "
                                      f"(known: {', '.join(INITIAL_PROFILES)})")
    if cfg.weight.profile not in ("zero", "constant", "bump", "sine"):
        r.fail("weight.profile", f"unknown profile {cfg.weight.profile!r}")
    if cfg.weight.amplitude < 0:
        r.fail("weight.amplitude", "weight must be nonnegative")

    s = cfg.solver
    for key in ("tol", "elliptic_tol"):
        if not getattr(s, key) > 0:
            r.fail(f"solver.{key}", "tolerance must be positive")
    if s.max_iters < 1:
        r.fail("solver.max_iters", "must be at least 1")
    if not 0 < s.damping <= 1:
        r.fail("solver.damping", f"must lie in (0, 1], got {s.damping}")
    if not 0.5 <= s.theta <= 1:
        r.fail("solver.theta", f"must lie in [0.5, 1], got {s.theta}")

    st = cfg.study
    for i, sv in enumerate(st.s_list):
        if not 0 < sv < 1:
            r.fail("study.s_list", f"entry {i} = {sv} is outside (0, 1)")
    for i, nv in enumerate(st.n_list):
        if nv < 2:
            r.fail("study.n_list", f"entry {i} = {nv} is below 2")
    for i, ev in enumerate(st.eps_list):
        if not 0 < ev <= 1:
            r.fail("study.eps_list", f"entry {i} = {ev} is outside (0, 1]")
    for i, tv in enumerate(st.T_list):
        if not tv > 0:
            r.fail("study.T_list", f"entry {i} = {tv} must be positive")
    if not st.diffusivity > 0:
        r.fail("study.diffusivity", "must be positive")
