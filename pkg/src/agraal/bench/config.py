"""Experiment configuration in a flat ``section.key = value`` text format.

Example::

    # Nash-Cournot, scenario a
    problem.family = nash
    problem.n = 50
    problem.scenario = a
    problem.seeds = 0-9
    method.names = agraal, fbf
    stop.tol = 1e-6
    stop.max_iters = 20000

Lines starting with ``#`` and trailing ``# ...`` are comments. Lists are
comma separated; seed lists also accept inclusive ranges such as ``0-9``.
The environment variable ``AGRAAL_OUTPUT_DIR`` overrides ``output.dir``.
"""

import os
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from typing import Optional

from ..errors import ConfigError
from ..solvers import ADAPTIVE_METHODS, FIXED_POINT_METHODS, METHODS, StepsizeRule

OUTPUT_DIR_ENV = "AGRAAL_OUTPUT_DIR"

FAMILIES = ("nash", "balls-cfp", "linear-cfp", "logistic", "nonmonotone", "bilinear-saddle")
FIXED_POINT_FAMILIES = ("balls-cfp", "linear-cfp")
# families whose problems declare a Lipschitz constant / a smooth energy
LIPSCHITZ_FAMILIES = ("logistic", "bilinear-saddle")
ENERGY_FAMILIES = ("logistic",)

FAMILY_PARAMS = {
    "nash": "n (firms), scenario (a|b)",
    "balls-cfp": "n (dimension), m (balls)",
    "linear-cfp": "n (unknowns), m (equations), noise_std, density",
    "logistic": "m (samples), n (features), gamma | data (LIBSVM file)",
    "nonmonotone": "n (dimension)",
    "bilinear-saddle": "n (K is n x n)",
}
FAMILY_DESCRIPTIONS = {
    "nash": "Nash-Cournot oligopoly equilibrium, nonnegative supplies",
    "balls-cfp": "feasibility of m random balls, simultaneous projection operator",
    "linear-cfp": "hyperplane feasibility of a sparse noisy linear system",
    "logistic": "l1-regularized logistic regression, synthetic or LIBSVM data",
    "nonmonotone": "nonmonotone equation M(z) z = 0 (Minty condition only)",
    "bilinear-saddle": "min_x max_y <Kx, y> with Gaussian K",
}


@dataclass(frozen=True)
class ProblemSpec:
    family: str
    n: int
    m: Optional[int] = None
    scenario: Optional[str] = None
    seeds: tuple = (0,)
    noise_std: float = 1.0
    density: float = 0.05
    gamma: Optional[float] = None
    data: Optional[str] = None


@dataclass(frozen=True)
class MethodSpec:
    names: tuple
    phi: float = 1.5
    lam_max: float = 1e7
    delta: float = 1.0
    metric_m: Optional[tuple] = None
    metric_p: Optional[tuple] = None
    fbf_nu: float = 0.9
    fbf_shrink: float = 0.5
    fbf_grow: float = 1.0
    lam: Optional[float] = None
    lam0: Optional[float] = None
    residual_lambda: float = 1.0

    @property
    def rule(self):
        return StepsizeRule(phi=self.phi, lam_max=self.lam_max, delta=self.delta)


@dataclass(frozen=True)
class StopSpec:
    """``tol`` decides success; runs stop on ``residual_tol`` when given, else on ``tol``.

    For the logistic family ``tol`` bounds the energy gap ``J - J*`` and
    ``residual_tol`` the natural residual.
    """

    tol: float = 1e-6
    max_iters: Optional[int] = 10_000
    max_fevals: Optional[int] = None
    max_seconds: Optional[float] = None
    residual_tol: Optional[float] = None


@dataclass(frozen=True)
class OutputSpec:
    dir: str = "results"
    log_every: int = 0
    energy: bool = True
    timing: bool = False
    workers: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemSpec
    method: MethodSpec
    stop: StopSpec = field(default_factory=StopSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    name: str = "experiment"

    def with_seeds(self, seeds):
        return replace(self, problem=replace(self.problem, seeds=tuple(seeds)))

    def with_methods(self, names):
        return replace(self, method=replace(self.method, names=tuple(names)))

    def with_output(self, **kw):
        return replace(self, output=replace(self.output, **kw))


# ---------------------------------------------------------------- value parsing


def _int(path, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(path, f"expected an integer, got {text!r}") from None


def _float(path, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(path, f"expected a number, got {text!r}") from None


def _bool(path, text):
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(path, f"expected true or false, got {text!r}")


def _str(path, text):
    return text


def _names(path, text):
    items = tuple(s.strip() for s in text.split(",") if s.strip())
    if not items:
        raise ConfigError(path, "empty list")
    return items


def _floats(path, text):
    return tuple(_float(path, s) for s in _names(path, text))


def _seeds(path, text):
    seeds = []
    for item in _names(path, text):
        lo, sep, hi = item.partition("-")
        if sep and lo:
            a, b = _int(path, lo), _int(path, hi)
            if b < a:
                raise ConfigError(path, f"empty seed range {item!r}")
            seeds.extend(range(a, b + 1))
        else:
            seeds.append(_int(path, item))
    return tuple(seeds)


def _opt(parse):
    def inner(path, text):
        return None if text.lower() in ("none", "") else parse(path, text)

    return inner


SCHEMA = {
    "problem": (
        ProblemSpec,
        {
            "family": _str,
            "n": _int,
            "m": _opt(_int),
            "scenario": _opt(_str),
            "seeds": _seeds,
            "noise_std": _float,
            "density": _float,
            "gamma": _opt(_float),
            "data": _opt(_str),
        },
    ),
    "method": (
        MethodSpec,
        {
            "names": _names,
            "phi": _float,
            "lam_max": _float,
            "delta": _float,
            "metric_m": _opt(_floats),
            "metric_p": _opt(_floats),
            "fbf_nu": _float,
            "fbf_shrink": _float,
            "fbf_grow": _float,
            "lam": _opt(_float),
            "lam0": _opt(_float),
            "residual_lambda": _float,
        },
    ),
    "stop": (
        StopSpec,
        {
            "tol": _float,
            "max_iters": _opt(_int),
            "max_fevals": _opt(_int),
            "max_seconds": _opt(_float),
            "residual_tol": _opt(_float),
        },
    ),
    "output": (
        OutputSpec,
        {"dir": _str, "log_every": _int, "energy": _bool, "timing": _bool, "workers": _int},
    ),
}
REQUIRED = ("problem.family", "problem.n", "method.names")


def parse_config(text, name="experiment", env=None):
    """Parse and validate configuration text; raises :class:`ConfigError`."""
    values = {section: {} for section in SCHEMA}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ConfigError(f"line {lineno}", f"expected 'section.key = value', got {raw.strip()!r}")
        section, dot, item = key.partition(".")
        if not dot or section not in SCHEMA:
            raise ConfigError(key, "unknown section")
        parsers = SCHEMA[section][1]
        if item not in parsers:
            raise ConfigError(key, "unknown key")
        if item in values[section]:
            raise ConfigError(key, f"duplicate key (line {lineno})")
        values[section][item] = parsers[item](key, value)
    for path in REQUIRED:
        section, item = path.split(".")
        if item not in values[section]:
            raise ConfigError(path, "required key missing")

    env = os.environ if env is None else env
    if env.get(OUTPUT_DIR_ENV):
        values["output"]["dir"] = env[OUTPUT_DIR_ENV]
    config = ExperimentConfig(
        problem=ProblemSpec(**values["problem"]),
        method=MethodSpec(**values["method"]),
        stop=StopSpec(**values["stop"]),
        output=OutputSpec(**values["output"]),
        name=name,
    )
    validate(config)
    return config


def load_config(path, env=None):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, name=os.path.splitext(os.path.basename(path))[0], env=env)


def preset_names():
    root = resources.files(__package__) / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_preset(name, env=None):
    """Load one of the shipped desk-scale presets by name (see :func:`preset_names`)."""
    if name not in preset_names():
        raise ConfigError("preset", f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    text = (resources.files(__package__) / "presets" / f"{name}.cfg").read_text(encoding="utf-8")
    return parse_config(text, name=name, env=env)


def format_config(config):
    """Inverse of :func:`parse_config` for the fields that differ from their defaults."""
    lines = []
    for section, (cls, parsers) in SCHEMA.items():
        spec = getattr(config, section)
        defaults = {f.name: f.default for f in fields(cls)}
        for key in parsers:
            value = getattr(spec, key)
            if f"{section}.{key}" not in REQUIRED and key != "seeds" and value == defaults.get(key):
                continue
            if isinstance(value, tuple):
                value = ", ".join(str(v) for v in value)
            elif isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{section}.{key} = {value}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- validation


def _positive(path, value, allow_none=False):
    if value is None and allow_none:
        return
    if value is None or not value > 0:
        raise ConfigError(path, f"must be positive, got {value}")


def validate(config: ExperimentConfig):
    p, m, s, o = config.problem, config.method, config.stop, config.output
    if p.family not in FAMILIES:
        raise ConfigError("problem.family", f"unknown family {p.family!r}; expected one of {', '.join(FAMILIES)}")
    if p.n < 1:
        raise ConfigError("problem.n", f"must be a positive integer, got {p.n}")
    if p.family in ("balls-cfp", "linear-cfp") or (p.family == "logistic" and p.data is None):
        if p.m is None or p.m < 1:
            raise ConfigError("problem.m", f"{p.family} needs a positive m")
    if p.family == "nash":
        if p.scenario not in ("a", "b"):
            raise ConfigError("problem.scenario", f"nash needs scenario a or b, got {p.scenario!r}")
    elif p.scenario is not None:
        raise ConfigError("problem.scenario", f"not a parameter of {p.family}")
    if p.data is not None and p.family != "logistic":
        raise ConfigError("problem.data", f"not a parameter of {p.family}")
    if p.gamma is not None and (p.family != "logistic" or p.gamma < 0):
        raise ConfigError("problem.gamma", "only for logistic, and must be nonnegative")
    if p.noise_std < 0:
        raise ConfigError("problem.noise_std", "must be nonnegative")
    if not 0 < p.density <= 1:
        raise ConfigError("problem.density", "must lie in (0, 1]")
    if not p.seeds:
        raise ConfigError("problem.seeds", "at least one seed is required")
    for seed in p.seeds:
        if not 0 <= seed < 2**64:
            raise ConfigError("problem.seeds", f"seed {seed} outside [0, 2^64)")

    fixed_point = p.family in FIXED_POINT_FAMILIES
    for name in m.names:
        if name not in METHODS:
            raise ConfigError("method.names", f"unknown method {name!r}; expected one of {', '.join(METHODS)}")
        if fixed_point != (name in FIXED_POINT_METHODS):
            kind = "fixed-point" if fixed_point else "variational-inequality"
            raise ConfigError("method.names", f"{name} cannot solve the {kind} family {p.family}")
        if name in ("pgm", "fista") and p.family not in ENERGY_FAMILIES:
            raise ConfigError("method.names", f"{name} needs a smooth energy and its Lipschitz constant")
        if name == "graal" and p.family not in LIPSCHITZ_FAMILIES and m.lam is None:
            raise ConfigError("method.names", "graal needs a Lipschitz constant or method.lam")
    if len(set(m.names)) != len(m.names):
        raise ConfigError("method.names", "duplicate method")
    try:
        m.rule
    except ValueError as exc:
        bad = "method.phi" if "phi" in str(exc) else "method.lam_max" if "lam_max" in str(exc) else "method.delta"
        raise ConfigError(bad, str(exc)) from None
    for key in ("metric_m", "metric_p"):
        weights = getattr(m, key)
        if weights is None:
            continue
        if "agraal-metric" not in m.names:
            raise ConfigError(f"method.{key}", "only used by agraal-metric")
        if len(weights) not in (1, p.n) or min(weights) <= 0:
            raise ConfigError(f"method.{key}", f"need 1 or n={p.n} positive weights")
    if not (0 < m.fbf_nu < 1 and 0 < m.fbf_shrink < 1 and m.fbf_grow >= 1):
        raise ConfigError("method.fbf_nu", "FBF needs 0 < nu < 1, 0 < shrink < 1 and grow >= 1")
    _positive("method.lam", m.lam, allow_none=True)
    _positive("method.lam0", m.lam0, allow_none=True)
    _positive("method.residual_lambda", m.residual_lambda)
    if m.delta != 1.0 and not any(n in ADAPTIVE_METHODS for n in m.names):
        raise ConfigError("method.delta", "only used by the adaptive methods")

    _positive("stop.tol", s.tol)
    _positive("stop.residual_tol", s.residual_tol, allow_none=True)
    if s.max_iters is not None and s.max_iters < 0:
        raise ConfigError("stop.max_iters", "must be nonnegative")
    _positive("stop.max_fevals", s.max_fevals, allow_none=True)
    _positive("stop.max_seconds", s.max_seconds, allow_none=True)
    if s.max_iters is None and s.max_fevals is None and s.max_seconds is None:
        raise ConfigError("stop.max_iters", "set at least one of max_iters, max_fevals, max_seconds")
    if o.log_every < 0:
        raise ConfigError("output.log_every", "must be nonnegative")
    if o.workers < 1:
        raise ConfigError("output.workers", "must be at least 1")
    if not o.dir:
        raise ConfigError("output.dir", "must not be empty")
    return config
