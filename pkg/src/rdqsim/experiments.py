"""Experiment configs, presets and the paired quantum/exact time-series runner.

Configs are INI text with three sections::

    [model]
    n_sites = 4
    boundary = periodic
    hopping = 1.0

    [run]
    initial = *ooo
    dt = 1/20
    t_max = 8
    sample_every = 2
    engine = both

    [observables]
    total_particles = true
    state_prob = *ooo, o*oo
    full_distribution = false

Numbers accept fractions (``1/80``). ``initial`` is a site pattern (``*``
occupied, ``o`` empty, site 0 leftmost) or a mixture ``w1:pat1;w2:pat2``.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence, TextIO

import numpy as np

from .encoding import decode, encode, particle_number
from .engine import SimState, compile_circuit, run_circuit
from .errors import ConfigError, DecodeError, ExtinctionError
from .hamiltonian import Boundary, Lattice1D, ModelSpec, ReactionKind, ReactionSpec, build_pauli
from .oracle import ProbabilityState, evolve_exact
from .synthesis import step_count, trotter_step

ENGINES = ("quantum", "oracle", "both")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off", ""}

KNOWN_KEYS = {
    "model": ("n_sites", "boundary", *(k.value for k in ReactionKind)),
    "run": ("initial", "dt", "t_max", "sample_every", "engine"),
    "observables": ("total_particles", "state_prob", "full_distribution"),
}


def pattern_index(pattern: str) -> int:
    """Basis index of a site pattern; an occupied site is a 0 bit."""
    if not pattern or set(pattern) - {"*", "o"}:
        raise ValueError(f"pattern {pattern!r} must be a non-empty string of '*' and 'o'")
    return int("".join("0" if c == "*" else "1" for c in pattern), 2)


def index_pattern(index: int, n_sites: int) -> str:
    bits = format(index, f"0{n_sites}b")
    return "".join("*" if b == "0" else "o" for b in bits)


def _number(text: str) -> float:
    return float(Fraction(text.strip()))


def _format_number(x: float) -> str:
    frac = Fraction(x).limit_denominator(10_000)
    if frac.denominator != 1 and float(frac) == x:
        return f"{frac.numerator}/{frac.denominator}"
    return repr(float(x))


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    initial: tuple[tuple[float, str], ...]
    dt: float
    t_max: float
    sample_every: int = 1
    engine: str = "both"
    total_particles: bool = True
    state_probs: tuple[str, ...] = ()
    full_distribution: bool = False

    def __post_init__(self) -> None:
        n = self.model.n_sites
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_max < 0:
            raise ValueError(f"t_max must be nonnegative, got {self.t_max}")
        if self.sample_every < 1:
            raise ValueError(f"sample_every must be >= 1, got {self.sample_every}")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if not self.initial:
            raise ValueError("initial distribution is empty")
        for w, pat in self.initial:
            pattern_index(pat)
            if len(pat) != n:
                raise ValueError(f"initial pattern {pat!r} does not have {n} sites")
            if w < 0:
                raise ValueError(f"negative mixture weight {w}")
        total = sum(w for w, _ in self.initial)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"mixture weights sum to {total!r}, not 1")
        for pat in self.state_probs:
            pattern_index(pat)
            if len(pat) != n:
                raise ValueError(f"state_prob pattern {pat!r} does not have {n} sites")
        if not (self.total_particles or self.state_probs or self.full_distribution):
            raise ValueError("no observables selected")

    def initial_state(self) -> ProbabilityState:
        probs = np.zeros(1 << self.model.n_sites)
        for w, pat in self.initial:
            probs[pattern_index(pat)] += w
        return ProbabilityState(probs / probs.sum(), self.model.n_sites)

    def observable_names(self) -> list[str]:
        names = ["n_total"] if self.total_particles else []
        names += [f"p({pat})" for pat in self.state_probs]
        if self.full_distribution:
            n = self.model.n_sites
            names += [f"p({index_pattern(i, n)})" for i in range(1 << n)]
        return names

    def columns(self) -> list[str]:
        cols = ["t"]
        if self.engine in ("quantum", "both"):
            cols.append("success_prob")
        for name in self.observable_names():
            if self.engine in ("quantum", "both"):
                cols.append(name)
            if self.engine in ("oracle", "both"):
                cols.append(f"{name}_oracle")
        return cols

    def to_ini(self) -> str:
        lat = self.model.lattice
        lines = ["[model]", f"n_sites = {lat.n_sites}", f"boundary = {lat.boundary.value}"]
        lines += [f"{r.kind.value} = {_format_number(r.rate)}" for r in self.model.reactions]
        if len(self.initial) == 1:
            initial = self.initial[0][1]
        else:
            initial = ";".join(f"{_format_number(w)}:{p}" for w, p in self.initial)
        lines += [
            "",
            "[run]",
            f"initial = {initial}",
            f"dt = {_format_number(self.dt)}",
            f"t_max = {_format_number(self.t_max)}",
            f"sample_every = {self.sample_every}",
            f"engine = {self.engine}",
            "",
            "[observables]",
            f"total_particles = {str(self.total_particles).lower()}",
            f"state_prob = {', '.join(self.state_probs)}",
            f"full_distribution = {str(self.full_distribution).lower()}",
        ]
        return "\n".join(lines) + "\n"


def _locate(text: str, section: str, key: str | None = None) -> int | None:
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if key is None and current == section:
                return lineno
        elif current == section and key is not None:
            name = line.split("=", 1)[0].split(":", 1)[0].strip().lower()
            if name == key:
                return lineno
    return None


def _read_parser(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("malformed config: text before the first [section]", exc.lineno) from exc
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError(f"malformed config: {exc.message.splitlines()[0]}", line) from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}", getattr(exc, "lineno", None)) from exc
    return parser


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _parse_initial(value: str) -> tuple[tuple[float, str], ...]:
    value = value.strip()
    if ":" not in value:
        return ((1.0, value),)
    parts = []
    for chunk in value.split(";"):
        if not chunk.strip():
            continue
        w, _, pat = chunk.partition(":")
        parts.append((_number(w), pat.strip()))
    return tuple(parts)


def config_from_parser(parser: configparser.ConfigParser, text: str = "") -> ExperimentConfig:
    for section in ("model", "run"):
        if not parser.has_section(section):
            raise ConfigError(f"missing [{section}] section")
    for section in parser.sections():
        if section not in KNOWN_KEYS:
            raise ConfigError(f"unknown section [{section}]", _locate(text, section))
        for key in parser[section]:
            if key not in KNOWN_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]", _locate(text, section, key))

    def get(section: str, key: str, convert, default=None, required: bool = False):
        if not parser.has_option(section, key):
            if required:
                raise ConfigError(f"missing {key!r} in [{section}]", _locate(text, section))
            return default
        try:
            return convert(parser.get(section, key))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad value for {section}.{key}: {exc}", _locate(text, section, key)) from exc

    n_sites = get("model", "n_sites", int, required=True)
    boundary = get("model", "boundary", lambda v: Boundary(v.strip().lower()), Boundary.PERIODIC)
    reactions = []
    for kind in ReactionKind:
        rate = get("model", kind.value, _number)
        if rate is not None:
            try:
                reactions.append(ReactionSpec(kind, rate))
            except ValueError as exc:
                raise ConfigError(str(exc), _locate(text, "model", kind.value)) from exc
    try:
        model = ModelSpec(Lattice1D(n_sites, boundary), tuple(reactions))
    except ValueError as exc:
        raise ConfigError(str(exc), _locate(text, "model", "n_sites")) from exc

    obs_present = parser.has_section("observables")
    kwargs = dict(
        model=model,
        initial=get("run", "initial", _parse_initial, required=True),
        dt=get("run", "dt", _number, required=True),
        t_max=get("run", "t_max", _number, required=True),
        sample_every=get("run", "sample_every", int, 1),
        engine=get("run", "engine", lambda v: v.strip().lower(), "both"),
        total_particles=get("observables", "total_particles", _parse_bool, True) if obs_present else True,
        state_probs=tuple(
            p.strip()
            for p in (get("observables", "state_prob", str, "") if obs_present else "").split(",")
            if p.strip()
        ),
        full_distribution=get("observables", "full_distribution", _parse_bool, False) if obs_present else False,
    )
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc), _locate(text, "run")) from exc


def apply_overrides(parser: configparser.ConfigParser, overrides: Sequence[str]) -> None:
    """Apply ``section.key=value`` (or unambiguous bare ``key=value``) overrides."""
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        section, _, name = key.strip().rpartition(".")
        name = name.lower()
        if not section:
            owners = [s for s, keys in KNOWN_KEYS.items() if name in keys]
            if len(owners) != 1:
                raise ConfigError(f"override key {name!r} is unknown or ambiguous")
            section = owners[0]
        if section not in KNOWN_KEYS or name not in KNOWN_KEYS[section]:
            raise ConfigError(f"override key {key!r} is not a config key")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, name, value.strip())


def parse_config(text: str, overrides: Sequence[str] = ()) -> ExperimentConfig:
    parser = _read_parser(text)
    apply_overrides(parser, overrides)
    return config_from_parser(parser, text)


def load_config(path: str, overrides: Sequence[str] = ()) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, overrides)


@dataclass(frozen=True)
class TimeSeriesRecord:
    t: float
    values: dict[str, float]
    log_success_prob: float | None = None

    @property
    def success_prob(self) -> float | None:
        return None if self.log_success_prob is None else math.exp(self.log_success_prob)


def _observe(config: ExperimentConfig, p: ProbabilityState) -> list[float]:
    out = [particle_number(p)] if config.total_particles else []
    out += [float(p.probs[pattern_index(pat)]) for pat in config.state_probs]
    if config.full_distribution:
        out += [float(x) for x in p.probs]
    return out


def sample_steps(config: ExperimentConfig) -> list[int]:
    n_steps = step_count(config.t_max, config.dt)
    steps = list(range(0, n_steps + 1, config.sample_every))
    if steps[-1] != n_steps:
        steps.append(n_steps)
    return steps


def run_experiment(config: ExperimentConfig) -> Iterator[TimeSeriesRecord]:
    """Yield one record per sample time.

    The quantum path encodes the initial distribution once, carries the
    statevector through repeated Trotter steps and decodes only at sample
    times; the oracle path propagates the exact generator to each sample time.
    """
    names = config.observable_names()
    p0 = config.initial_state()
    quantum = config.engine in ("quantum", "both")
    oracle = config.engine in ("oracle", "both")
    if quantum:
        ham = build_pauli(config.model)
        step = compile_circuit(trotter_step(ham, config.dt))
        state: SimState = encode(p0).state
    prev = 0
    for k in sample_steps(config):
        t = k * config.dt
        values: dict[str, float] = {}
        log_success = None
        if quantum:
            if k > prev:
                try:
                    state = run_circuit(step, state, repeat=k - prev)
                except ExtinctionError as exc:
                    exc.time = (prev + exc.pass_index + 1) * config.dt
                    exc.args = (f"trajectory died in the step ending at t={exc.time:g}: {exc}",)
                    raise
            try:
                decoded = decode(state)
            except DecodeError as exc:
                raise DecodeError(f"t={t:g}: {exc}") from exc
            values.update(zip(names, _observe(config, decoded)))
            log_success = state.log_success_prob
        if oracle:
            exact = evolve_exact(p0, config.model, t)
            values.update(zip((f"{n}_oracle" for n in names), _observe(config, exact)))
        prev = k
        yield TimeSeriesRecord(t, values, log_success)


def format_float(x: float) -> str:
    return "%.15g" % x


def format_log_prob(log_p: float) -> str:
    """Decimal rendering of ``exp(log_p)`` that stays positive below double range."""
    if log_p > -700.0:
        return format_float(math.exp(log_p))
    log10 = log_p / math.log(10.0)
    exponent = math.floor(log10)
    return f"{10.0 ** (log10 - exponent):.14f}e{exponent}"


def write_csv(config: ExperimentConfig, records: Iterator[TimeSeriesRecord], fh: TextIO) -> None:
    cols = config.columns()
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(cols)
    for rec in records:
        row = []
        for c in cols:
            if c == "t":
                row.append(format_float(rec.t))
            elif c == "success_prob":
                row.append(format_log_prob(rec.log_success_prob))
            else:
                row.append(format_float(rec.values[c]))
        writer.writerow(row)


def experiment_csv(config: ExperimentConfig) -> str:
    buf = io.StringIO()
    write_csv(config, run_experiment(config), buf)
    return buf.getvalue()


def parse_log_prob(text: str) -> float:
    """Natural log of a ``success_prob`` cell, exact even below double range."""
    mantissa, _, exponent = text.lower().partition("e")
    return math.log(float(mantissa)) + int(exponent or 0) * math.log(10.0)


def read_csv(text: str) -> dict[str, np.ndarray]:
    """Parse an experiment CSV back into float columns keyed by header.

    A ``success_prob`` column is also returned as ``log_success_prob``.
    """
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    out = {name: np.array([float(r[i]) for r in body]) for i, name in enumerate(header)}
    if "success_prob" in header:
        i = header.index("success_prob")
        out["log_success_prob"] = np.array([parse_log_prob(r[i]) for r in body])
    return out


# ---------------------------------------------------------------- presets


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    ini: str
    sweep_key: str | None = None
    sweep_values: tuple[str, ...] = field(default=())

    def jobs(self, overrides: Sequence[str] = ()) -> list[tuple[str, ExperimentConfig]]:
        """``(label, config)`` per sweep value; an override of the swept key collapses the sweep."""
        overridden = {o.partition("=")[0].strip() for o in overrides}
        if self.sweep_key is None or self.sweep_key in overridden or (
            self.sweep_key.split(".")[-1] in overridden
        ):
            return [(self.name, parse_config(self.ini, overrides))]
        out = []
        for value in self.sweep_values:
            label = f"{self.name}_{self.sweep_key.split('.')[-1]}={value}"
            out.append((label, parse_config(self.ini, [*overrides, f"{self.sweep_key}={value}"])))
        return out

    def describe(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "sweep": None
            if self.sweep_key is None
            else {"key": self.sweep_key, "values": list(self.sweep_values)},
            "config": self.ini,
        }


PRESETS: dict[str, Preset] = {
    p.name: p
    for p in (
        Preset(
            "single-site",
            "One site with decay (rate 1) competing with generation; mean occupation from an occupied start.",
            """\
[model]
n_sites = 1
boundary = periodic
decay = 1
generation = 1

[run]
initial = *
dt = 1/80
t_max = 5
sample_every = 4
engine = both

[observables]
total_particles = true
""",
            "model.generation",
            ("0.2", "1", "5"),
        ),
        Preset(
            "hopping",
            "Free hopping on 4 periodic sites from a single particle at site 0.",
            """\
[model]
n_sites = 4
boundary = periodic
hopping = 1

[run]
initial = *ooo
dt = 1/20
t_max = 8
sample_every = 2
engine = both

[observables]
total_particles = false
state_prob = *ooo, o*oo, oo*o, ooo*
""",
        ),
        Preset(
            "hopping-mixture",
            "Free hopping (D=0.6) on 4 periodic sites from a 2/3, 1/3 two-configuration mixture.",
            """\
[model]
n_sites = 4
boundary = periodic
hopping = 3/5

[run]
initial = 2/3:*ooo;1/3:o*oo
dt = 1/20
t_max = 8
sample_every = 2
engine = both

[observables]
total_particles = false
state_prob = *ooo, o*oo, oo*o, ooo*
""",
        ),
        Preset(
            "pair-annihilation-6",
            "Hopping plus pair annihilation on 6 fully occupied periodic sites; decays to empty.",
            """\
[model]
n_sites = 6
boundary = periodic
hopping = 1
pair_annihilation = 1

[run]
initial = ******
dt = 1/200
t_max = 10
sample_every = 20
engine = both

[observables]
total_particles = true
state_prob = ******, oooooo
""",
        ),
        Preset(
            "pair-annihilation-7",
            "Hopping plus pair annihilation on 7 fully occupied periodic sites; one particle survives.",
            """\
[model]
n_sites = 7
boundary = periodic
hopping = 1
pair_annihilation = 1

[run]
initial = *******
dt = 1/50
t_max = 8
sample_every = 5
engine = both

[observables]
total_particles = true
""",
        ),
        Preset(
            "dp",
            "Branching-decay-hopping (directed percolation) on 6 periodic sites from two adjacent particles, swept over the decay rate.",
            """\
[model]
n_sites = 6
boundary = periodic
hopping = 1
branching = 1
decay = 0.4

[run]
initial = **oooo
dt = 1/200
t_max = 40
sample_every = 100
engine = both

[observables]
total_particles = true
""",
            "model.decay",
            ("0.1", "0.2", "0.4", "1"),
        ),
    )
}


def list_presets() -> list[dict]:
    return [PRESETS[name].describe() for name in sorted(PRESETS)]


def run_jobs(configs: Sequence[ExperimentConfig], workers: int = 1) -> list[str]:
    """CSV text per config; independent jobs go to a process pool when ``workers > 1``."""
    if workers <= 1 or len(configs) <= 1:
        return [experiment_csv(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(experiment_csv, configs))
