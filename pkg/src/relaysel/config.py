"""Experiment configuration: TOML loading, validation and serialization.

A config file carries three sections::

    [network]   # link statistics: n_relays, sigma2, and rho or fd_td
    [sweep]     # grids and estimator settings
    [output]    # consistency gate, file prefix

Unknown keys anywhere are rejected by name, every network invariant is
enforced at load time, and ``load(save(load(x)))`` reproduces the loaded
spec exactly (defaults are materialized on save).
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field, fields

try:
    import tomllib as tomli
except ImportError:  # Python 3.10
    import tomli

from .model import Modulation, NetworkConfig, SnrPolicy, jakes_correlation

__all__ = [
    "ConfigError",
    "SweepSpec",
    "NetworkTemplate",
    "LoadedConfig",
    "load_config",
    "loads_config",
    "save_config",
    "dumps_config",
    "config_digest",
]

DEFAULT_TRIALS = 10_000_000  # resolves SER down to about 1e-5
DEFAULT_SEED = 12345

_METHODS = ("montecarlo", "analytic", "asymptotic")
_MODULATION_PRESETS = {"bpsk": (1.0, 2.0)}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class NetworkTemplate:
    """Link statistics independent of the sweep point.

    ``sigma2``/``rho`` are either scalars (applied to every link) or full
    ``(2, N)`` nested tuples; ``rho = None`` means the sweep's fd_td values
    set the correlation.
    """

    n_relays: int = 1
    sigma2: float | tuple = 1.0
    rho: float | tuple | None = None

    def config(self, n: int, fd_td: float | None, psi_s: float, psi_r: float) -> NetworkConfig:
        """Materialize a NetworkConfig for one sweep point."""
        if self.rho is not None:
            return NetworkConfig.create(n, sigma2=self.sigma2, rho=self.rho,
                                        psi_s=psi_s, psi_r=psi_r)
        return NetworkConfig.create(n, sigma2=self.sigma2, fd_td=fd_td or 0.0,
                                    psi_s=psi_s, psi_r=psi_r)


@dataclass(frozen=True)
class SweepSpec:
    """Validated sweep description (grids, methods, estimator settings)."""

    snr_db: tuple[float, float, float] = (0.0, 30.0, 5.0)  # start, stop, step
    fd_td_values: tuple[float, ...] | None = (0.0,)
    n_values: tuple[int, ...] = (1,)
    k_values: tuple[int, ...] = (1,)
    modulation: Modulation = field(default_factory=Modulation.bpsk)
    methods: tuple[str, ...] = _METHODS
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    snr_policy: SnrPolicy = SnrPolicy.EXACT
    snr_mode: str = "q_average"
    sources: tuple[int, ...] = (1,)
    chunk_size: int = 1 << 18
    workers: int | None = None
    consistency_gate: float | None = None
    prefix: str = "sweep"

    @property
    def snr_grid_db(self) -> tuple[float, ...]:
        start, stop, step = self.snr_db
        count = int((stop - start) / step + 1e-9) + 1
        return tuple(start + i * step for i in range(count))


@dataclass(frozen=True)
class LoadedConfig:
    sweep: SweepSpec
    network: NetworkTemplate


def _reject_unknown(section: dict, allowed: set[str], where: str):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' in [{where}]")


def _matrix_or_scalar(value, key: str):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, list):
        try:
            mat = tuple(tuple(float(x) for x in row) for row in value)
        except TypeError:
            raise ConfigError(f"'{key}' must be a number or a 2xN list of lists") from None
        if len(mat) != 2:
            raise ConfigError(f"'{key}' matrix must have exactly 2 rows")
        return mat
    raise ConfigError(f"'{key}' must be a number or a 2xN list of lists")


def _float_list(value, key: str) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"'{key}' must be a nonempty list")
    return tuple(float(x) for x in value)


def _int_list(value, key: str) -> tuple[int, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"'{key}' must be a nonempty list")
    out = []
    for x in value:
        if not isinstance(x, int) or isinstance(x, bool):
            raise ConfigError(f"'{key}' entries must be integers")
        out.append(x)
    return tuple(out)


def _parse_network(section: dict) -> NetworkTemplate:
    _reject_unknown(section, {"n_relays", "sigma2", "rho", "fd_td"}, "network")
    n = section.get("n_relays", 1)
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigError("'n_relays' must be an integer >= 1")
    sigma2 = _matrix_or_scalar(section.get("sigma2", 1.0), "sigma2")
    rho = None
    if "rho" in section and "fd_td" in section:
        raise ConfigError("give either 'rho' or 'fd_td' in [network], not both")
    if "rho" in section:
        rho = _matrix_or_scalar(section["rho"], "rho")
    elif "fd_td" in section:
        fd = float(section["fd_td"])
        if fd < 0:
            raise ConfigError("'fd_td' must be >= 0")
        rho = jakes_correlation(fd)
        if rho < 0:
            raise ConfigError(f"'fd_td' = {fd} drives the correlation negative; keep it below 0.3828")
    return NetworkTemplate(n_relays=n, sigma2=sigma2, rho=rho)


def _parse_modulation(value) -> Modulation:
    if isinstance(value, str):
        preset = _MODULATION_PRESETS.get(value.lower())
        if preset is None:
            raise ConfigError(f"unknown 'modulation' preset '{value}'")
        return Modulation(*preset)
    if isinstance(value, dict):
        _reject_unknown(value, {"alpha", "beta"}, "sweep.modulation")
        try:
            return Modulation(alpha=float(value["alpha"]), beta=float(value["beta"]))
        except KeyError as exc:
            raise ConfigError(f"'modulation' table needs key {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"'modulation': {exc}") from None
    raise ConfigError("'modulation' must be a preset name or an {alpha, beta} table")


def _parse_sweep(section: dict, network: NetworkTemplate) -> SweepSpec:
    allowed = {"snr_db", "fd_td_values", "n_values", "k_values", "modulation",
               "methods", "trials", "seed", "snr_policy", "snr_mode", "sources",
               "chunk_size", "workers"}
    _reject_unknown(section, allowed, "sweep")

    kwargs = {}
    if "snr_db" in section:
        grid = section["snr_db"]
        if not isinstance(grid, dict):
            raise ConfigError("'snr_db' must be a {start, stop, step} table")
        _reject_unknown(grid, {"start", "stop", "step"}, "sweep.snr_db")
        try:
            start, stop, step = (float(grid[k]) for k in ("start", "stop", "step"))
        except KeyError as exc:
            raise ConfigError(f"'snr_db' table needs key {exc}") from None
        if step <= 0:
            raise ConfigError("'snr_db.step' must be > 0")
        if stop < start:
            raise ConfigError("'snr_db.stop' must be >= 'snr_db.start'")
        kwargs["snr_db"] = (start, stop, step)

    if "fd_td_values" in section:
        if network.rho is not None:
            raise ConfigError("'fd_td_values' conflicts with [network] rho/fd_td")
        vals = _float_list(section["fd_td_values"], "fd_td_values")
        for fd in vals:
            if fd < 0:
                raise ConfigError("'fd_td_values' entries must be >= 0")
            if jakes_correlation(fd) < 0:
                raise ConfigError(f"'fd_td_values' entry {fd} drives the correlation negative")
        kwargs["fd_td_values"] = vals
    elif network.rho is not None:
        kwargs["fd_td_values"] = None

    if "n_values" in section:
        vals = _int_list(section["n_values"], "n_values")
        if any(n < 1 for n in vals):
            raise ConfigError("'n_values' entries must be >= 1")
        kwargs["n_values"] = vals
    else:
        kwargs["n_values"] = (network.n_relays,)

    if "k_values" in section:
        vals = _int_list(section["k_values"], "k_values")
        if any(k < 1 for k in vals):
            raise ConfigError("'k_values' entries must be >= 1")
        kwargs["k_values"] = vals

    if "modulation" in section:
        kwargs["modulation"] = _parse_modulation(section["modulation"])

    if "methods" in section:
        methods = section["methods"]
        if not isinstance(methods, list) or not methods:
            raise ConfigError("'methods' must be a nonempty list")
        for m in methods:
            if m not in _METHODS:
                raise ConfigError(f"unknown method '{m}' (expected one of {_METHODS})")
        kwargs["methods"] = tuple(dict.fromkeys(methods))

    if "trials" in section:
        trials = section["trials"]
        if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
            raise ConfigError("'trials' must be an integer >= 1")
        kwargs["trials"] = trials

    if "seed" in section:
        seed = section["seed"]
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise ConfigError("'seed' must be a nonnegative integer")
        kwargs["seed"] = seed

    if "snr_policy" in section:
        try:
            kwargs["snr_policy"] = SnrPolicy(section["snr_policy"])
        except ValueError:
            raise ConfigError("'snr_policy' must be 'exact' or 'upper_bound'") from None

    if "snr_mode" in section:
        mode = section["snr_mode"]
        if mode not in ("q_average", "symbol_detection"):
            raise ConfigError("'snr_mode' must be 'q_average' or 'symbol_detection'")
        kwargs["snr_mode"] = mode

    if "sources" in section:
        src = _int_list(section["sources"], "sources")
        if any(s not in (1, 2) for s in src):
            raise ConfigError("'sources' entries must be 1 or 2")
        kwargs["sources"] = src

    if "chunk_size" in section:
        cs = section["chunk_size"]
        if not isinstance(cs, int) or isinstance(cs, bool) or cs < 1:
            raise ConfigError("'chunk_size' must be an integer >= 1")
        kwargs["chunk_size"] = cs

    if "workers" in section:
        w = section["workers"]
        if not isinstance(w, int) or isinstance(w, bool) or w < 1:
            raise ConfigError("'workers' must be an integer >= 1")
        kwargs["workers"] = w

    return SweepSpec(**kwargs)


def _parse_output(section: dict, sweep: SweepSpec) -> SweepSpec:
    _reject_unknown(section, {"consistency_gate", "prefix"}, "output")
    updates = {}
    if "consistency_gate" in section:
        gate = float(section["consistency_gate"])
        if gate <= 0:
            raise ConfigError("'consistency_gate' must be > 0")
        updates["consistency_gate"] = gate
    if "prefix" in section:
        prefix = section["prefix"]
        if not isinstance(prefix, str) or not prefix:
            raise ConfigError("'prefix' must be a nonempty string")
        updates["prefix"] = prefix
    if updates:
        kept = {f.name: getattr(sweep, f.name) for f in fields(SweepSpec)}
        kept.update(updates)
        sweep = SweepSpec(**kept)
    return sweep


def loads_config(text: str) -> LoadedConfig:
    """Parse and validate a TOML config string."""
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    _reject_unknown(doc, {"network", "sweep", "output"}, "config root")
    network = _parse_network(doc.get("network", {}))
    sweep = _parse_sweep(doc.get("sweep", {}), network)
    sweep = _parse_output(doc.get("output", {}), sweep)

    # matrix-valued links only make sense for a single matching relay count
    for key in ("sigma2", "rho"):
        val = getattr(network, key)
        if isinstance(val, tuple):
            widths = {len(row) for row in val}
            bad = widths != {network.n_relays} or any(n != network.n_relays for n in sweep.n_values)
            if bad:
                raise ConfigError(
                    f"matrix '{key}' requires every swept n to equal n_relays={network.n_relays}")

    # enforce every NetworkConfig invariant now, for each swept combination
    fd_list = sweep.fd_td_values if sweep.fd_td_values is not None else (None,)
    psi0 = 10.0 ** (sweep.snr_grid_db[0] / 10.0)
    for n in sweep.n_values:
        for fd in fd_list:
            try:
                network.config(n, fd, psi0, psi0)
            except ValueError as exc:
                key = "rho" if "rho" in str(exc) else "network"
                raise ConfigError(f"invalid '{key}': {exc}") from exc
    for k in sweep.k_values:
        if k > max(sweep.n_values):
            raise ConfigError(
                f"'k_values' entry {k} exceeds every swept n in {sweep.n_values}")
    return LoadedConfig(sweep=sweep, network=network)


def load_config(path) -> LoadedConfig:
    """Load and validate a config file; see :func:`loads_config`."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    return loads_config(text)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int,)):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value)}")


def dumps_config(loaded: LoadedConfig) -> str:
    """Serialize with all defaults materialized; loads back identically."""
    net, sw = loaded.network, loaded.sweep
    lines = ["[network]", f"n_relays = {net.n_relays}", f"sigma2 = {_fmt(net.sigma2)}"]
    if net.rho is not None:
        lines.append(f"rho = {_fmt(net.rho)}")
    lines += ["", "[sweep]"]
    start, stop, step = sw.snr_db
    lines.append(f"snr_db = {{ start = {_fmt(start)}, stop = {_fmt(stop)}, step = {_fmt(step)} }}")
    if sw.fd_td_values is not None:
        lines.append(f"fd_td_values = {_fmt(sw.fd_td_values)}")
    lines.append(f"n_values = {_fmt(sw.n_values)}")
    lines.append(f"k_values = {_fmt(sw.k_values)}")
    lines.append(
        f"modulation = {{ alpha = {_fmt(sw.modulation.alpha)}, beta = {_fmt(sw.modulation.beta)} }}")
    lines.append(f"methods = {_fmt(sw.methods)}")
    lines.append(f"trials = {sw.trials}")
    lines.append(f"seed = {sw.seed}")
    lines.append(f'snr_policy = "{sw.snr_policy.value}"')
    lines.append(f'snr_mode = "{sw.snr_mode}"')
    lines.append(f"sources = {_fmt(sw.sources)}")
    lines.append(f"chunk_size = {sw.chunk_size}")
    if sw.workers is not None:
        lines.append(f"workers = {sw.workers}")
    lines += ["", "[output]"]
    if sw.consistency_gate is not None:
        lines.append(f"consistency_gate = {_fmt(sw.consistency_gate)}")
    lines.append(f"prefix = {_fmt(sw.prefix)}")
    return "\n".join(lines) + "\n"


def save_config(loaded: LoadedConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_config(loaded))


def config_digest(loaded: LoadedConfig) -> str:
    """Stable hash of the fully-materialized config."""
    return hashlib.sha256(dumps_config(loaded).encode("utf-8")).hexdigest()[:16]
