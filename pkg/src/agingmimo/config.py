"""System configuration: YAML loading, validation, canonical hashing.

The config file is a flat mapping of system-wide keys plus a ``users``
block (one mapping replicated to all users, or a list with one mapping per
user), and optional ``sweep`` and ``mc`` blocks.  All quantities are in the
normalized units of the model: the slot time is the unit of time, powers
and noise variances are linear, path loss is given in dB.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json

import yaml

from .channel import TEMPORAL_LAWS, UserParams

SWEEP_AXES = ("n_t", "n_r", "doppler", "rician", "pathloss_db")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclasses.dataclass(frozen=True)
class McSpec:
    num_samples: int = 10000
    seed: int = 0
    nr_sweep: tuple[int, ...] = ()
    threshold: float = 0.05


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    optimize_w: bool = True
    optimize_q: bool = True
    mc_check: McSpec | None = None


@dataclasses.dataclass(frozen=True)
class SystemConfig:
    k: int = 3
    n_t: int = 2
    n_r: int = 10
    tau_p: int = 2
    sigma_d2: float = 0.01
    q_max: int = 5
    m_max: int = 1
    rho_t: float = 0.9
    rho_r: float = 0.0
    log_base: object = 2
    f_c: float = 1000.0
    temporal_law: str = "gaussian"
    q: tuple[int, ...] = (5,)
    users: tuple[UserParams, ...] = ()
    sweep: SweepSpec | None = None
    mc: McSpec = McSpec()

    def __post_init__(self):
        if not self.users:
            object.__setattr__(
                self, "users", tuple(UserParams(f_d=0.1) for _ in range(self.k)))
        if len(self.users) != self.k:
            raise ConfigError("users", f"need exactly k ({self.k}) user blocks")

    def replace(self, **kw) -> "SystemConfig":
        # changing k without giving users refills them with defaults
        if "k" in kw and "users" not in kw and kw["k"] != self.k:
            kw["users"] = ()
        return dataclasses.replace(self, **kw)

    def replace_users(self, **kw) -> "SystemConfig":
        """New config with every user's named fields replaced."""
        users = tuple(dataclasses.replace(u, **kw) for u in self.users)
        return dataclasses.replace(self, users=users)


def default_config() -> SystemConfig:
    return SystemConfig()


_USER_KEYS = {"f_d", "k_f", "pathloss_db", "alpha", "p_p_max", "p_d",
              "sigma_p2", "sigma_h2", "aoa_deg", "aod_deg"}


def _require(cond: bool, key: str, message: str) -> None:
    if not cond:
        raise ConfigError(key, message)


def _as_int(raw, key, minimum=1) -> int:
    _require(isinstance(raw, int) and not isinstance(raw, bool), key, "must be an integer")
    _require(raw >= minimum, key, f"must be >= {minimum}")
    return raw


def _as_float(raw, key, positive=False, nonneg=False) -> float:
    _require(isinstance(raw, (int, float)) and not isinstance(raw, bool),
             key, "must be a number")
    v = float(raw)
    if positive:
        _require(v > 0, key, "must be > 0")
    if nonneg:
        _require(v >= 0, key, "must be >= 0")
    return v


def _parse_user(raw, key: str) -> UserParams:
    _require(isinstance(raw, dict), key, "must be a mapping")
    unknown = set(raw) - _USER_KEYS
    _require(not unknown, f"{key}.{sorted(unknown)[0]}" if unknown else key,
             "unknown user key")
    kw = {}
    if "f_d" in raw:
        kw["f_d"] = _as_float(raw["f_d"], f"{key}.f_d", nonneg=True)
    if "k_f" in raw:
        kw["k_f"] = _as_float(raw["k_f"], f"{key}.k_f", nonneg=True)
    _require(not ("alpha" in raw and "pathloss_db" in raw), f"{key}.alpha",
             "give either alpha or pathloss_db, not both")
    if "pathloss_db" in raw:
        kw["alpha"] = 10.0 ** (_as_float(raw["pathloss_db"], f"{key}.pathloss_db") / 20.0)
    if "alpha" in raw:
        kw["alpha"] = _as_float(raw["alpha"], f"{key}.alpha", positive=True)
    for name, positive in (("p_p_max", True), ("p_d", False), ("sigma_p2", True),
                           ("sigma_h2", True)):
        if name in raw:
            kw[name] = _as_float(raw[name], f"{key}.{name}", positive=positive,
                                 nonneg=not positive)
    for name in ("aoa_deg", "aod_deg"):
        if name in raw:
            kw[name] = _as_float(raw[name], f"{key}.{name}")
    kw.setdefault("f_d", 0.1)
    try:
        return UserParams(**kw)
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from None


def _parse_mc(raw, key: str) -> McSpec:
    _require(isinstance(raw, dict), key, "must be a mapping")
    unknown = set(raw) - {"num_samples", "seed", "nr_sweep", "threshold"}
    _require(not unknown, f"{key}.{sorted(unknown)[0]}" if unknown else key,
             "unknown key")
    kw = {}
    if "num_samples" in raw:
        kw["num_samples"] = _as_int(raw["num_samples"], f"{key}.num_samples")
    if "seed" in raw:
        kw["seed"] = _as_int(raw["seed"], f"{key}.seed", minimum=0)
    if "nr_sweep" in raw:
        vals = raw["nr_sweep"]
        _require(isinstance(vals, list) and all(isinstance(v, int) for v in vals),
                 f"{key}.nr_sweep", "must be a list of integers")
        kw["nr_sweep"] = tuple(vals)
    if "threshold" in raw:
        kw["threshold"] = _as_float(raw["threshold"], f"{key}.threshold", nonneg=True)
    return McSpec(**kw)


def _parse_sweep(raw) -> SweepSpec:
    _require(isinstance(raw, dict), "sweep", "must be a mapping")
    unknown = set(raw) - {"axis", "values", "optimize_w", "optimize_q", "mc_check"}
    _require(not unknown, f"sweep.{sorted(unknown)[0]}" if unknown else "sweep",
             "unknown key")
    _require("axis" in raw, "sweep.axis", "is required")
    axis = raw["axis"]
    _require(axis in SWEEP_AXES, "sweep.axis", f"must be one of {', '.join(SWEEP_AXES)}")
    values = raw.get("values")
    _require(isinstance(values, list) and len(values) > 0, "sweep.values",
             "must be a nonempty list")
    vals = []
    for i, v in enumerate(values):
        if axis in ("n_t", "n_r"):
            vals.append(_as_int(v, f"sweep.values[{i}]"))
        else:
            vals.append(_as_float(v, f"sweep.values[{i}]"))
    _require(all(a < b for a, b in zip(vals, vals[1:])), "sweep.values",
             "must be strictly increasing")
    kw = {"axis": axis, "values": tuple(vals)}
    for flag in ("optimize_w", "optimize_q"):
        if flag in raw:
            _require(isinstance(raw[flag], bool), f"sweep.{flag}", "must be a boolean")
            kw[flag] = raw[flag]
    if "mc_check" in raw and raw["mc_check"] is not None:
        kw["mc_check"] = _parse_mc(raw["mc_check"], "sweep.mc_check")
    return SweepSpec(**kw)


_TOP_KEYS = {"k", "n_t", "n_r", "tau_p", "sigma_d2", "q_max", "m_max", "rho_t",
             "rho_r", "log_base", "f_c", "temporal_law", "q", "users", "sweep", "mc"}


def parse_config(raw: dict) -> SystemConfig:
    _require(isinstance(raw, dict), "config", "top level must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    _require(not unknown, sorted(unknown)[0] if unknown else "config", "unknown key")
    kw = {}
    for name in ("k", "n_t", "n_r", "tau_p", "q_max", "m_max"):
        if name in raw:
            kw[name] = _as_int(raw[name], name)
    if "sigma_d2" in raw:
        kw["sigma_d2"] = _as_float(raw["sigma_d2"], "sigma_d2", positive=True)
    for name in ("rho_t", "rho_r"):
        if name in raw:
            v = _as_float(raw[name], name)
            _require(0.0 <= v <= 1.0, name, "must lie in [0, 1]")
            kw[name] = v
    if "log_base" in raw:
        v = raw["log_base"]
        _require(v == 2 or v == "e", "log_base", "must be 2 or 'e'")
        kw["log_base"] = v
    if "f_c" in raw:
        kw["f_c"] = _as_float(raw["f_c"], "f_c", positive=True)
    if "temporal_law" in raw:
        _require(raw["temporal_law"] in TEMPORAL_LAWS, "temporal_law",
                 f"must be one of {', '.join(sorted(TEMPORAL_LAWS))}")
        kw["temporal_law"] = raw["temporal_law"]
    k = kw.get("k", 3)
    q_max = kw.get("q_max", 5)
    if "q" in raw:
        vals = raw["q"]
        _require(isinstance(vals, list) and len(vals) > 0, "q",
                 "must be a nonempty list")
        q = tuple(_as_int(v, f"q[{i}]") for i, v in enumerate(vals))
        _require(all(v <= q_max for v in q), "q", f"entries must be <= q_max ({q_max})")
        m_max = kw.get("m_max", 1)
        _require(len(q) <= m_max, "q", f"at most m_max ({m_max}) frames")
        kw["q"] = q
    else:
        kw["q"] = (q_max,)
    if "users" in raw:
        blocks = raw["users"]
        if isinstance(blocks, dict):
            user = _parse_user(blocks, "users")
            kw["users"] = tuple(user for _ in range(k))
        elif isinstance(blocks, list):
            _require(len(blocks) == k, "users", f"need exactly k ({k}) user blocks")
            kw["users"] = tuple(_parse_user(b, f"users[{i}]")
                                for i, b in enumerate(blocks))
        else:
            raise ConfigError("users", "must be a mapping or a list of mappings")
    if "mc" in raw:
        kw["mc"] = _parse_mc(raw["mc"], "mc")
    if "sweep" in raw and raw["sweep"] is not None:
        kw["sweep"] = _parse_sweep(raw["sweep"])
    return SystemConfig(**kw)


def load_config(path: str) -> SystemConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"not valid YAML: {exc}") from None
    if raw is None:
        raw = {}
    return parse_config(raw)


def with_axis_value(cfg: SystemConfig, axis: str, value) -> SystemConfig:
    """Config for one sweep point: move the named axis to ``value``."""
    if axis == "n_t":
        return cfg.replace(n_t=int(value))
    if axis == "n_r":
        return cfg.replace(n_r=int(value))
    if axis == "doppler":
        return cfg.replace_users(f_d=float(value))
    if axis == "rician":
        return cfg.replace_users(k_f=float(value))
    if axis == "pathloss_db":
        return cfg.replace_users(alpha=10.0 ** (float(value) / 20.0))
    raise ConfigError("sweep.axis", f"must be one of {', '.join(SWEEP_AXES)}")


def config_dict(cfg: SystemConfig) -> dict:
    """Plain nested dict of the full config (canonical form for hashing)."""
    d = dataclasses.asdict(cfg)
    d["log_base"] = str(cfg.log_base)
    d["q"] = list(cfg.q)
    d["users"] = [dataclasses.asdict(u) for u in cfg.users]
    if cfg.sweep is not None:
        d["sweep"]["values"] = list(cfg.sweep.values)
        if cfg.sweep.mc_check is not None:
            d["sweep"]["mc_check"]["nr_sweep"] = list(cfg.sweep.mc_check.nr_sweep)
    d["mc"]["nr_sweep"] = list(cfg.mc.nr_sweep)
    return d


def config_hash(cfg: SystemConfig) -> str:
    blob = json.dumps(config_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]
