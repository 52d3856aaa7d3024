"""Run configuration: YAML parsing with validation, defaults and canonical serialisation."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field

import yaml

from .spin_algebra import RULE_KINDS, ConstraintRule

SUBCOMMANDS = ("rates", "raman", "trajectories", "full-cavity", "layers", "ode", "dark", "fragments",
               "negativity", "witness", "dtwa")
OBSERVABLES = ("n", "Sz", "Sperp2", "Nadj", "Ntri", "FdagF", "photons", "EN")

# per-subcommand parameters: name -> (type tag, default)
PARAMS = {
    "rates": {"g": ("float", 1.0), "kappa": ("float", 40.0), "delta": ("float", 0.0),
              "n_atoms": ("int?", None)},
    "raman": {"g": ("float", 2.26), "Omega": ("float", 0.1), "Delta_e": ("float", 1.0),
              "gamma_e": ("float", 6.0), "kappa": ("float", 0.85), "units": ("str", "2pi*MHz")},
    "trajectories": {"gamma": ("float", 1.0), "chi": ("float", 0.0), "gamma_loss": ("float", 0.0),
                     "gamma_deph_ind": ("float", 0.0), "gamma_deph_common": ("float", 0.0),
                     "v_nnn": ("float", 0.0), "init": ("str", "up"), "record_states": ("bool", False),
                     "snapshot_stride": ("int", 1), "density_groups": ("int?", None),
                     "bipartition": ("list?", None)},
    "full-cavity": {"g": ("float", 1.0), "kappa": ("float", 40.0), "delta": ("float", 0.0),
                    "n_max": ("int?", None), "rwa": ("bool", True), "omega_c": ("float", 0.0),
                    "omega_s": ("float", 0.0)},
    "layers": {"k_max": ("int?", None)},
    "ode": {"n0": ("float?", None), "tau_end": ("float", 10.0), "n_points": ("int", 201)},
    "dark": {},
    "fragments": {},
    "negativity": {"bipartition": ("list?", None)},
    "witness": {"time_index": ("int", -1), "tol": ("float", 1e-8)},
    "dtwa": {"g": ("float", 1.0), "kappa": ("float", 30.0), "delta": ("float", 0.0),
             "n_c": ("float", 0.0), "phi": ("float", 0.0), "dt": ("float?", None),
             "coefficients": ("list?", None)},
}
TIMED = ("trajectories", "full-cavity", "dtwa")
NEEDS_INPUT = ("negativity", "witness")
DEFAULT_OBSERVABLES = {
    "trajectories": ["n", "Sz", "Sperp2", "Nadj", "Ntri", "FdagF"],
    "full-cavity": ["n", "Sz", "Sperp2", "Nadj", "Ntri", "FdagF", "photons"],
    "dtwa": ["n", "Sz", "Sperp2", "Nadj", "photons"],
}
GRID_DEFAULTS = {"t_start": 0.0, "t_end": 10.0, "n_points": 101}
TOP_KEYS = ("subcommand", "rule", "N", "seed", "threads", "out_dir", "prefix", "grid", "n_traj",
            "observables", "params", "input")


class ConfigError(ValueError):
    """Invalid configuration; carries the offending field and source line when known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = ""
        if field:
            where += f"{field}: "
        if line is not None:
            where = f"line {line}: " + where
        super().__init__(where + message)


@dataclass
class RunConfig:
    subcommand: str
    rule: dict
    N: int
    seed: int = 0
    threads: int | None = None
    out_dir: str = "."
    prefix: str | None = None
    grid: dict | None = None
    n_traj: int | None = None
    observables: list | None = None
    params: dict = field(default_factory=dict)
    input: str | None = None

    def to_dict(self) -> dict:
        return {k: copy.deepcopy(getattr(self, k)) for k in TOP_KEYS}

    def constraint(self) -> ConstraintRule:
        return build_rule(self.rule)

    @property
    def output_prefix(self) -> str:
        return self.prefix or self.subcommand


def build_rule(spec: dict) -> ConstraintRule:
    r = dict(spec)
    kind = r.pop("kind")
    if kind == "custom":
        return ConstraintRule.custom(r["w"], r["table"], r.get("boundary", "periodic"), r.get("fill", 0))
    return ConstraintRule(kind, boundary=r.get("boundary", "periodic"), fill=r.get("fill", 0))


def _line_map(text: str) -> dict[str, int]:
    """Dotted key path -> 1-based source line."""
    out: dict[str, int] = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return out

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                path = f"{prefix}.{k.value}" if prefix else str(k.value)
                out[path] = k.start_mark.line + 1
                walk(v, path)

    if root is not None:
        walk(root, "")
    return out


def _check(value, tag: str, name: str, lines):
    opt = tag.endswith("?")
    base = tag.rstrip("?")
    if value is None:
        if opt:
            return None
        raise ConfigError(f"expected {base}, got null", name, lines.get(name))
    ok = {
        "float": isinstance(value, (int, float)) and not isinstance(value, bool),
        "int": isinstance(value, int) and not isinstance(value, bool),
        "bool": isinstance(value, bool),
        "str": isinstance(value, str),
        "list": isinstance(value, list),
    }[base]
    if not ok:
        raise ConfigError(f"expected {base}, got {type(value).__name__} {value!r}", name, lines.get(name))
    return float(value) if base == "float" else value


def _parse_rule(raw, lines) -> dict:
    if isinstance(raw, str):
        raw = {"kind": raw}
    if not isinstance(raw, dict):
        raise ConfigError("expected a rule name or mapping", "rule", lines.get("rule"))
    allowed = {"kind", "boundary", "fill", "w", "table"}
    for k in raw:
        if k not in allowed:
            raise ConfigError(f"unknown key (allowed: {sorted(allowed)})", f"rule.{k}", lines.get(f"rule.{k}"))
    kind = str(raw.get("kind", "")).lower()
    if kind not in RULE_KINDS:
        raise ConfigError(f"unknown rule kind {raw.get('kind')!r}", "rule.kind", lines.get("rule.kind"))
    out = {"kind": kind, "boundary": raw.get("boundary", "periodic"), "fill": raw.get("fill", 0)}
    if out["boundary"] not in ("periodic", "open"):
        raise ConfigError("boundary must be periodic or open", "rule.boundary", lines.get("rule.boundary"))
    if out["fill"] not in (0, 1) or isinstance(out["fill"], bool):
        raise ConfigError("fill must be 0 or 1", "rule.fill", lines.get("rule.fill"))
    if kind == "custom":
        w = raw.get("w")
        if not isinstance(w, int) or isinstance(w, bool) or w < 0:
            raise ConfigError("custom rules need an integer range w >= 0", "rule.w", lines.get("rule.w"))
        table = raw.get("table")
        if isinstance(table, str):
            table = [int(c) for c in table if c in "01"]
        if not isinstance(table, list):
            raise ConfigError("custom rules need a table list", "rule.table", lines.get("rule.table"))
        expected = 1 << (2 * w)
        if len(table) != expected:
            raise ConfigError(f"expected length {expected} for w={w}, got {len(table)}", "rule.table",
                              lines.get("rule.table"))
        out["w"] = w
        out["table"] = [int(bool(x)) for x in table]
    elif "w" in raw or "table" in raw:
        raise ConfigError("w/table only apply to custom rules", "rule", lines.get("rule"))
    try:
        build_rule(out)
    except ValueError as exc:
        raise ConfigError(str(exc), "rule", lines.get("rule")) from None
    return out


def config_from_dict(raw: dict, lines: dict | None = None) -> RunConfig:
    lines = lines or {}
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping")
    for k in raw:
        if k not in TOP_KEYS:
            raise ConfigError(f"unknown key (allowed: {list(TOP_KEYS)})", str(k), lines.get(str(k)))
    sub = raw.get("subcommand")
    if sub not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {sub!r} (one of {list(SUBCOMMANDS)})", "subcommand",
                          lines.get("subcommand"))
    if "rule" not in raw and sub not in ("rates", "raman"):
        raise ConfigError("missing", "rule")
    rule = _parse_rule(raw.get("rule", "east"), lines)
    if "N" not in raw and sub not in ("rates", "raman"):
        raise ConfigError("missing", "N")
    N = _check(raw.get("N", 1), "int", "N", lines)
    if N < 1:
        raise ConfigError("must be >= 1", "N", lines.get("N"))
    seed = _check(raw.get("seed", 0), "int", "seed", lines)
    if seed < 0:
        raise ConfigError("must be >= 0", "seed", lines.get("seed"))
    threads = _check(raw.get("threads"), "int?", "threads", lines)
    out_dir = _check(raw.get("out_dir", "."), "str", "out_dir", lines)
    prefix = _check(raw.get("prefix"), "str?", "prefix", lines)

    spec = PARAMS[sub]
    given = raw.get("params") or {}
    if not isinstance(given, dict):
        raise ConfigError("expected a mapping", "params", lines.get("params"))
    params = {}
    for k in given:
        if k not in spec:
            raise ConfigError(f"unknown key for {sub} (allowed: {sorted(spec)})", f"params.{k}",
                              lines.get(f"params.{k}"))
    for k, (tag, default) in spec.items():
        params[k] = _check(given.get(k, default), tag, f"params.{k}", lines)
    if sub == "layers" and params["k_max"] is None:
        params["k_max"] = N
    if sub == "rates" and params["n_atoms"] is None:
        params["n_atoms"] = N
    if sub == "ode" and params["n0"] is None:
        params["n0"] = 1.0 - 1.0 / max(N, 2)

    grid = n_traj = observables = None
    if sub in TIMED:
        g_raw = raw.get("grid") or {}
        if not isinstance(g_raw, dict):
            raise ConfigError("expected a mapping", "grid", lines.get("grid"))
        for k in g_raw:
            if k not in GRID_DEFAULTS:
                raise ConfigError(f"unknown key (allowed: {list(GRID_DEFAULTS)})", f"grid.{k}",
                                  lines.get(f"grid.{k}"))
        grid = {"t_start": _check(g_raw.get("t_start", 0.0), "float", "grid.t_start", lines),
                "t_end": _check(g_raw.get("t_end", 10.0), "float", "grid.t_end", lines),
                "n_points": _check(g_raw.get("n_points", 101), "int", "grid.n_points", lines)}
        if grid["n_points"] < 2 or grid["t_end"] <= grid["t_start"]:
            raise ConfigError("need t_end > t_start and n_points >= 2", "grid", lines.get("grid"))
        n_traj = _check(raw.get("n_traj", 100), "int", "n_traj", lines)
        if n_traj < 2:
            raise ConfigError("must be >= 2", "n_traj", lines.get("n_traj"))
        observables = raw.get("observables", DEFAULT_OBSERVABLES[sub])
        observables = list(_check(observables, "list", "observables", lines))
        bad = [o for o in observables if o not in OBSERVABLES]
        if bad:
            raise ConfigError(f"unknown observables {bad} (one of {list(OBSERVABLES)})", "observables",
                              lines.get("observables"))
    else:
        for k in ("grid", "n_traj", "observables"):
            if raw.get(k) is not None:
                raise ConfigError(f"not used by {sub}", k, lines.get(k))
    inp = _check(raw.get("input"), "str?", "input", lines)
    if sub in NEEDS_INPUT and inp is None:
        raise ConfigError(f"{sub} needs an input snapshot file", "input")
    return RunConfig(sub, rule, N, seed, threads, out_dir, prefix, grid, n_traj, observables, params, inp)


def parse_config(text: str) -> RunConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"malformed YAML: {getattr(exc, 'problem', exc)}",
                          line=mark.line + 1 if mark else None) from None
    return config_from_dict(raw or {}, _line_map(text))


def serialize(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True, default_flow_style=False)


def normalize(text: str) -> str:
    return serialize(parse_config(text))


def set_path(raw: dict, dotted: str, value) -> None:
    """Assign ``raw[a][b] = value`` for ``dotted = "a.b"``."""
    keys = dotted.split(".")
    cur = raw
    for k in keys[:-1]:
        cur = cur.setdefault(k, {})
        if not isinstance(cur, dict):
            raise ConfigError("cannot set a key below a scalar", dotted)
    cur[keys[-1]] = value
