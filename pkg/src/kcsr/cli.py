"""Command-line front end: one subcommand per analysis, CSV/JSON outputs plus a manifest."""
from __future__ import annotations

import argparse
import cmath
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .config import SUBCOMMANDS, ConfigError, RunConfig, config_from_dict, parse_config, set_path
from .spin_algebra import DenseSizeError, config_to_string

EXIT_CONFIG, EXIT_RESOURCE, EXIT_NUMERIC = 2, 3, 4
SNAPSHOT_HEADER = ("t_index", "t", "traj", "config", "re", "im")


# --------------------------------------------------------------------------
# emission helpers


def _num(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(v if isinstance(v, str) else _num(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return None if not math.isfinite(float(obj)) else float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def json_text(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _series_csv(res, names) -> str:
    header = ["t"]
    for k in names:
        header += [k, f"{k}_sem"]
    cols = [res.times]
    for k in names:
        cols += [res.mean(k), res.sem(k)]
    return csv_text(header, zip(*cols))


def _sidecar_config(cfg: RunConfig) -> dict:
    # data files must not depend on where they are written
    d = cfg.to_dict()
    d.pop("out_dir", None)
    return d


def _grid(cfg: RunConfig):
    from .dynamics import TimeGrid

    g = cfg.grid
    return TimeGrid(g["t_start"], g["t_end"], g["n_points"])


def _bipartition(n, sites):
    from .entanglement import Bipartition

    return Bipartition.half(n) if sites is None else Bipartition(n, tuple(sites))


# --------------------------------------------------------------------------
# subcommands; each returns {filename suffix: text}


def cmd_rates(cfg):
    import warnings

    from .model_reduction import CavityParams, CavityValidityWarning, cavity_alpha, eliminate_cavity, validity_margin

    p = cfg.params
    cp = CavityParams(p["g"], p["kappa"], p["delta"], p["n_atoms"])
    rates = eliminate_cavity(cp)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CavityValidityWarning)
        margin = validity_margin(cp)
    alpha = cavity_alpha(cp)
    rec = {"gamma": rates.gamma, "chi": rates.chi, "alpha_re": alpha.real, "alpha_im": alpha.imag,
           "validity_margin": margin if math.isfinite(margin) else "inf", "valid": not caught}
    return {".json": json_text(rec)}


def cmd_raman(cfg):
    from .model_reduction import RamanParams, raman_reduce

    p = cfg.params
    red = raman_reduce(RamanParams(p["g"], p["Omega"], p["Delta_e"], p["gamma_e"], p["kappa"]))
    rec = red.to_dict()
    rec["units"] = p["units"]
    return {".json": json_text(rec)}


def _initial_state(cfg):
    from .spin_algebra import PureState, SpinConfig

    init = cfg.params["init"]
    if init == "up":
        return PureState.fully_up(cfg.N)
    if len(init) != cfg.N or set(init) - set("01"):
        raise ConfigError(f"init must be 'up' or a {cfg.N}-site bitstring", "params.init")
    return PureState.basis(SpinConfig.from_string(init))


def snapshot_csv(times, snapshots, stride: int, n_sites: int) -> str:
    """Nonzero amplitudes of every trajectory at every ``stride``-th grid point."""
    rows = []
    for p in range(0, len(times), stride):
        states = snapshots[:, p, :]
        for traj, nz in zip(*np.nonzero(states)):
            a = complex(states[traj, nz])
            rows.append((p, times[p], traj, config_to_string(int(nz), n_sites), a.real, a.imag))
    return csv_text(SNAPSHOT_HEADER, rows)


def read_snapshots(path: str, n_sites: int):
    """Inverse of :func:`snapshot_csv`: ``{t_index: (t, states (n_traj, 2^N))}``."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or tuple(lines[0].split(",")) != SNAPSHOT_HEADER:
        raise ConfigError(f"{path} is not a snapshot file (header {','.join(SNAPSHOT_HEADER)})", "input")
    data: dict[int, tuple[float, dict[int, np.ndarray]]] = {}
    dim = 1 << n_sites
    for ln, line in enumerate(lines[1:], start=2):
        p, t, traj, conf, re, im = line.split(",")
        if len(conf) != n_sites:
            raise ConfigError(f"line {ln}: config {conf} does not have N={n_sites} sites", "input")
        bits = int(conf[::-1], 2)
        slot = data.setdefault(int(p), (float(t), {}))[1]
        vec = slot.setdefault(int(traj), np.zeros(dim, dtype=complex))
        vec[bits] = complex(float(re), float(im))
    return {p: (t, np.array([v[k] for k in sorted(v)])) for p, (t, v) in sorted(data.items())}


def cmd_trajectories(cfg):
    from .dynamics import EffectiveModel, run_quantum_jumps

    p = cfg.params
    if "photons" in cfg.observables:
        raise ConfigError("photons is only available for full-cavity and dtwa", "observables")
    model = EffectiveModel(cfg.constraint(), p["gamma"], p["chi"], p["gamma_loss"], p["gamma_deph_ind"],
                           p["gamma_deph_common"], p["v_nnn"])
    part = _bipartition(cfg.N, p["bipartition"]) if "EN" in cfg.observables else None
    res = run_quantum_jumps(model, _initial_state(cfg), _grid(cfg), cfg.n_traj, cfg.seed,
                            record_states=p["record_states"], observables=cfg.observables,
                            density_groups=p["density_groups"], threads=cfg.threads, bipartition=part)
    out = {".csv": _series_csv(res, cfg.observables)}
    side = {"config": _sidecar_config(cfg), "meta": res.meta, "n_traj": res.n_traj, "seed": res.master_seed}
    out[".json"] = json_text(side)
    if p["record_states"]:
        out[".snapshots.csv"] = snapshot_csv(res.times, res.snapshots, p["snapshot_stride"], cfg.N)
    return out


def cmd_full_cavity(cfg):
    from .dynamics import FullCavityModel, run_full_cavity

    bad = [o for o in cfg.observables if o == "EN"]
    if bad:
        raise ConfigError("EN is not available for full-cavity runs", "observables")
    p = cfg.params
    if not p["rwa"] and p["omega_c"] <= 0:
        raise ConfigError("rwa: false needs the bare cavity frequency params.omega_c > 0", "params.omega_c")
    model = FullCavityModel(cfg.constraint(), p["g"], p["kappa"], p["delta"], n_max=p["n_max"], rwa=p["rwa"],
                            omega_c=p["omega_c"], omega_s=p["omega_s"])
    res = run_full_cavity(model, cfg.N, _grid(cfg), cfg.n_traj, cfg.seed, threads=cfg.threads)
    side = {"config": _sidecar_config(cfg), "meta": res.meta, "n_traj": res.n_traj, "seed": res.master_seed}
    return {".csv": _series_csv(res, cfg.observables), ".json": json_text(side)}


def cmd_dtwa(cfg):
    from .dtwa import DTWA_OBSERVABLES, DtwaParams, run_dtwa

    bad = [o for o in cfg.observables if o not in DTWA_OBSERVABLES]
    if bad:
        raise ConfigError(f"not available from DTWA: {bad}", "observables")
    p = cfg.params
    rule = cfg.constraint()
    coeffs = p["coefficients"]
    if coeffs is None:
        if rule.kind == "custom":
            raise ConfigError("custom rules need params.coefficients [alpha, beta, gamma]", "params.coefficients")
        coeffs = rule.dtwa_coefficients
    elif len(coeffs) != 3:
        raise ConfigError("expected three numbers [alpha, beta, gamma]", "params.coefficients")
    coeffs = tuple(float(c) for c in coeffs)
    alpha0 = cmath.rect(math.sqrt(p["n_c"]), p["phi"]) if p["n_c"] > 0 else 0j
    g = cfg.grid
    if g["t_start"] != 0.0:
        raise ConfigError("DTWA runs start at t = 0", "grid.t_start")
    params = DtwaParams(cfg.N, coeffs, p["g"], p["kappa"], p["delta"], alpha0, p["dt"], cfg.n_traj, cfg.seed,
                        g["t_end"], g["n_points"], rule.boundary)
    res = run_dtwa(params, cfg.observables)
    meta = dict(res.meta)
    meta["alpha"], meta["beta"], meta["gamma"] = coeffs
    side = {"config": _sidecar_config(cfg), "meta": meta, "n_traj": res.n_traj, "seed": res.master_seed}
    return {".csv": _series_csv(res, cfg.observables), ".json": json_text(side)}


def cmd_layers(cfg):
    from .click_limit import boolean_lower_bound, layer_spectrum

    rule, N = cfg.constraint(), cfg.N
    k_max = cfg.params["k_max"]
    if not 0 <= k_max <= N:
        raise ConfigError(f"k_max must lie in 0..{N}", "params.k_max")
    spec = layer_spectrum(rule, N, min(k_max + 1, N))
    rows = []
    for k in range(k_max + 1):
        inten = spec.intensities[k] if k < spec.intensities.size else 0.0
        rows.append((k, spec.log_norms[k], inten, boolean_lower_bound(rule.w, N, k)))
    return {".csv": csv_text(("k", "logB", "intensity", "lower_bound"), rows)}


def cmd_ode(cfg):
    from .click_limit import ode_density

    if cfg.rule["kind"] != "and":
        raise ConfigError("the rate equation has a closed-form scaling function only for the and rule", "rule")
    p = cfg.params
    tau = np.linspace(0.0, p["tau_end"], p["n_points"])
    traj = ode_density("and", p["n0"], tau)
    return {".csv": csv_text(("tau", "n"), zip(traj.tau, traj.n))}


def cmd_dark(cfg):
    from .dark_manifold import kernel_basis

    basis = kernel_basis(cfg.constraint(), cfg.N)
    vectors = []
    for i, vec in enumerate(basis.vectors):
        amps = {}
        for conf, a in vec.terms(tol=1e-12).items():
            amps[conf] = a.real if abs(a.imag) < 1e-14 else [a.real, a.imag]
        vectors.append({"index": i, "class": basis.labels[i], "sector": float(basis.sector[i]),
                        "excitations": int(basis.excitations[i]), "nadj": float(basis.nadj[i]),
                        "ntri": float(basis.ntri[i]), "amplitudes": amps})
    rec = {"rule": cfg.rule, "n_sites": cfg.N, "dims": basis.dims(), "class_counts": basis.class_counts(),
           "vectors": vectors}
    return {".json": json_text(rec)}


def cmd_fragments(cfg):
    from .dark_manifold import fragmentation_report

    return {".json": json_text(fragmentation_report(cfg.constraint(), cfg.N).to_dict())}


def cmd_negativity(cfg):
    from .dynamics import reconstruct_density
    from .entanglement import log_negativity

    part = _bipartition(cfg.N, cfg.params["bipartition"])
    rows = []
    for _, (t, states) in read_snapshots(cfg.input, cfg.N).items():
        rows.append((t, log_negativity(reconstruct_density(states), part)))
    return {".csv": csv_text(("t", "E_N"), rows)}


def cmd_witness(cfg):
    from .dynamics import reconstruct_density
    from .entanglement import witness

    snaps = read_snapshots(cfg.input, cfg.N)
    keys = list(snaps)
    try:
        key = keys[cfg.params["time_index"]]
    except IndexError:
        raise ConfigError(f"time_index out of range for {len(keys)} snapshot times", "params.time_index") from None
    t, states = snaps[key]
    rep = witness(reconstruct_density(states), cfg.constraint(), cfg.params["tol"]).to_dict()
    rep["t"] = t
    rep["t_index"] = key
    return {".json": json_text(rep)}


COMMANDS = {"rates": cmd_rates, "raman": cmd_raman, "trajectories": cmd_trajectories,
            "full-cavity": cmd_full_cavity, "layers": cmd_layers, "ode": cmd_ode, "dark": cmd_dark,
            "fragments": cmd_fragments, "negativity": cmd_negativity, "witness": cmd_witness, "dtwa": cmd_dtwa}


# --------------------------------------------------------------------------
# orchestration


def run(cfg: RunConfig) -> dict[str, Path]:
    """Run one configured analysis and write its outputs plus a manifest."""
    start = time.perf_counter()
    outputs = COMMANDS[cfg.subcommand](cfg)
    wall = time.perf_counter() - start
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written, sums = {}, {}
    for suffix, text in outputs.items():
        path = out_dir / f"{cfg.output_prefix}{suffix}"
        data = text.encode("utf-8")
        path.write_bytes(data)
        written[suffix] = path
        sums[path.name] = hashlib.sha256(data).hexdigest()
    manifest = {"version": __version__, "config": cfg.to_dict(), "wall_clock_s": wall, "checksums": sums}
    mpath = out_dir / f"{cfg.output_prefix}.manifest.json"
    mpath.write_text(json_text(manifest), encoding="utf-8")
    written[".manifest.json"] = mpath
    return written


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kcsr", description="Kinetically constrained superradiance toolkit.")
    ap.add_argument("subcommand", nargs="?", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="YAML run configuration")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--out-dir")
    ap.add_argument("--rule", help="rule kind (dicke, east, and, or)")
    ap.add_argument("--boundary", choices=("periodic", "open"))
    ap.add_argument("-N", "--n-sites", type=int, dest="N")
    ap.add_argument("--n-traj", type=int)
    ap.add_argument("--t-end", type=float)
    ap.add_argument("--n-points", type=int)
    ap.add_argument("--observables", help="comma-separated observable names")
    ap.add_argument("--prefix", help="output file stem (default: subcommand name)")
    ap.add_argument("--input", help="snapshot CSV for negativity / witness")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override any config field, e.g. params.kappa=30 (value parsed as YAML)")
    ap.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    ap.add_argument("--version", action="version", version=f"kcsr {__version__}")
    return ap


def resolve_config(args) -> RunConfig:
    raw = {}
    if args.config:
        text = Path(args.config).read_text()
        parse_config(text)  # validate the file alone first for line diagnostics
        raw = yaml.safe_load(text) or {}
    if args.subcommand:
        if raw.get("subcommand") not in (None, args.subcommand):
            raise ConfigError(f"config is for {raw['subcommand']!r}, command line asks for {args.subcommand!r}",
                              "subcommand")
        raw["subcommand"] = args.subcommand
    if args.rule:
        rule = raw.get("rule")
        rule = dict(rule) if isinstance(rule, dict) else {}
        rule["kind"] = args.rule
        raw["rule"] = rule
    if args.boundary:
        rule = raw.get("rule", "east")
        rule = dict(rule) if isinstance(rule, dict) else {"kind": rule}
        rule["boundary"] = args.boundary
        raw["rule"] = rule
    direct = {"N": args.N, "seed": args.seed, "threads": args.threads, "out_dir": args.out_dir,
              "n_traj": args.n_traj, "prefix": args.prefix, "input": args.input}
    for k, v in direct.items():
        if v is not None:
            raw[k] = v
    if args.t_end is not None:
        set_path(raw, "grid.t_end", args.t_end)
    if args.n_points is not None:
        set_path(raw, "grid.n_points", args.n_points)
    if args.observables:
        raw["observables"] = [s.strip() for s in args.observables.split(",") if s.strip()]
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        set_path(raw, key.strip(), yaml.safe_load(val))
    return config_from_dict(raw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.print_config:
            from .config import serialize

            sys.stdout.write(serialize(cfg))
            return 0
        written = run(cfg)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MemoryError, DenseSizeError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ArithmeticError, FloatingPointError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in written.values():
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
