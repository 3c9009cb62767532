"""Command-line front end.

Subcommands: queries, fit-queries, landau, euler, compare, verify.
Exit codes: 0 ok, 1 configuration error, 2 verification failure.
Settings resolve as flag > JSON config file > built-in default.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import baseline as bl
from . import hs
from . import verify as vf
from . import vlasov as vl

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2

QUERY_COLUMNS = ("method", "t", "eps", "Q", "R", "D", "eps_tri", "eps_sign")
SERIES_COLUMNS = ("t", "re_E", "im_E", "eta", "D_M")

# t linear, eps log-spaced; (lo, hi, n)
RANGES = {
    "1": {"t_range": [0.1, 10.0, 50], "eps_range": [1e-5, 0.9, 25]},
    "2": {"t_range": [1.0, 100.0, 50], "eps_range": [1e-10, 0.9, 25]},
}

DEFAULTS = {
    "queries": {"method": "both", "t": None, "eps": None, "t_range": [0.1, 10.0, 10],
                "eps_range": [1e-5, 0.9, 6], "workers": 1, "out": None},
    "fit-queries": {"range": "1", "t_range": None, "eps_range": None, "workers": 1, "out": None},
    "landau": {"k": 0.4, "nv": 32, "vmax": 4.5, "eps": 1e-3, "steps": 105, "dt": None,
               "t0": 5.23, "amplitude": 0.1, "csv": None, "json": None},
    "euler": {"k": 0.4, "nv": 32, "vmax": 4.5, "dt": 1e-4, "T": 25.0, "record_every": None,
              "t0": 5.23, "amplitude": 0.1, "csv": None, "json": None},
    "compare": {"k": 0.4, "nv": 32, "vmax": 4.5, "eps": 1e-3, "steps": 105, "dt": None,
                "dt_ref": 1e-4, "at_steps": [35, 70, 105], "t0": 5.23, "amplitude": 0.1,
                "omega_ref": 1.28506, "gamma_ref": 0.06613, "json": None},
    "verify": {"seed": 0, "only": None},
}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# formatting


def fmt_num(x) -> str:
    """Shortest round-trip text; scientific below 1e-3 in magnitude."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        return "0.0"
    if abs(x) < 1e-3:
        return f"{x:.16e}"
    return repr(x)


def write_csv(rows, columns, dest) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([v if isinstance(v, str) else fmt_num(v) for v in (r[c] for c in columns)])
    text = buf.getvalue()
    _emit(text, dest)
    return text


def write_json(obj, dest) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"
    _emit(text, dest)
    return text


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _emit(text: str, dest) -> None:
    if dest is None:
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# config resolution


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    file_cfg = load_config(getattr(args, "config", None))
    unknown = set(file_cfg) - set(cfg)
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    cfg.update(file_cfg)
    for key in DEFAULTS[command]:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _check_writable(path) -> None:
    if path is None:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise ConfigError(f"output directory {parent} does not exist")


def _positive(cfg: dict, *keys) -> None:
    for k in keys:
        v = cfg[k]
        if v is None or not float(v) > 0:
            raise ConfigError(f"{k} must be positive")


def _axis(single, rng, log: bool, name: str) -> np.ndarray:
    if single is not None:
        return np.array([float(single)])
    try:
        lo, hi, n = float(rng[0]), float(rng[1]), int(rng[2])
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"{name} range needs lo hi n") from exc
    if n < 1 or not lo <= hi or (log and lo <= 0):
        raise ConfigError(f"{name} range is empty or invalid")
    return np.geomspace(lo, hi, n) if log else np.linspace(lo, hi, n)


# ---------------------------------------------------------------------------
# queries


def _query_row(job):
    method, t, eps = job
    qc = hs.query_count(method, t, eps)
    b = qc.breakdown
    return {"method": method, "t": t, "eps": eps, "Q": qc.Q, "R": b.get("R"), "D": b.get("D"),
            "eps_tri": b.get("eps_tri"), "eps_sign": b.get("eps_sign")}


def query_sweep(methods, ts, epss, workers: int = 1) -> list[dict]:
    """Rows in (method, t, eps) order; identical for any worker count."""
    jobs = [(m, float(t), float(e)) for m in methods for t in ts for e in epss]
    for _, t, e in jobs:
        if not t > 0 or not 0 < e <= 0.9:
            raise ConfigError(f"point t={t}, eps={e} outside t > 0, 0 < eps <= 0.9")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_query_row, jobs, chunksize=16))
    return [_query_row(j) for j in jobs]


def _methods(name: str) -> list[str]:
    name = str(name).lower()
    if name == "both":
        return [hs.OAA, hs.FPAA]
    if name in ("oaa", "fpaa"):
        return [name.upper()]
    raise ConfigError(f"unknown method {name!r}")


def cmd_queries(cfg: dict) -> int:
    _check_writable(cfg["out"])
    ts = _axis(cfg["t"], cfg["t_range"], False, "t")
    es = _axis(cfg["eps"], cfg["eps_range"], True, "eps")
    rows = query_sweep(_methods(cfg["method"]), ts, es, int(cfg["workers"]))
    write_csv(rows, QUERY_COLUMNS, cfg["out"])
    return EXIT_OK


def fit_summary(rows: list[dict]) -> dict:
    by = {hs.OAA: [], hs.FPAA: []}
    for r in rows:
        by[r["method"]].append(r)
    samples = {
        "OAA": [(r["t"], r["eps"], r["Q"]) for r in by[hs.OAA]],
        "FPAA": [(r["t"], r["eps"], r["Q"]) for r in by[hs.FPAA]],
        "R": [(r["t"], r["eps"], r["R"]) for r in by[hs.FPAA]],
        "D": [(r["t"], r["eps"], r["D"]) for r in by[hs.FPAA]],
    }
    out = {}
    for model, pts in samples.items():
        f = bl.fit_query_scaling(pts, model)
        out[model] = {"terms": list(f.terms), "coeffs": [float(c) for c in f.coeffs],
                      "residual_rms": f.residual_rms, "r_squared": f.r_squared}
    return out


def cmd_fit_queries(cfg: dict) -> int:
    _check_writable(cfg["out"])
    rng = RANGES.get(str(cfg["range"]))
    if rng is None:
        raise ConfigError("range must be 1 or 2")
    t_range = cfg["t_range"] or rng["t_range"]
    eps_range = cfg["eps_range"] or rng["eps_range"]
    ts = _axis(None, t_range, False, "t")
    es = _axis(None, eps_range, True, "eps")
    rows = query_sweep([hs.OAA, hs.FPAA], ts, es, int(cfg["workers"]))
    summary = {"grid": {"t_range": list(t_range), "eps_range": list(eps_range), "log": "natural"},
               "fits": fit_summary(rows)}
    write_json(summary, cfg["out"])
    return EXIT_OK


# ---------------------------------------------------------------------------
# plasma runs


def _grid(cfg: dict) -> vl.VelocityGrid:
    try:
        return vl.build_grid(1, int(cfg["nv"]), float(cfg["vmax"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def series_rows(tr: bl.Trajectory) -> list[dict]:
    dm = tr.D_M()
    return [{"t": float(t), "re_E": float(e.real), "im_E": float(e.imag), "eta": tr.eta, "D_M": float(d)}
            for t, e, d in zip(tr.times, tr.E[:, 0], dm)]


def fit_or_none(tr: bl.Trajectory, t0: float) -> dict | None:
    try:
        with np.errstate(all="ignore"):
            f = bl.fit_damped_cosine(tr.times, tr.E[:, 0].imag, t0)
    except (bl.FitError, ValueError):
        return None
    if not all(map(math.isfinite, (f.omega, f.gamma))):
        return None
    return {"omega": f.omega, "gamma": f.gamma, "A": f.A, "rho": f.rho, "E0": f.E0, "t0": f.t0,
            "residual": f.residual}


def run_landau(cfg: dict) -> tuple[bl.Trajectory, vl.VlasovHamiltonian]:
    _positive(cfg, "k", "eps", "amplitude")
    if int(cfg["steps"]) < 1:
        raise ConfigError("steps must be >= 1")
    if cfg["dt"] is not None:
        _positive(cfg, "dt")
    grid = _grid(cfg)
    ham = vl.build_hamiltonian(1, grid, float(cfg["k"]))
    st, _ = vl.initial_state(grid, float(cfg["k"]), float(cfg["amplitude"]))
    tr = vl.evolve_hs(ham, st, int(cfg["steps"]), float(cfg["eps"]), cfg["dt"])
    return tr, ham


def cmd_landau(cfg: dict) -> int:
    for p in (cfg["csv"], cfg["json"]):
        _check_writable(p)
    tr, ham = run_landau(cfg)
    if cfg["csv"] is not None:
        write_csv(series_rows(tr), SERIES_COLUMNS, cfg["csv"])
    summary = {"source": tr.source, "alpha": ham.alpha, "dt": float(tr.times[1] - tr.times[0]),
               "steps": int(cfg["steps"]), "queries_per_step": tr.extra["queries_per_step"],
               "step_err": tr.extra["step_err"], "min_branch_norm": float(np.min(tr.extra["branch_norms"])),
               "fit": fit_or_none(tr, float(cfg["t0"]))}
    write_json(summary, cfg["json"])
    return EXIT_OK


def cmd_euler(cfg: dict) -> int:
    for p in (cfg["csv"], cfg["json"]):
        _check_writable(p)
    _positive(cfg, "k", "dt", "T", "amplitude")
    grid = _grid(cfg)
    rec = None if cfg["record_every"] is None else int(cfg["record_every"])
    tr = bl.euler_run(grid, float(cfg["k"]), float(cfg["dt"]), float(cfg["T"]), rec,
                      amplitude=float(cfg["amplitude"]))
    if cfg["csv"] is not None:
        write_csv(series_rows(tr), SERIES_COLUMNS, cfg["csv"])
    im = np.abs(tr.E[:, 0].imag)
    summary = {"source": tr.source, "dt": float(cfg["dt"]), "T": float(cfg["T"]),
               "max_abs_im_E": float(np.nanmax(im)) if np.isfinite(im).any() else None,
               "initial_abs_im_E": float(im[0]), "finite": bool(np.all(np.isfinite(tr.E))),
               "fit": fit_or_none(tr, float(cfg["t0"]))}
    write_json(summary, cfg["json"])
    return EXIT_OK


def cmd_compare(cfg: dict) -> int:
    _check_writable(cfg["json"])
    _positive(cfg, "dt_ref", "omega_ref", "gamma_ref")
    at = [int(s) for s in cfg["at_steps"]]
    if any(s < 0 or s > int(cfg["steps"]) for s in at):
        raise ConfigError("at_steps must lie within [0, steps]")
    tr, ham = run_landau(cfg)
    sample_times = [float(tr.times[s]) for s in at]
    ref = bl.euler_run(ham.grid, float(cfg["k"]), float(cfg["dt_ref"]), float(tr.times[-1]),
                       sample_times=sample_times, amplitude=float(cfg["amplitude"]))
    deltas = []
    for s, t in zip(at, sample_times):
        j = ref.at(t)
        deltas.append({"step": s, "t": t, "t_ref": float(ref.times[j]),
                       "delta": bl.distribution_error(tr.f1[s], ref.f1[j], ham.grid.dv)})
    out = {"deltas": deltas, "alpha": ham.alpha}
    for name, trj in (("HS", tr), ("Euler", ref)):
        fit = fit_or_none(trj, float(cfg["t0"]))
        entry = {"fit": fit}
        if fit is not None:
            entry["omega_rel_err"] = abs(fit["omega"] / float(cfg["omega_ref"]) - 1.0)
            entry["gamma_rel_err"] = abs(fit["gamma"] / float(cfg["gamma_ref"]) - 1.0)
        out[name] = entry
    write_json(out, cfg["json"])
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    only = cfg["only"]
    if only is not None:
        bad = [o for o in only if o not in vf.SUITES]
        if bad:
            raise ConfigError(f"unknown suites {bad}; choose from {sorted(vf.SUITES)}")
    results = vf.run_all(int(cfg["seed"]), only)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_VERIFY


COMMANDS = {"queries": cmd_queries, "fit-queries": cmd_fit_queries, "landau": cmd_landau,
            "euler": cmd_euler, "compare": cmd_compare, "verify": cmd_verify}


# ---------------------------------------------------------------------------
# parser


def _plasma_flags(p: argparse.ArgumentParser, hs_run: bool) -> None:
    p.add_argument("--k", type=float, help="wavenumber")
    p.add_argument("--nv", type=int, help="velocity grid points (power of two)")
    p.add_argument("--vmax", type=float, help="velocity cutoff")
    p.add_argument("--amplitude", type=float, help="initial perturbation size")
    p.add_argument("--t0", type=float, help="fit window start")
    if hs_run:
        p.add_argument("--eps", type=float, help="per-step simulation tolerance")
        p.add_argument("--steps", type=int, help="number of time steps")
        p.add_argument("--dt", type=float, help="step size (default 1/alpha)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsvt-hs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON config file")
        return p

    p = add("queries", "query counts over a (t, eps) grid as CSV")
    p.add_argument("--method", choices=["oaa", "fpaa", "both"])
    p.add_argument("--t", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--t-range", dest="t_range", nargs=3, type=float, metavar=("LO", "HI", "N"))
    p.add_argument("--eps-range", dest="eps_range", nargs=3, type=float, metavar=("LO", "HI", "N"))
    p.add_argument("--workers", type=int)
    p.add_argument("--out")

    p = add("fit-queries", "fit query-count scaling models, JSON out")
    p.add_argument("--range", choices=["1", "2"])
    p.add_argument("--t-range", dest="t_range", nargs=3, type=float, metavar=("LO", "HI", "N"))
    p.add_argument("--eps-range", dest="eps_range", nargs=3, type=float, metavar=("LO", "HI", "N"))
    p.add_argument("--workers", type=int)
    p.add_argument("--out")

    p = add("landau", "Landau damping via the simulated OAA circuit")
    _plasma_flags(p, True)
    p.add_argument("--csv", help="time-series CSV path")
    p.add_argument("--json", help="fit summary path (stdout if absent)")

    p = add("euler", "Landau damping via forward Euler")
    _plasma_flags(p, False)
    p.add_argument("--dt", type=float)
    p.add_argument("--T", type=float, help="final time")
    p.add_argument("--record-every", dest="record_every", type=int)
    p.add_argument("--csv")
    p.add_argument("--json")

    p = add("compare", "distribution error and omega/gamma errors, HS against fine Euler")
    _plasma_flags(p, True)
    p.add_argument("--dt-ref", dest="dt_ref", type=float)
    p.add_argument("--at-steps", dest="at_steps", nargs="+", type=int)
    p.add_argument("--omega-ref", dest="omega_ref", type=float)
    p.add_argument("--gamma-ref", dest="gamma_ref", type=float)
    p.add_argument("--json")

    p = add("verify", "run the invariant suites")
    p.add_argument("--seed", type=int)
    p.add_argument("--only", nargs="+", help=f"subset of {', '.join(vf.SUITES)}")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args.command, args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
