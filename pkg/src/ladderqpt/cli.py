"""Command-line entry point: ``ladderqpt {sweep,verify,collapse,oracle}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import entanglement as ent
from . import fidelity as fid
from .mps import DegeneratePairError
from .transfer import correlation_length, spin_correlation, spin_correlation_tm

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

QUANTITIES = ("s_single", "s_pair", "xi_e", "xi_c", "c_spin", "fidelity", "d_of_u", "chi_f", "collapse")
PER_N = {"fidelity", "d_of_u", "chi_f"}
ENTROPY = {"s_single", "s_pair"}
COLUMNS = ("quantity", "variable", "x", "N", "n", "value", "derivative1", "derivative2", "aux1", "aux2")
DEFAULT_N = (100,)
FIDELITY_MIN_ABS = 1e-3


class UsageError(Exception):
    pass


@dataclass
class SweepConfig:
    quantity: str
    var: str = "u"
    min: float = 0.0
    max: float = 1.0
    points: int = 11
    log: bool = False
    n_sep: int = 1000
    N: tuple[int, ...] = DEFAULT_N
    delta: float = fid.DEFAULT_DELTA
    parity: int = 0
    seed: int = 0x5EED
    units: str = "bits"
    out: str | None = None
    format: str = "csv"
    workers: int = 1

    def validate(self) -> None:
        if self.quantity not in QUANTITIES:
            raise UsageError(f"unknown quantity {self.quantity!r}; choose from {', '.join(QUANTITIES)}")
        if self.var not in ("u", "inv_u"):
            raise UsageError("variable must be u or inv-u")
        if not self.min < self.max:
            raise UsageError("grid min must be smaller than max")
        if self.points < 2:
            raise UsageError("need at least 2 grid points")
        if self.log and self.min <= 0:
            raise UsageError("log grid needs min > 0")
        if self.n_sep < 1:
            raise UsageError("--n-sep must be >= 1")
        if any(N < 1 for N in self.N):
            raise UsageError("every N must be >= 1")
        if self.units not in ("bits", "nats"):
            raise UsageError("units must be bits or nats")
        if self.format not in ("csv", "json"):
            raise UsageError("format must be csv or json")

    def grid(self) -> np.ndarray:
        if self.log:
            return np.logspace(math.log10(self.min), math.log10(self.max), self.points)
        return np.linspace(self.min, self.max, self.points)


# --- row evaluation ------------------------------------------------------------


def _kw(var: str, x: float) -> dict:
    return {"u": x} if var == "u" else {"inv_u": x}


def _guard(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (DegeneratePairError, ValueError, ZeroDivisionError, OverflowError):
        return math.nan


def _evaluate(task) -> dict:
    q, var, x, N, cfg = task
    row = dict.fromkeys(COLUMNS, "")
    row.update(quantity=q, variable=var, x=x)
    kw = _kw(var, x)
    mirror = var == "inv_u"
    if q == "s_single":
        row["value"] = ent.s_single(**kw)
        row["derivative1"] = ent.entropy_derivative("single", x, 1, var=var).value
        row["derivative2"] = ent.entropy_derivative("single", x, 2, var=var).value
    elif q == "s_pair":
        n, p = cfg["n_sep"], cfg["parity"]
        row.update(n=n, value=ent.s_pair(n=n, parity=p, **kw))
        row["derivative1"] = ent.entropy_derivative("pair", x, 1, n, var=var, parity=p).value
        row["derivative2"] = ent.entropy_derivative("pair", x, 2, n, var=var, parity=p).value
    elif q == "xi_e":
        row["value"] = ent.xi_closed(**kw)
        row["aux1"] = correlation_length(**kw)
    elif q == "xi_c":
        row["value"] = correlation_length(**kw)
    elif q == "c_spin":
        n, p = cfg["n_sep"], cfg["parity"]
        row.update(n=n, value=spin_correlation(n=n, parity=p, **kw))
        row["aux1"] = spin_correlation_tm(n=n, parity=p, **kw)
    elif q == "fidelity":
        row["N"] = N
        if abs(x) < FIDELITY_MIN_ABS:
            row["value"] = row["aux1"] = math.nan
        else:
            f = fid.fidelity_closed_tilde if mirror else fid.fidelity_closed
            pt = _guard(f, x, x + cfg["delta"], N)
            if isinstance(pt, fid.FidelityPoint):
                row.update(value=pt.value, aux1=pt.log_value)
            else:
                row["value"] = row["aux1"] = math.nan
    elif q == "d_of_u":
        row["N"] = N
        if abs(x) < FIDELITY_MIN_ABS:
            row["value"] = row["aux1"] = row["aux2"] = math.nan
        else:
            f = fid.d_tilde if mirror else fid.d_of_u
            raw = _guard(f, x, N, normalized=False)
            norm = _guard(f, x, N, normalized=True)
            row.update(value=raw, aux1=norm, aux2=raw - norm)
    elif q == "chi_f":
        row["N"] = N
        row["value"] = math.nan if abs(x) < FIDELITY_MIN_ABS else _guard(fid.chi_f, x, N, cfg["delta"], mirror=mirror)
    if cfg["units"] == "nats" and q in ENTROPY:
        for k in ("value", "derivative1", "derivative2"):
            row[k] *= math.log(2.0)
    return row


def _collapse_rows(N_list, x_grid) -> tuple[list[dict], fid.CollapseDataset]:
    data = fid.collapse_dataset(tuple(N_list), tuple(x_grid))
    rows = []
    for r in sorted(data.rows, key=lambda r: (r.x, r.N)):
        row = dict.fromkeys(COLUMNS, "")
        row.update(quantity="collapse", variable="inv_u", x=r.t, N=r.N, value=r.d_over_n, aux1=r.x)
        rows.append(row)
    return rows, data


def sweep_rows(cfg: SweepConfig) -> list[dict]:
    cfg.validate()
    grid = cfg.grid()
    if cfg.quantity == "collapse":
        return _collapse_rows(sorted(cfg.N), grid)[0]
    shared = {"n_sep": cfg.n_sep, "parity": cfg.parity, "delta": cfg.delta, "units": cfg.units}
    Ns = sorted(cfg.N) if cfg.quantity in PER_N else [""]
    tasks = [(cfg.quantity, cfg.var, float(x), N, shared) for x in grid for N in Ns]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_evaluate, tasks))
    return [_evaluate(t) for t in tasks]


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def render(rows: list[dict], fmt: str, meta: dict | None = None) -> str:
    if fmt == "json":
        clean = [{k: (None if v == "" else (v if isinstance(v, str) else _jsonable(v))) for k, v in r.items()} for r in rows]
        return json.dumps({"meta": meta or {}, "columns": list(COLUMNS), "rows": clean}, indent=1, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in COLUMNS])
    return buf.getvalue()


def _jsonable(v):
    v = float(v) if not isinstance(v, (int, np.integer)) else int(v)
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8", newline="\n")


# --- argument parsing -----------------------------------------------------------


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--var", choices=("u", "inv-u"), default=None, help="sweep variable (default u)")
    p.add_argument("--min", type=float, default=None)
    p.add_argument("--max", type=float, default=None)
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--log", action="store_true", help="logarithmic grid spacing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ladderqpt", description="Entanglement and fidelity of the MP spin-ladder ground state.")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="evaluate one quantity on a parameter grid")
    sw.add_argument("--quantity", choices=QUANTITIES, default=None)
    _add_grid(sw)
    sw.add_argument("--n-sep", type=int, default=None, help="rung separation n (s_pair, c_spin)")
    sw.add_argument("--parity", type=int, choices=(0, 1), default=None)
    sw.add_argument("--N", type=int, action="append", default=None, help="unit cells; repeatable")
    sw.add_argument("--delta", type=float, default=None)
    sw.add_argument("--seed", type=int, default=None)
    sw.add_argument("--units", choices=("bits", "nats"), default=None)
    sw.add_argument("--workers", type=int, default=None)
    sw.add_argument("--out", default=None)
    sw.add_argument("--format", choices=("csv", "json"), default=None)
    sw.add_argument("--config", default=None, help="JSON file with default values; flags win")

    ve = sub.add_parser("verify", help="run the acceptance suite")
    ve.add_argument("--level", choices=("quick", "full"), default="quick")
    ve.add_argument("--criteria", default=None, help="comma-separated criterion numbers")
    ve.add_argument("--golden", default=None, help="golden-data file to check")
    ve.add_argument("--json", dest="json_out", default=None, help="write the JSON report here ('-' for stdout)")

    co = sub.add_parser("collapse", help="D'/N versus N u~^2 and the collapse exponent")
    co.add_argument("--N", type=int, action="append", default=None)
    co.add_argument("--min", type=float, default=1e-2, help="smallest N u~^2")
    co.add_argument("--max", type=float, default=1e2, help="largest N u~^2")
    co.add_argument("--points", type=int, default=9)
    co.add_argument("--out", default=None)
    co.add_argument("--format", choices=("csv", "json"), default="csv")

    orc = sub.add_parser("oracle", help="brute-force values on a small ring")
    orc.add_argument("--u", type=float, default=None)
    orc.add_argument("--rungs", type=int, default=4)
    orc.add_argument("--n-sep", type=int, default=None)
    orc.add_argument("--delta", type=float, default=0.1)
    orc.add_argument("--samples", type=int, default=2000)
    orc.add_argument("--seed", type=int, default=0x5EED)
    orc.add_argument("--write-golden", default=None, metavar="PATH")
    orc.add_argument("--check-golden", default=None, metavar="PATH")
    return parser


_SWEEP_DEFAULTS = {
    "var": "u", "min": 0.0, "max": 1.0, "points": 11, "n_sep": 1000, "parity": 0, "N": list(DEFAULT_N),
    "delta": fid.DEFAULT_DELTA, "seed": 0x5EED, "units": "bits", "workers": 1, "out": None, "format": "csv",
}


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def sweep_config(args: argparse.Namespace) -> SweepConfig:
    merged = dict(_SWEEP_DEFAULTS)
    merged.update(_load_config(args.config))
    for key in ("quantity", "var", "min", "max", "points", "n_sep", "parity", "N", "delta", "seed", "units", "workers", "out", "format"):
        val = getattr(args, key)
        if val is not None:
            merged[key] = val
    if args.log:
        merged["log"] = True
    merged["var"] = merged["var"].replace("-", "_")
    unknown = set(merged) - set(SweepConfig.__dataclass_fields__) - {"config"}
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if merged.get("quantity") is None:
        raise UsageError("--quantity is required")
    merged["N"] = tuple(int(n) for n in merged["N"])
    try:
        return SweepConfig(**merged)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc


def cmd_sweep(args) -> int:
    cfg = sweep_config(args)
    rows = sweep_rows(cfg)
    meta = {"quantity": cfg.quantity, "var": cfg.var, "units": cfg.units, "seed": cfg.seed}
    _emit(render(rows, cfg.format, meta), cfg.out)
    return EXIT_OK


def cmd_collapse(args) -> int:
    if not args.min < args.max or args.min <= 0 or args.points < 2:
        raise UsageError("collapse grid needs 0 < min < max and points >= 2")
    Ns = sorted(args.N or fid.DEFAULT_COLLAPSE_N)
    grid = np.logspace(math.log10(args.min), math.log10(args.max), args.points)
    rows, data = _collapse_rows(Ns, grid)
    nu = fid.estimate_nu(Ns, tuple(grid))
    meta = {"score": data.score(), "nu": nu.nu, "nu_score": nu.score}
    _emit(render(rows, args.format, meta), args.out)
    print(f"collapse score (max relative spread of D'/N): {data.score():.6g}", file=sys.stderr)
    print(f"spread-minimizing nu in {nu.bounds}: {nu.nu:.6g} (score {nu.score:.6g})", file=sys.stderr)
    return EXIT_OK


def cmd_oracle(args) -> int:
    from . import oracle

    if args.write_golden:
        path = oracle.write_golden(args.write_golden)
        print(f"wrote {path}")
        return EXIT_OK
    if args.check_golden:
        bad = oracle.check_golden(args.check_golden)
        for m in bad:
            print(f"MISMATCH {m}")
        print("golden data OK" if not bad else f"{len(bad)} mismatches")
        return EXIT_FAIL if bad else EXIT_OK
    if args.u is None:
        raise UsageError("--u is required")
    u, L = args.u, args.rungs
    psi = oracle.dense_state(u, L)
    n = args.n_sep if args.n_sep is not None else L // 2
    report = {
        "u": u,
        "rungs": L,
        "norm_squared": oracle.exact_norm_squared(u, L),
        "overlap": oracle.exact_overlap(u, L),
        "entropy_single": oracle.exact_entropy(psi, [0]),
        "entropy_pair": oracle.exact_entropy(psi, [0, n]),
        "n": n,
        "energy_residual": oracle.exact_energy_residual(u, L),
    }
    if L >= 4 and 1 <= n <= L - 2:
        report["dimer_correlation"] = oracle.dimer_correlation(u, L, n)
    if u != 0.0:
        avg = oracle.exact_average_fidelity(u, args.delta, L, args.samples, args.seed)
        report.update(average_fidelity=avg.mean, average_fidelity_stderr=avg.stderr, delta=args.delta)
    print(json.dumps(report, indent=1))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import format_report, run_acceptance

    crit = None
    if args.criteria:
        try:
            crit = [int(c) for c in args.criteria.split(",")]
        except ValueError as exc:
            raise UsageError("--criteria takes comma-separated integers") from exc
    checks = run_acceptance(args.level, crit, golden=args.golden)
    print(format_report(checks))
    if args.json_out:
        payload = json.dumps([c.as_dict() for c in checks], indent=1) + "\n"
        _emit(payload, args.json_out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"sweep": cmd_sweep, "verify": cmd_verify, "collapse": cmd_collapse, "oracle": cmd_oracle}
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
