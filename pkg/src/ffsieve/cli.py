"""Command-line runner: ``ffsieve --p 2 --n 1 --N 2 --Q 1 --suite all``.

Exit codes: 0 all checks passed, 1 a hard check reported a violation,
2 usage, 3 validation, 4 I/O, 5 internal error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import math
import os
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from fractions import Fraction

from . import __version__
from .farey import EXPLICIT, FULL, KPOWER, ModuliFamily
from .gfpoly import FieldConfig, is_prime
from .suites import BALL_LIMIT, PointContext, algebra_suite, bound_suite, count_suite, duality_suite, \
    orthogonality_suite

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3, 4, 5
SUITES = ("verify", "bound", "count", "duality", "all")
GRID_PARAMS = ("p", "m", "n", "N", "Q", "k")
S_Q_LIMIT = 500_000


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class ExperimentConfig:
    p: int = 2
    m: int = 1
    h: tuple | None = None
    n: int = 1
    N: int = 1
    Q: int = 1
    k: int = 1
    family: str = FULL
    family_path: str | None = None
    trials: int = 32
    seed: int = 0
    suite: str = "all"
    out: str | None = None
    format: str = "json"
    grid: tuple = ()  # ((param, lo, hi), ...)
    wall_clock: bool = False

    def validate(self) -> None:
        def bad(msg):
            raise CliError(EXIT_VALIDATION, msg)

        if not is_prime(self.p):
            bad(f"p = {self.p} is not prime")
        for name in ("m", "n", "k"):
            if getattr(self, name) < 1:
                bad(f"{name} must be >= 1")
        for name in ("N", "Q", "trials"):
            if getattr(self, name) < 0:
                bad(f"{name} must be >= 0")
        if not 0 <= self.seed < 2**64:
            bad("seed must be a 64-bit unsigned integer")
        if self.p ** self.m > FieldConfig.MAX_ORDER:
            bad(f"field order {self.p}^{self.m} is beyond desk scale")
        if self.family not in (FULL, KPOWER, EXPLICIT):
            bad(f"unknown family {self.family!r}")
        if self.family == EXPLICIT and not self.family_path:
            bad("explicit family needs a path")
        if self.suite not in SUITES:
            bad(f"unknown suite {self.suite!r}")
        if self.format not in ("json", "csv"):
            bad(f"unsupported format {self.format!r}")
        seen = set()
        for name, lo, hi in self.grid:
            if name not in GRID_PARAMS:
                bad(f"grid parameter {name!r} not one of {', '.join(GRID_PARAMS)}")
            if name in seen:
                bad(f"grid parameter {name!r} given twice")
            if lo > hi:
                bad(f"empty grid range {name}={lo}..{hi}")
            seen.add(name)

    def echo(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ("grid", "h")}
        d["h"] = list(self.h) if self.h is not None else None
        d["grid"] = [f"{a}={b}..{c}" for a, b, c in self.grid]
        return d

    def to_text(self) -> str:
        """The config as a key=value file that ``--config`` reads back."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None or f.name in ("grid", "family_path"):
                continue
            if f.name == "family" and v == EXPLICIT:
                v = f"{EXPLICIT}:{self.family_path}"
            elif f.name == "h":
                v = " ".join(map(str, v))
            elif f.name == "wall_clock":
                v = str(v).lower()
            lines.append(f"{f.name}={v}")
        lines += [f"grid={a}={b}..{c}" for a, b, c in self.grid]
        return "\n".join(lines) + "\n"


# -- parsing -------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_USAGE, message)


def _grid_spec(text: str) -> tuple:
    try:
        name, rng = text.split("=", 1)
        lo, hi = rng.split("..", 1)
        return name.strip(), int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid spec {text!r} is not <param>=<lo>..<hi>") from None


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(c) for c in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a coefficient list") from None


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ffsieve", description="Large sieve laboratory over F_q[t].")
    ap.add_argument("--config", help="flat key=value file; flags override it")
    ap.add_argument("--p", type=int)
    ap.add_argument("--m", type=int)
    ap.add_argument("--h", type=_int_list, help="modulus of F_q over F_p, little-endian coefficients")
    ap.add_argument("--n", type=int)
    ap.add_argument("--N", type=int)
    ap.add_argument("--Q", type=int)
    ap.add_argument("--k", type=int)
    ap.add_argument("--family", help="full | kpower | explicit:<path>")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--suite", choices=SUITES)
    ap.add_argument("--out")
    ap.add_argument("--format", choices=("json", "csv"))
    ap.add_argument("--grid", type=_grid_spec, action="append")
    ap.add_argument("--farey-csv", dest="farey_csv", help="also write S_Q with closeness counts to this CSV")
    ap.add_argument("--wall-clock", dest="wall_clock", action="store_true", default=None,
                    help="record elapsed seconds (makes the report run-dependent)")
    return ap


def read_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read config {path}: {exc}") from None
    out = {}
    grid = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(EXIT_USAGE, f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key == "grid":
            grid.append(value)
        else:
            out[key] = value
    if grid:
        out["grid"] = grid
    return out


_INT_KEYS = ("p", "m", "n", "N", "Q", "k", "trials", "seed")


def _family_fields(text: str) -> dict:
    if text.startswith("explicit:"):
        return {"family": EXPLICIT, "family_path": text[len("explicit:"):]}
    if text in (FULL, KPOWER):
        return {"family": text}
    raise CliError(EXIT_USAGE, f"--family must be full, kpower or explicit:<path>, got {text!r}")


def parse_config(argv: list[str]) -> tuple[ExperimentConfig, dict]:
    """Returns the config and the extra options (``farey_csv``)."""
    args = build_parser().parse_args(argv)
    values: dict = {}
    if args.config:
        for key, value in read_config_file(args.config).items():
            if key in _INT_KEYS:
                try:
                    values[key] = int(value)
                except ValueError:
                    raise CliError(EXIT_USAGE, f"config key {key} needs an integer, got {value!r}") from None
            elif key == "h":
                values["h"] = _int_list(value)
            elif key == "family":
                values.update(_family_fields(value))
            elif key == "grid":
                try:
                    values["grid"] = tuple(_grid_spec(v) for v in value)
                except argparse.ArgumentTypeError as exc:
                    raise CliError(EXIT_USAGE, str(exc)) from None
            elif key == "wall_clock":
                values["wall_clock"] = value.lower() in ("1", "true", "yes")
            elif key in ("suite", "out", "format", "farey_csv", "family_path"):
                values[key] = value
            else:
                raise CliError(EXIT_USAGE, f"unknown config key {key!r}")
    for key in _INT_KEYS + ("h", "suite", "out", "format", "wall_clock"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    if args.family is not None:
        values.pop("family_path", None)
        values.update(_family_fields(args.family))
    if args.grid:
        values["grid"] = tuple(args.grid)
    extra = {"farey_csv": args.farey_csv or values.pop("farey_csv", None)}
    if "h" in values and values["h"] is not None:
        values["h"] = tuple(values["h"])
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg, extra


def load_explicit_family(path: str, cfg: FieldConfig) -> ModuliFamily:
    """One modulus tuple per line; coordinates separated by ``;``, each a
    little-endian list of field codes (``0 1`` is t, ``1 1`` is t+1)."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read explicit family {path}: {exc}") from None
    tuples = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            tup = tuple(cfg.ring.normalize(_int_list(part)) for part in line.split(";"))
        except argparse.ArgumentTypeError as exc:
            raise CliError(EXIT_VALIDATION, f"{path}:{lineno}: {exc}") from None
        if any(c >= cfg.q or c < 0 for f in tup for c in f):
            raise CliError(EXIT_VALIDATION, f"{path}:{lineno}: coefficient outside F_{cfg.q}")
        tuples.append(tup)
    try:
        return ModuliFamily.explicit(tuples)
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, f"{path}: {exc}") from None


# -- running -------------------------------------------------------------------

def grid_points(cfg: ExperimentConfig) -> list[ExperimentConfig]:
    if not cfg.grid:
        return [cfg]
    names = [g[0] for g in cfg.grid]
    ranges = [range(lo, hi + 1) for _, lo, hi in cfg.grid]
    return [replace(cfg, grid=(), **dict(zip(names, combo))) for combo in itertools.product(*ranges)]


def _field(cfg: ExperimentConfig) -> FieldConfig:
    try:
        return FieldConfig(cfg.p, cfg.m, cfg.h)
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from None


def _family(cfg: ExperimentConfig, F: FieldConfig) -> ModuliFamily:
    if cfg.family == EXPLICIT:
        return load_explicit_family(cfg.family_path, F)
    try:
        return ModuliFamily(cfg.family, cfg.n, cfg.k)
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from None


def run_point(cfg: ExperimentConfig) -> dict:
    """All selected suites at one parameter point, in fixed order."""
    F = _field(cfg)
    fam = _family(cfg, F)
    ctx = PointContext(F, fam, cfg.Q, cfg.N, seed=cfg.seed, trials=cfg.trials)
    params = ctx.params()
    selected = SUITES[:4] if cfg.suite == "all" else (cfg.suite,)
    needs_form = any(s in selected for s in ("verify", "duality", "bound"))
    work = {"ball": ctx.ball_size}
    clock: dict = {}
    result = {"params": params, "suites": [], "bound": None, "work": work, "clock": clock}
    if needs_form and not ctx.feasible:
        result["suites"].append({"suite": "skipped", "params": params, "violations": [],
                                 "reason": f"ball size {ctx.ball_size} exceeds {BALL_LIMIT}"})
        return result
    n_points = len(ctx.points)
    if n_points > S_Q_LIMIT:
        result["suites"].append({"suite": "skipped", "params": params, "violations": [],
                                 "reason": f"|S_Q| = {n_points} exceeds {S_Q_LIMIT}"})
        return result
    work["s_q"] = n_points
    result["s_q_hash"] = ctx.s_q_hash

    def timed(name, fn):
        t = time.perf_counter()
        rec = fn()
        clock[name] = time.perf_counter() - t
        return rec

    order = []
    if "verify" in selected:
        order += [("algebra", lambda: algebra_suite(F)), ("orthogonality", lambda: orthogonality_suite(ctx))]
    if "duality" in selected:
        order.append(("duality", lambda: duality_suite(ctx)))
    if "count" in selected:
        order.append(("count", lambda: count_suite(ctx)))
    if "bound" in selected:
        order.append(("bound", lambda: bound_suite(ctx)))
    for name, fn in order:
        rec = timed(name, fn)
        if name == "bound":
            rec, result["bound"] = rec
        rec = {"suite": rec.pop("suite"), "params": params, **rec}
        result["suites"].append(rec)
    if needs_form:
        work["distinct_keys"] = ctx.form.U
    return result


def _workers(n_tasks: int) -> int:
    env = os.environ.get("FFSIEVE_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError:
            raise CliError(EXIT_VALIDATION, f"FFSIEVE_THREADS={env!r} is not an integer") from None
        if cap < 1:
            raise CliError(EXIT_VALIDATION, "FFSIEVE_THREADS must be >= 1")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_tasks))


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run every grid point (in parallel when allowed) and merge in grid order."""
    pts = grid_points(cfg)
    for c in pts:
        c.validate()
    workers = _workers(len(pts))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run_point, pts))
    else:
        results = [run_point(c) for c in pts]
    hashes = [r.get("s_q_hash", "") for r in results]
    if len(results) == 1:
        s_q_hash = hashes[0]
    else:
        s_q_hash = hashlib.sha256("\n".join(hashes).encode()).hexdigest()
    timing = {"points": [dict(params=r["params"], **r["work"]) for r in results]}
    if cfg.wall_clock:
        for entry, r in zip(timing["points"], results):
            entry["seconds"] = r["clock"]
    return {
        "config": cfg.echo(),
        "suites": [s for r in results for s in r["suites"]],
        "bounds": [r["bound"] for r in results if r["bound"] is not None],
        "timing": timing,
        "version": __version__,
        "s_q_hash": s_q_hash,
    }


def has_violations(report: dict) -> bool:
    return any(s.get("violations") for s in report["suites"])


# -- output --------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    s = format(x, ".17g")
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def _dump(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt_float(obj))
    elif isinstance(obj, Fraction):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, complex):
        _dump([obj.real, obj.imag], out)
    elif isinstance(obj, str):
        out.append(_json_str(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(_json_str(str(key)) + ":")
            _dump(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _dump(v, out)
        out.append("]")
    elif hasattr(obj, "item"):  # numpy scalar
        _dump(obj.item(), out)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _json_str(s: str) -> str:
    return json.dumps(s, ensure_ascii=True)


def to_json(report: dict) -> str:
    """Sorted keys, floats with 17 significant digits, trailing newline."""
    out: list = []
    _dump(report, out)
    return "".join(out) + "\n"


CSV_COLUMNS = ("suite", "family", "p", "m", "q", "n", "N", "Q", "k", "status", "violations",
               "s_q", "m_value", "delta_opt", "delta_row", "delta_col", "relative_gap",
               "tineq", "general", "dim1", "kth", "power", "full", "dim1_power", "detail")


def to_csv(report: dict) -> str:
    """One row per (suite, parameter tuple) with the fixed ``CSV_COLUMNS``."""
    bounds = {tuple(sorted(b["params"].items())): b for b in report["bounds"]}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s in report["suites"]:
        params = s.get("params", {})
        row = {c: "" for c in CSV_COLUMNS}
        row.update({k: params.get(k, "") for k in ("family", "p", "m", "q", "n", "N", "Q", "k")})
        row["suite"] = s["suite"]
        row["status"] = "skipped" if s["suite"] == "skipped" else ("fail" if s["violations"] else "pass")
        row["violations"] = len(s["violations"])
        for key in ("s_q", "m_value", "delta_opt", "delta_row", "delta_col", "relative_gap"):
            if key in s:
                row[key] = s[key]
        if s["suite"] == "bound":
            b = bounds[tuple(sorted(params.items()))]
            row["s_q"] = b["s_q"]
            row.update(b["bounds"])
        if s["suite"] == "skipped":
            row["detail"] = s["reason"]
        elif s["suite"] == "count":
            row["detail"] = " ".join(map(str, s["m_table"]))
        w.writerow([_fmt_float(v) if isinstance(v, float) else v for v in (row[c] for c in CSV_COLUMNS)])
    return buf.getvalue()


def emit_report(report: dict, fmt: str) -> bytes:
    if fmt == "json":
        return to_json(report).encode("utf-8")
    if fmt == "csv":
        return to_csv(report).encode("utf-8")
    raise ValueError(f"unsupported format {fmt!r}")


def _write(path: str | None, data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc}") from None


def write_farey_csv(cfg: ExperimentConfig, path: str) -> None:
    from .farey import closeness_counts, farey_csv, farey_set

    F = _field(cfg)
    fam = _family(cfg, F)
    pts = farey_set(fam, cfg.Q, F)
    _write(path, farey_csv(pts, closeness_counts(pts, cfg.N + 2, F), F).encode("utf-8"))


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg, extra = parse_config(argv)
        report = run_experiment(cfg)
        _write(cfg.out, emit_report(report, cfg.format))
        if extra["farey_csv"]:
            write_farey_csv(cfg, extra["farey_csv"])
        return EXIT_VIOLATION if has_violations(report) else EXIT_OK
    except CliError as exc:
        print(f"ffsieve: {exc}", file=sys.stderr)
        return exc.code
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001
        print(f"ffsieve: internal error: {exc!r}", file=sys.stderr)
        traceback.print_exc(file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
