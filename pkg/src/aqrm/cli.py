"""Command-line sweeps: spectra, landscapes, Juddian tables and Berry phases.

Exit codes: 0 success, 2 invalid arguments, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__, kernels
from .adiabatic import spectrum_aa
from .berry import ProximityError, ResolutionError, DegeneracyError, berry_phase, berry_phase_wilson, rectangle_loop
from .constraints import juddian_roots
from .exactdiag import ConvergenceError, TruncationConfig, converged_spectrum
from .gaa import spectrum_gaa
from .model import BlockIndex, ModelParams, ParameterError, validate

METHODS = ("exact", "aa", "gaa", "gaa-kbar")
SPECTRUM_HEADER = ["method", "g", "epsilon", "level_index", "energy", "energy_rescaled"]
LANDSCAPE_HEADER = ["g", "epsilon", "level_index", "energy_rescaled"]

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if self.steps < 2:
            raise UsageError("a swept axis needs at least 2 steps")
        if not self.lo < self.hi:
            raise UsageError("axis minimum must be below its maximum")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class SweepSpec:
    g_axis: Axis | None
    eps_axis: Axis | None
    g_fixed: float
    eps_fixed: float
    delta: float
    omega: float
    methods: tuple
    k_levels: int
    tol: float

    def g_values(self):
        return self.g_axis.values() if self.g_axis else np.array([self.g_fixed])

    def eps_values(self):
        return self.eps_axis.values() if self.eps_axis else np.array([self.eps_fixed])


def fmt(x: float) -> str:
    # shortest repr that round-trips bit-exactly
    return repr(float(x))


def spectrum_point(args):
    """Energies of every requested method at one (g, eps); top level for pickling."""
    delta, omega, g, eps, methods, k, tol = args
    params = validate(ModelParams(delta=delta, omega=omega, g=float(g), epsilon=float(eps)))
    out = {}
    for m in methods:
        if m == "exact":
            cfg = TruncationConfig(n_max=max(1024, k), tol=tol, k_levels=k)
            out[m] = converged_spectrum(params, cfg).energies
        elif m == "aa":
            out[m] = spectrum_aa(params, k).energies
        else:
            out[m] = spectrum_gaa(params, k, kbar=(m == "gaa-kbar"), warn=False).energies
    return out


def run_points(tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [spectrum_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(spectrum_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def spectrum_rows(spec: SweepSpec, jobs: int = 1):
    points = [(g, e) for g in spec.g_values() for e in spec.eps_values()]
    tasks = [(spec.delta, spec.omega, g, e, spec.methods, spec.k_levels, spec.tol) for g, e in points]
    results = run_points(tasks, jobs)
    rows = []
    for (g, e), res in zip(points, results):
        for m, energies in res.items():
            for i, en in enumerate(energies):
                rows.append((m, float(g), float(e), i, float(en), float(en + g * g / spec.omega)))
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    return rows


def landscape_rows(spec: SweepSpec, levels: range, jobs: int = 1):
    method = spec.methods[0]
    k = max(levels) + 1
    spec = SweepSpec(spec.g_axis, spec.eps_axis, spec.g_fixed, spec.eps_fixed, spec.delta, spec.omega,
                     (method,), k, spec.tol)
    rows = []
    for m, g, e, i, _, resc in spectrum_rows(spec, jobs):
        if i in levels:
            rows.append((g, e, i, resc))
    return rows


def juddian_records(n, l, delta, omega, g_max=None, certify=False):
    roots = juddian_roots(n, l, delta, omega, g_max, certify=certify)
    return [{
        "n": r.n, "l": r.l, "delta": delta, "omega": omega, "g_star": r.g_star,
        "energy": r.energy, "rescaled_energy": r.energy + r.g_star ** 2 / omega,
        "certified": r.certified, "gap": r.gap,
    } for r in roots]


def berry_record(g_range, eps_range, steps, n, l, band, delta, omega, method="gaa",
                 phase_method="analytic", orientation="clockwise"):
    loop = rectangle_loop(g_range, eps_range, steps, orientation)
    idx = BlockIndex(n, l)
    if phase_method == "analytic":
        res = berry_phase(loop, idx, band, delta, omega, method)
        over_pi = int(round(res.phase / math.pi))
    else:
        res = berry_phase_wilson(loop, idx, band, delta, omega, method)
        over_pi = res.phase / math.pi
    return {
        "winding": res.winding,
        "phase_over_pi": over_pi,
        "phase": res.phase,
        "method": res.method,
        "tunneling": method,
        "band": band,
        "loop": {"g_min": g_range[0], "g_max": g_range[1], "epsilon_min": eps_range[0],
                 "epsilon_max": eps_range[1], "steps": loop.steps, "orientation": orientation},
        "pair": {"n": n, "l": l},
        "delta": delta,
        "omega": omega,
    }


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def render_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def emit(text: str, output: str | None, meta: dict | None = None):
    """Write atomically: a failure never leaves a partial data file behind."""
    if output in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(output))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".aqrm-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, output)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    if meta is not None:
        with open(output + ".meta.json", "w") as fh:
            json.dump(meta, fh, indent=2)
            fh.write("\n")


def parse_levels(text: str) -> range:
    if "-" in text:
        a, b = text.split("-", 1)
        lo, hi = int(a), int(b)
    else:
        lo, hi = 0, int(text) - 1
    if lo < 0 or hi < lo:
        raise UsageError(f"bad level selection {text!r}")
    return range(lo, hi + 1)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aqrm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def physics(sp):
        sp.add_argument("--delta", type=float, required=True)
        sp.add_argument("--omega", type=float, default=1.0)

    def output(sp, default_format):
        sp.add_argument("--format", choices=("csv", "json"), default=default_format)
        sp.add_argument("--output", default=None, help="output path (default: stdout)")

    def sweep(sp):
        sp.add_argument("--g", type=float, default=None, help="fixed coupling when g is not swept")
        sp.add_argument("--g-min", type=float)
        sp.add_argument("--g-max", type=float)
        sp.add_argument("--g-steps", type=int)
        sp.add_argument("--epsilon", type=float, default=None)
        sp.add_argument("--epsilon-min", type=float)
        sp.add_argument("--epsilon-max", type=float)
        sp.add_argument("--epsilon-steps", type=int)
        sp.add_argument("--tol", type=float, default=1e-8, help="exact-diagonalisation convergence tolerance")
        sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    sp = sub.add_parser("spectrum", help="energies along a g and/or epsilon sweep")
    physics(sp)
    sweep(sp)
    sp.add_argument("--levels", type=int, default=10)
    sp.add_argument("--method", default="exact,aa,gaa", help="comma-separated subset of " + ",".join(METHODS))
    output(sp, "csv")

    sp = sub.add_parser("landscape", help="rescaled energies on a (g, epsilon) grid")
    physics(sp)
    sweep(sp)
    sp.add_argument("--levels", default="2-7", help="K (lowest K) or A-B (0-based inclusive)")
    sp.add_argument("--method", choices=METHODS, default="exact")
    output(sp, "csv")

    sp = sub.add_parser("juddian", help="exact crossing points of one level pair")
    physics(sp)
    sp.add_argument("--pair-n", type=int, required=True)
    sp.add_argument("--bias-l", type=int, default=0)
    sp.add_argument("--g-max", type=float, default=None)
    sp.add_argument("--certify", action="store_true")
    output(sp, "json")

    sp = sub.add_parser("berry", help="geometric phase around a rectangular loop")
    physics(sp)
    sp.add_argument("--g-min", type=float, required=True)
    sp.add_argument("--g-max", type=float, required=True)
    sp.add_argument("--epsilon-min", type=float, required=True)
    sp.add_argument("--epsilon-max", type=float, required=True)
    sp.add_argument("--loop-steps", type=int, default=2000)
    sp.add_argument("--pair-n", type=int, required=True)
    sp.add_argument("--bias-l", type=int, default=0)
    sp.add_argument("--band", choices=("plus", "minus"), default="plus")
    sp.add_argument("--method", choices=("aa", "gaa", "gaa-kbar"), default="gaa")
    sp.add_argument("--phase-method", choices=("analytic", "wilson"), default="analytic")
    sp.add_argument("--orientation", choices=("clockwise", "counterclockwise"), default="clockwise")
    output(sp, "json")
    return p


def _axis(lo, hi, steps, name):
    given = [v is not None for v in (lo, hi, steps)]
    if not any(given):
        return None
    if not all(given):
        raise UsageError(f"--{name}-min, --{name}-max and --{name}-steps go together")
    return Axis(lo, hi, steps)


def sweep_spec(a, methods, k_levels) -> SweepSpec:
    g_axis = _axis(a.g_min, a.g_max, a.g_steps, "g")
    eps_axis = _axis(a.epsilon_min, a.epsilon_max, a.epsilon_steps, "epsilon")
    if g_axis is None and a.g is None:
        raise UsageError("give either --g or a g sweep")
    if eps_axis is None and a.epsilon is None:
        raise UsageError("give either --epsilon or an epsilon sweep")
    if k_levels < 1:
        raise UsageError("--levels must be positive")
    spec = SweepSpec(g_axis, eps_axis, a.g if a.g is not None else 0.0,
                     a.epsilon if a.epsilon is not None else 0.0, a.delta, a.omega,
                     tuple(methods), k_levels, a.tol)
    validate(ModelParams(spec.delta, spec.omega, 0.0, 0.0))
    if (g_axis and g_axis.lo < 0) or (g_axis is None and spec.g_fixed < 0):
        raise UsageError("g must be non-negative")
    return spec


def run(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    meta = {"command": a.command, "argv": list(argv) if argv is not None else sys.argv[1:],
            "version": __version__, "kernel_backend": kernels.BACKEND}
    try:
        if a.command == "spectrum":
            methods = [m.strip() for m in a.method.split(",") if m.strip()]
            bad = [m for m in methods if m not in METHODS]
            if bad or not methods:
                raise UsageError(f"unknown method(s) {bad}; choose from {METHODS}")
            spec = sweep_spec(a, methods, a.levels)
            rows = spectrum_rows(spec, a.jobs)
            if a.format == "csv":
                text = render_csv(SPECTRUM_HEADER, rows)
            else:
                text = render_json([dict(zip(SPECTRUM_HEADER, r)) for r in rows])
        elif a.command == "landscape":
            if None in (a.g_steps, a.epsilon_steps):
                raise UsageError("landscape needs both a g sweep and an epsilon sweep")
            levels = parse_levels(a.levels)
            spec = sweep_spec(a, [a.method], max(levels) + 1)
            rows = landscape_rows(spec, levels, a.jobs)
            if a.format == "csv":
                text = render_csv(LANDSCAPE_HEADER, rows)
            else:
                text = render_json([dict(zip(LANDSCAPE_HEADER, r)) for r in rows])
        elif a.command == "juddian":
            if a.pair_n < 0 or a.bias_l < 0:
                raise UsageError("--pair-n and --bias-l must be non-negative")
            validate(ModelParams(a.delta, a.omega, 0.0, 0.0))
            recs = juddian_records(a.pair_n, a.bias_l, a.delta, a.omega, a.g_max, a.certify)
            if a.format == "json":
                text = render_json(recs)
            else:
                header = ["n", "l", "delta", "omega", "g_star", "energy", "rescaled_energy", "certified", "gap"]
                text = render_csv(header, [[r[h] if r[h] is not None else "" for h in header] for r in recs])
        else:
            validate(ModelParams(a.delta, a.omega, max(a.g_min, 0.0), 0.0))
            if a.g_min < 0:
                raise UsageError("g must be non-negative")
            if a.loop_steps < 4:
                raise UsageError("--loop-steps must be at least 4")
            rec = berry_record((a.g_min, a.g_max), (a.epsilon_min, a.epsilon_max), a.loop_steps,
                               a.pair_n, a.bias_l, a.band, a.delta, a.omega, a.method,
                               a.phase_method, a.orientation)
            if a.format == "json":
                text = render_json(rec)
            else:
                flat = {k: v for k, v in rec.items() if not isinstance(v, dict)}
                flat.update({f"loop_{k}": v for k, v in rec["loop"].items()})
                flat.update({f"pair_{k}": v for k, v in rec["pair"].items()})
                text = render_csv(list(flat), [list(flat.values())])
        emit(text, a.output, meta)
    except (UsageError, ParameterError, ValueError) as exc:
        print(f"aqrm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProximityError as exc:
        print(f"aqrm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConvergenceError, ResolutionError, DegeneracyError, ArithmeticError) as exc:
        print(f"aqrm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
