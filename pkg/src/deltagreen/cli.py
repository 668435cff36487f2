"""``green`` command-line front end.

    green <eval|bound-states|bench|selfcheck> --config PATH
          [--format csv|json] [--out PATH] [--seed N]

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure
(poles, singular probes, failed self-check), 3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, acceptance, config, engine
from .bench import run_bench
from .core import NumericalError, ValidationError
from .spectrum import find_bound_states, thread_count

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_INTERNAL = 0, 1, 2, 3
COMMANDS = ("eval", "bound-states", "bench", "selfcheck")


def fmt(v):
    """17 significant digits; round-trips every float64."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return float(format(f, ".17g")) if math.isfinite(f) else None
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def render(columns, rows, meta, form):
    if form == "json":
        payload = {"meta": _json_value(meta),
                   "rows": [{c: _json_value(r.get(c)) for c in columns} for r in rows]}
        return json.dumps(payload, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


# --------------------------------------------------------------------------
# commands


def _coord_names(prefix, dim):
    return [prefix] if dim == 1 else [f"{prefix}{i + 1}" for i in range(dim)]


def _eval_energy(model, E, X, Y):
    """Rows for one energy; singular probes become row-level errors."""
    be = model.backend()
    try:
        st = engine.build(be, list(model.centers), E)
    except NumericalError as exc:
        return [(None, f"{type(exc).__name__}: {exc}")] * len(X)
    if len(X) == 0:
        return []
    try:
        G = np.atleast_1d(engine.evaluate(st, X, Y))
        return [(complex(g), None) for g in G]
    except NumericalError:
        pass
    out = []
    for x, y in zip(X, Y):
        try:
            out.append((complex(np.atleast_1d(engine.evaluate(st, x[None, :], y[None, :]))[0]), None))
        except NumericalError as exc:
            out.append((None, f"{type(exc).__name__}: {exc}"))
    return out


def cmd_eval(run, args):
    model = run.model
    dim = model.kind.point_dim
    X, Y = run.probes
    xs, ys = _coord_names("x", dim), _coord_names("y", dim)
    columns = ["E_re", "E_im", *xs, *ys, "re_G", "im_G", "error"]
    with ThreadPoolExecutor(thread_count()) as pool:
        per_E = list(pool.map(lambda E: _eval_energy(model, E, X, Y), run.energies))
    rows, failed = [], False
    for E, res in zip(run.energies, per_E):
        Ec = complex(E)
        for (g, err), x, y in zip(res, X, Y):
            row = {"E_re": Ec.real, "E_im": Ec.imag, "error": err or ""}
            row.update({k: float(v) for k, v in zip(xs, x)})
            row.update({k: float(v) for k, v in zip(ys, y)})
            if g is None:
                failed = True
                row.update({"re_G": math.nan, "im_G": math.nan})
            else:
                row.update({"re_G": g.real, "im_G": g.imag})
            rows.append(row)
    meta = _meta("eval", run)
    return columns, rows, meta, EXIT_NUMERICAL if failed else EXIT_OK


def cmd_bound_states(run, args):
    be = run.model.backend()
    centers = list(run.model.centers)
    columns = ["E_root", "residual", "multiplicity", "flag"]
    if not centers:
        return columns, [], _meta("bound-states", run), EXIT_OK
    scan = find_bound_states(be, centers, run.bracket, run.grid, run.tol)
    rows = [{"E_root": r.energy, "residual": r.residual, "multiplicity": r.multiplicity,
             "flag": r.flag} for r in scan.roots]
    meta = _meta("bound-states", run)
    meta.update({"bracket": list(scan.bracket), "grid": scan.grid, "tol": scan.tol,
                 "below_bracket": scan.below_bracket, "notes": list(scan.notes)})
    return columns, rows, meta, EXIT_OK


def cmd_bench(run, args):
    if run is not None and run.model.kind.value != "Points1D":
        raise ValidationError(_report("wrong model", "bench runs on the Points1D family"))
    n_max = args.n_max or (run.n_max if run is not None else 256)
    seed = args.seed if args.seed is not None else (run.seed if run is not None else 0)
    if n_max < 16:
        raise ValidationError(_report("bad config", f"bench needs n_max >= 16, got {n_max}"))
    rep = run_bench(int(n_max), seed)
    meta = {"command": "bench", "version": __version__, **rep.meta,
            "fits": {k: f.as_dict() for k, f in rep.fits.items()},
            "note": "counts are deterministic; *_seconds columns are wall times"}
    return list(rep.COLUMNS), rep.rows(), meta, EXIT_OK


def cmd_selfcheck(run, args):
    results = acceptance.run_all(perturb=args.perturb_kernel)
    for r in results:
        print(r.line(), file=sys.stderr)
    rows = [r.as_dict() for r in results]
    columns = ["id", "name", "passed", "measured", "tolerance", "seconds", "detail"]
    ok = all(r.passed for r in results)
    meta = {"command": "selfcheck", "version": __version__, "passed": ok,
            "perturbed": bool(args.perturb_kernel)}
    return columns, rows, meta, EXIT_OK if ok else EXIT_NUMERICAL


def _report(code, msg):
    from .core import ValidationReport, Violation
    return ValidationReport((Violation(code, msg),))


def _meta(command, run):
    m = run.model
    return {"command": command, "version": __version__, "kind": m.kind.value,
            "units": {"hbar": m.units.hbar, "mass": m.units.mass},
            "n_centers": len(m.centers)}


HANDLERS = {"eval": cmd_eval, "bound-states": cmd_bound_states,
            "bench": cmd_bench, "selfcheck": cmd_selfcheck}


def build_parser():
    p = argparse.ArgumentParser(prog="green", description="Green's functions with delta interactions")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--seed", type=int, help="seed for randomized benches")
    p.add_argument("--n-max", type=int, help="largest chain size for bench")
    p.add_argument("--perturb-kernel", action="store_true", help=argparse.SUPPRESS)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        run = None
        if args.config:
            run = config.load(args.config)
        elif args.command in ("eval", "bound-states"):
            run = config.loads("")
        if args.seed is not None and run is not None:
            run.seed = args.seed
        columns, rows, meta, code = HANDLERS[args.command](run, args)
    except ValidationError as exc:
        print("invalid configuration:\n" + str(exc.report), file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - contract: anything else is internal
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    text = render(columns, rows, meta, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
