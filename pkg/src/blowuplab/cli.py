"""Command line: ``blowuplab run | verify-kernels | fit``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import ConfigError, RunSpec, parse_config, spec_from_dict

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


class CSVSink:
    """Writes the header on the first call and one row per later call, flushing each line."""

    def __init__(self, path: Path):
        from .diagnostics import fmt

        self._fmt = fmt
        self.path = path
        try:
            self._fh = open(path, "w", newline="")
        except OSError as e:
            raise OSError(f"cannot open time series {path}: {e}") from e
        self.columns = None
        self.rows = 0

    def __call__(self, row) -> None:
        if self.columns is None:
            self.columns = list(row)
            line = ",".join(self.columns)
        else:
            line = ",".join(self._fmt(v) for v in row)
            self.rows += 1
        self._fh.write(line + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def _snapshotter(spec: RunSpec, out: Path):
    """Observer writing a snapshot every ``snapshot_every`` emitted states, and the callback for the last one."""
    import numpy as np

    from .snapshots import write_contour_csv, write_snapshot

    every = spec.output["snapshot_every"]
    snap_dir = out / "snapshots"
    state = {"count": 0, "last": None}

    def write(obj, k):
        snap_dir.mkdir(parents=True, exist_ok=True)
        if spec.model == "sqg_patch":
            for i, c in enumerate(obj.contours):
                write_contour_csv(snap_dir / f"snap_{k:05d}_c{i}.csv", c.nodes, obj.t, obj.alpha, c.weight)
            return
        if spec.model in ("euler2d", "boussinesq"):
            g = obj.grid
            desc = (f"polar nr={g.nr} ntheta={g.ntheta}" if spec.model == "euler2d"
                    else f"strip nx={g.nx} ny={g.ny} H={g.H!r} Lx={g.Lx!r}")
            fields = {"omega": obj.omega}
            if obj.theta is not None:
                fields["theta"] = obj.theta
        else:
            g = obj.omega.grid
            desc = f"interval n={g.n}" if spec.model == "cky" else f"periodic n={g.n} L={g.L!r}"
            fields = {"omega": np.asarray(obj.omega.values)}
            if obj.theta is not None:
                fields["theta"] = np.asarray(obj.theta.values)
        write_snapshot(snap_dir / f"snap_{k:05d}.bin", spec.model, desc, obj.t, fields)

    def observe(obj):
        state["last"] = obj
        if every and state["count"] % every == 0:
            write(obj, state["count"])
        state["count"] += 1

    def final():
        if state["last"] is not None and not (every and (state["count"] - 1) % every == 0):
            write(state["last"], state["count"] - 1)

    return observe, final


def run(spec: RunSpec, out_dir: str | None = None):
    """Execute ``spec``; the CSV lands in ``out_dir`` (default ``spec.output['dir']``) row by row.

    Returns the solver's ``RunReport``; ``report.txt`` in the same directory
    records its verdict and scalar extras.
    """
    import numpy as np

    out = Path(out_dir or spec.output["dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out}: {e}") from e
    sink = CSVSink(out / spec.output["csv"])
    observe, final = _snapshotter(spec, out)
    m, g, tm, p = spec.model, spec.grid, spec.time, spec.params
    try:
        if m in ("clm", "degregorio", "hl", "cky"):
            from .models1d import StepController, run_cky, run_periodic

            ctl = StepController(dt=tm["dt"], dt_max=tm["dt_max"], cfl_target=tm["cfl"])
            if m == "cky":
                rep = run_cky(g["n"], spec.t_end, ctl, sink, amplitude=p["amplitude"], observer=observe)
            else:
                rep = run_periodic(m, g["n"], spec.t_end, ctl, sink, L=p["L"], amplitude=p.get("amplitude", 1e4),
                                   tracker_count=p.get("tracker_levels", 9), observer=observe)
        elif m == "euler2d":
            from .fields2d import FlowController, FlowState2D, KSTracking, PolarGrid, ks_initial_vorticity, run_euler

            grid = PolarGrid(g["nr"], g["ntheta"])
            st = FlowState2D("euler_disk", grid, 0.0, ks_initial_vorticity(grid, p["eps_s"]), symmetry_enforced=True)
            rep = run_euler(st, spec.t_end, FlowController(tm["dt_max"], tm["cfl"]), sink,
                            KSTracking(delta=p["delta"]), observer=observe)
        elif m == "boussinesq":
            from .fields2d import FlowController, FlowState2D, StripGrid, boussinesq_initial_data, run_boussinesq

            grid = StripGrid(g["nx"], g["ny"])
            w0, th0 = boussinesq_initial_data(grid, p["amplitude"], p["height"])
            st = FlowState2D("boussinesq_strip", grid, 0.0, w0, th0, symmetry_enforced=True)
            rep = run_boussinesq(st, spec.t_end, FlowController(tm["dt_max"], tm["cfl"]), sink, observer=observe)
        else:
            from .sqg_patch import PatchController, PatchSystem, Spacing, initial_patch, run_patch

            spacing = Spacing(h_max=g["h_max"], h_floor=g["h_floor"])
            system = PatchSystem([initial_patch(p["eps"], spacing=spacing)], p["alpha"])
            ctl = PatchController(dt_max=tm["dt_max"], cfl=tm["cfl"], spacing=spacing)
            rep = run_patch(system, spec.t_end, sink, ctl, eps=p["eps"], delta_alpha=p["delta_alpha"],
                            observer=observe)
        final()
    finally:
        sink.close()

    lines = [f"model = {m}", f"verdict = {rep.verdict}", f"reason = {rep.reason}", f"t = {rep.t!r}",
             f"steps = {rep.steps}", f"rows = {sink.rows}"]
    for k, v in rep.extras.items():
        if isinstance(v, (bool, int, float, str)):
            lines.append(f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}")
        elif isinstance(v, np.ndarray) and v.size <= 8:
            lines.append(f"{k} = {' '.join(repr(float(x)) for x in v.ravel())}")
        elif isinstance(v, list) and k == "violations":
            lines.append(f"{k} = {len(v)}")
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    return rep


def _load_spec(path: str | None, default_model: str | None = None) -> RunSpec:
    if path is None:
        if default_model is None:
            raise ConfigError("--config: required")
        return spec_from_dict({"model": default_model})
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"--config: cannot read {path}: {e}") from None
    return parse_config(text, default_model)


def _cmd_run(args) -> int:
    spec = _load_spec(args.config)
    rep = run(spec, args.out)
    print(f"verdict: {rep.verdict} ({rep.reason}) at t = {rep.t:.6g} after {rep.steps} steps")
    return 0


def _cmd_verify(args) -> int:
    from .verify import verify_kernels

    spec = _load_spec(args.config, default_model="clm")
    rep = verify_kernels(spec.verify, spec.seed)
    text = rep.to_text()
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verify.txt").write_text(text)
    if not rep.passed:
        bad = rep.failures()[0]
        print(f"failed: {bad.name}: {bad.detail}", file=sys.stderr)
        return 1
    return 0


def _cmd_fit(args) -> int:
    from .diagnostics import FitRejected, TimeSeries, estimate_blowup_time, fit_double_exponential, fit_exponential

    try:
        series = TimeSeries.from_csv(Path(args.csv).read_text())
    except OSError as e:
        raise ConfigError(f"--csv: cannot read {args.csv}: {e}") from None
    window = None if args.t0 is None and args.t1 is None else (
        args.t0 if args.t0 is not None else -float("inf"), args.t1 if args.t1 is not None else float("inf"))
    try:
        if args.kind == "exp":
            fit = fit_exponential(series, args.column, window)
        elif args.kind == "double_exp":
            fit = fit_double_exponential(series, args.column, window)
        else:
            fit = estimate_blowup_time(series, args.column, args.exponent, window, order=args.order)
    except FitRejected as e:
        print(f"fit rejected: {e.reason}", file=sys.stderr)
        return 1
    text = fit.to_text()
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"fit_{args.column}_{args.kind}.txt").write_text(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="blowuplab", description=__doc__)
    ap.add_argument("--threads", type=int, default=None,
                    help="thread count for the numerical libraries (applied before they load)")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a model from a TOML config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    r.set_defaults(func=_cmd_run)
    v = sub.add_parser("verify-kernels", help="run the kernel and lemma verifiers")
    v.add_argument("--config", default=None, help="config whose [verify] table and seed are used")
    v.add_argument("--out", default=None)
    v.set_defaults(func=_cmd_verify)
    f = sub.add_parser("fit", help="fit a growth law to a CSV column")
    f.add_argument("--csv", required=True)
    f.add_argument("--column", required=True)
    f.add_argument("--kind", choices=("exp", "double_exp", "blowup"), default="double_exp")
    f.add_argument("--exponent", type=float, default=None, help="blow-up exponent hint p")
    f.add_argument("--order", type=int, choices=(1, 2), default=1,
                   help="blowup: polynomial degree of the v^(-1/p) fit (2 adds a curvature term)")
    f.add_argument("--t0", type=float, default=None)
    f.add_argument("--t1", type=float, default=None)
    f.add_argument("--out", default=None)
    f.set_defaults(func=_cmd_fit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("--threads: must be >= 1", file=sys.stderr)
            return 2
        for var in _THREAD_VARS:
            os.environ[var] = str(args.threads)
    try:
        return args.func(args)
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
