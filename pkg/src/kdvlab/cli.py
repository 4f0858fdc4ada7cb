"""Command-line entry point.

Subcommands map one-to-one onto the package modules; every run echoes its
resolved configuration into the output header, floats are serialized with 17
significant digits, and orderings are fixed, so identical invocations produce
byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 numerical assertion failure,
4 symbolic mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import IO, List, Optional

import numpy as np

from . import __version__
from .coeffs import coeff_closed, coeff_generating, coeff_sum, gamma_exponent
from .errors import ConfigError, NumericalError, SymbolicError
from .experiments import (
    DecayRun,
    LowerEstimateProbe,
    make_decay_pair,
    run_decay,
    run_lower_probe,
)
from .hierarchy import generate_equation
from .multipliers import (
    MultiplierParams,
    apply_weighted_inverse,
    bound_scan,
    default_scan_x_grid,
    dual_route_samples,
    forward_symbol,
    grid_frequencies,
    multiplier_direct,
    multiplier_partial_fractions,
)
from .opalg import class_sum, verify_class_leading, verify_reversal_identity
from .pde import SolverConfig, SpectralField, evolve
from .weights import build_truncated_exp, certify_weight

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_SYMBOLIC = 4


def fmt(x: float) -> str:
    """Round-trip-safe float formatting (17 significant digits)."""
    return format(float(x), ".17g")


def _config_line(args: argparse.Namespace, keys: List[str]) -> str:
    parts = [f"kdvlab-{__version__}", args.command]
    for key in keys:
        parts.append(f"{key}={getattr(args, key)}")
    return "# " + " ".join(parts)


def _open_out(path: Optional[str]) -> IO[str]:
    return open(path, "w") if path else sys.stdout


# -- subcommands ---------------------------------------------------------------


def cmd_hierarchy(args) -> int:
    spec = generate_equation(args.k)
    if args.format == "json":
        payload = {
            "config": {"command": "hierarchy", "k": args.k, "format": args.format,
                       "version": __version__, "seed": args.seed},
            "k": spec.k,
            "n": spec.n,
            "parity_applied": spec.parity_applied,
            "linear_sign": spec.linear_sign,
            "convention": "display",
            "terms": spec.records(display=True),
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        # canonical differential-polynomial serialization of the spatial part
        lines = [_config_line(args, ["k", "format", "seed"])]
        lines.append(f"# order {spec.n}, parity_applied={spec.parity_applied}, "
                     f"linear_sign={spec.linear_sign}, convention=display")
        lines.append(spec.flow_polynomial(display=True).to_text())
        text = "\n".join(lines) + "\n"
    out = _open_out(args.out)
    out.write(text)
    if args.out:
        out.close()
    return EXIT_OK


def cmd_identities(args) -> int:
    lines = [_config_line(args, ["coeffs", "nmax", "operators", "orders", "seed"])]
    failed = False
    if args.coeffs:
        for n in range(3, args.nmax + 1, 2):
            gen = coeff_generating(n)
            ok = all(coeff_sum(n, j) == coeff_closed(n, j) == gen[j] for j in range(n))
            failed |= not ok
            lines.append(f"coeffs n={n} {'PASS' if ok else 'FAIL'}")
    if args.operators:
        for n in (int(v) for v in args.orders.split(",")):
            rev_ok = all(
                verify_reversal_identity(
                    "".join("D" if (bits >> i) & 1 else "B" for i in range(n))
                )
                for bits in range(2 ** n)
            )
            cls_ok = all(verify_class_leading(m, n - m) for m in range(n + 1))
            failed |= not (rev_ok and cls_ok)
            lines.append(f"operators n={n} reversal={'PASS' if rev_ok else 'FAIL'} "
                         f"class={'PASS' if cls_ok else 'FAIL'}")
    out = _open_out(args.out)
    out.write("\n".join(lines) + "\n")
    if args.out:
        out.close()
    if failed:
        raise SymbolicError("identity check failed")
    return EXIT_OK


def _parse_floats(spec: str) -> List[float]:
    return [float(v) for v in spec.split(",") if v]


def cmd_carleman(args) -> int:
    js = [int(v) for v in args.j.split(",")]
    out = _open_out(args.out)
    header = _config_line(args, ["n", "j", "lam", "mode", "seed"])
    try:
        if args.mode == "scan":
            lams = _parse_floats(args.lams)
            taus = _parse_floats(args.taus)
            report = bound_scan(args.n, js, lams, taus, default_scan_x_grid())
            out.write(header + "\n")
            out.write("lambda,tau,j,sup_abs_kernel\n")
            for row in report.rows:
                out.write(f"{fmt(row.lam)},{fmt(row.tau)},{row.j},"
                          f"{fmt(row.sup_abs_kernel)}\n")
            out.write(f"# slack={fmt(report.slack())}\n")
            if report.slack() > args.slack_limit:
                raise NumericalError(f"scan slack {report.slack():.3g} exceeds limit")
        elif args.mode == "roundtrip":
            p = MultiplierParams(args.n, 0, args.lam)
            mx, mt, lx = args.Mx, args.Mt, args.length
            x = -lx / 2 + lx * np.arange(mx) / mx
            t = np.arange(mt) / mt
            X, T = np.meshgrid(x, t, indexing="ij")
            f = np.exp(-(X ** 2) / 4) * np.sin(np.pi * T) ** 2 \
                * np.exp(-((T - 0.5) ** 2) / 0.05)
            xi, tau = grid_frequencies(mx, mt, lx, 1.0)
            h = np.fft.ifft2(forward_symbol(xi[:, None], tau[None, :], p)
                             * np.fft.fft2(f))
            g = apply_weighted_inverse(h, p, lx, 1.0)
            resid = float(np.linalg.norm(g - f) / np.linalg.norm(f))
            out.write(header + "\n")
            out.write("residual\n")
            out.write(fmt(resid) + "\n")
            if resid > 1e-6:
                raise NumericalError(f"round-trip residual {resid:.3g} above 1e-6")
        else:  # dual-route
            worst = 0.0
            for xi, tau, lam, j in dual_route_samples(args.n, args.points, args.seed):
                p = MultiplierParams(args.n, j, lam)
                a = multiplier_direct(xi, tau, p)
                b = multiplier_partial_fractions(xi, tau, p)
                worst = max(worst, abs(a - b) / abs(a))
            out.write(header + "\n")
            out.write("points,worst_rel_disagreement\n")
            out.write(f"{args.points},{fmt(worst)}\n")
            if worst > 1e-12:
                raise NumericalError(f"route disagreement {worst:.3g} above 1e-12")
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def cmd_weights(args) -> int:
    w = build_truncated_exp(args.beta, args.N, variant=args.variant)
    cert = certify_weight(w, max_order=args.max_order)
    out = _open_out(args.out)
    out.write(_config_line(args, ["beta", "N", "variant", "max_order", "seed"]) + "\n")
    out.write("constant,value\n")
    for row in cert.as_rows():
        out.write(f"{row['constant']},{fmt(row['value'])}\n")
    if args.out:
        out.close()
    return EXIT_OK


def _read_numeric_csv(path: str, columns: int) -> np.ndarray:
    """Comma-separated numeric rows; '#' comments and header rows are skipped."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                rows.append([float(v) for v in parts])
            except ValueError:
                continue  # header row
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != columns:
        raise ConfigError(f"{path}: expected {columns} numeric columns")
    return data


def _read_ic(path: str):
    data = _read_numeric_csv(path, 2)
    x, u = data[:, 0], data[:, 1]
    dx = x[1] - x[0]
    if not np.allclose(np.diff(x), dx, rtol=1e-8):
        raise ConfigError("initial-condition grid must be uniform")
    return SpectralField(u, float(x[0]), float(dx * len(x)))


def _write_trajectory(out: IO[str], header: str, traj) -> None:
    out.write(header + "\n")
    out.write("t,x,u\n")
    for snap in traj:
        xs = snap.x
        for i in range(snap.M):
            out.write(f"{fmt(snap.time)},{fmt(xs[i])},{fmt(snap.values[i])}\n")


def _parse_snapshots(spec: Optional[str], t_end: float) -> List[float]:
    if not spec:
        return [0.0, t_end]
    return _parse_floats(spec)


def cmd_simulate(args) -> int:
    u0 = _read_ic(args.ic)
    eq = generate_equation(args.k)
    cfg = SolverConfig(eq=eq, dt=args.dt, t_end=args.t_end,
                       cutoff_mode=args.cutoff_mode,
                       snapshot_times=_parse_snapshots(args.snapshots, args.t_end))
    traj = evolve(u0, cfg)
    out = _open_out(args.out)
    _write_trajectory(out, _config_line(
        args, ["k", "dt", "t_end", "ic", "snapshots", "cutoff_mode", "seed"]), traj)
    if args.out:
        out.close()
    return EXIT_OK


def cmd_decay(args) -> int:
    eq = generate_equation(args.k)
    u1, u2 = make_decay_pair(M=args.M)
    snapshot_times = list(np.round(np.linspace(0.0, args.t_end, args.snapshots), 12))
    run = DecayRun(eq=eq, u1_0=u1, u2_0=u2, beta=args.beta, dt=args.dt,
                   t_end=args.t_end, snapshot_times=snapshot_times,
                   cutoff_mode=args.cutoff_mode)
    rep = run_decay(run)
    out = _open_out(args.out)
    out.write(_config_line(args, ["k", "beta", "M", "dt", "t_end", "snapshots",
                                  "cutoff_mode", "seed"]) + "\n")
    out.write(f"# rate={fmt(rep.rate)} mass_ratio={fmt(rep.mass_ratio())}\n")
    out.write("t,weighted_mass,seam_fraction\n")
    for t, m, s in zip(rep.times, rep.weighted_mass, rep.seam_fraction):
        out.write(f"{fmt(t)},{fmt(m)},{fmt(s)}\n")
    if args.out:
        out.close()
    if args.traj_out:
        with open(args.traj_out, "w") as tout:
            _write_trajectory(tout, _config_line(
                args, ["k", "beta", "M", "dt", "t_end", "snapshots", "cutoff_mode",
                       "seed"]), rep.w_snapshots)
    return EXIT_OK


def _read_trajectory(path: str):
    data = _read_numeric_csv(path, 3)
    # rows: t, x, u; group by t preserving order
    times = np.unique(data[:, 0])
    snaps = []
    for t in times:
        rows = data[data[:, 0] == t]
        x, u = rows[:, 1], rows[:, 2]
        dx = x[1] - x[0]
        snaps.append(SpectralField(u, float(x[0]), float(dx * len(x)), time=float(t)))
    return snaps


def cmd_lower_probe(args) -> int:
    if args.k < 2:
        raise ConfigError("lower-probe needs k >= 2 (growth exponent undefined below order 5)")
    snaps = _read_trajectory(args.traj)
    n = 2 * args.k + 1
    g = gamma_exponent(n, n - 2, 0)
    probe = LowerEstimateProbe(w_snapshots=snaps, n=n, r=args.r,
                               R_values=np.arange(args.Rmin, args.Rmax + 1e-9,
                                                  args.Rstep))
    rep = run_lower_probe(probe, gamma=float(g.base))
    out = _open_out(args.out)
    out.write(_config_line(args, ["traj", "k", "r", "Rmin", "Rmax", "Rstep",
                                  "seed"]) + "\n")
    out.write(f"# w_norm_Q={fmt(rep.w_norm_Q)} gamma={g}\n")
    out.write("R,A_R,R_pow_gamma,log_A_R,implied_constant,vacuous\n")
    for row in rep.rows:
        out.write(f"{fmt(row.R)},{fmt(row.A_R)},{fmt(row.R_pow_gamma)},"
                  f"{fmt(row.log_A_R)},{fmt(row.implied_constant)},"
                  f"{int(row.vacuous)}\n")
    if args.out:
        out.close()
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kdvlab",
                                 description="hierarchy algebra and decay experiments")
    ap.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hierarchy", help="emit one flow's coefficient table")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_hierarchy)

    p = sub.add_parser("identities", help="exact identity checks")
    p.add_argument("--coeffs", action="store_true",
                   help="triple-route coefficient identity")
    p.add_argument("--nmax", type=int, default=41)
    p.add_argument("--operators", action="store_true",
                   help="reversal and class-leading expansions")
    p.add_argument("--orders", default="3,5,7")
    p.add_argument("--out")
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("carleman", help="weighted-inverse multiplier checks")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--j", default="0,1,2,3,4")
    p.add_argument("--lam", type=float, default=2.5)
    p.add_argument("--mode", choices=["scan", "roundtrip", "dual-route"],
                   required=True)
    p.add_argument("--lams", default="2.5,5,10,25,50,100")
    p.add_argument("--taus", default="-1000,-100,-20,-5,-1.5,1.5,5,20,100,1000")
    p.add_argument("--slack-limit", type=float, default=2.0)
    p.add_argument("--Mx", type=int, default=4096)
    p.add_argument("--Mt", type=int, default=256)
    p.add_argument("--length", type=float, default=60.0)
    p.add_argument("--points", type=int, default=10000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_carleman)

    p = sub.add_parser("weights", help="certify a truncated exponential weight")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--variant", choices=["affine", "bounded"], default="affine")
    p.add_argument("--max-order", type=int, default=5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("simulate", help="evolve one flow from CSV initial data")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--ic", required=True, help="CSV with columns x,u")
    p.add_argument("--snapshots", help="comma-separated times")
    p.add_argument("--cutoff-mode", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decay", help="weighted-mass experiment for one flow")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--beta", type=float, default=0.25)
    p.add_argument("--M", type=int, default=2048)
    p.add_argument("--dt", type=float, default=5e-5)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--snapshots", type=int, default=11)
    p.add_argument("--cutoff-mode", type=int, default=682)
    p.add_argument("--out")
    p.add_argument("--traj-out", help="also write the difference trajectory CSV")
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("lower-probe", help="distant-window energy report")
    p.add_argument("--traj", required=True, help="trajectory CSV (t,x,u)")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--r", type=float, default=1.0 / 3.0)
    p.add_argument("--Rmin", type=float, default=2.0)
    p.add_argument("--Rmax", type=float, default=20.0)
    p.add_argument("--Rstep", type=float, default=2.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lower_probe)

    return ap


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SymbolicError as exc:
        print(f"symbolic mismatch: {exc}", file=sys.stderr)
        return EXIT_SYMBOLIC
    except NumericalError as exc:
        print(f"numerical assertion failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
