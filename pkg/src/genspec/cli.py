"""Command-line entry point: ``genspec <subcommand> [options]``.

Exit status is 0 on success, 1 for usage errors (bad flags, unknown
parameter keys, invalid parameter values) and 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from genspec import csvio
from genspec import equilibria as eqm
from genspec import stability as st
from genspec import sweep as sw
from genspec.dynamics import IntegrationError, IntegratorConfig, classify_trajectory, integrate
from genspec.lyapunov import LleConfig, LyapunovError
from genspec.model import (
    PARAM_NAMES,
    ModelAssumptionError,
    Params,
    load_params,
    parse_assignment,
    reference_state,
)

USAGE_ERROR = 1
NUMERICAL_ERROR = 2


class UsageError(Exception):
    pass


class NumericalError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    return lo, hi


def _common(sub: argparse.ArgumentParser) -> None:
    g = sub.add_argument_group("parameters")
    g.add_argument("--config", metavar="PATH", help="key=value parameter file")
    g.add_argument("--defaults-eq7", action="store_true", help="start from the reference parameter set")
    g.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE", help="override a parameter (repeatable, applied last)"
    )
    g.add_argument("--alpha", type=float, help="generalist infection rate")
    g.add_argument("--alpha-s", type=float, help="specialist infection rate")
    sub.add_argument("--out", metavar="PATH", help="output CSV (default: stdout)")


def _integrator_flags(sub, t_end=5000.0):
    sub.add_argument("--t-end", type=float, default=t_end)
    sub.add_argument("--rtol", type=float, default=1e-9)
    sub.add_argument("--atol", type=float, default=1e-11)
    sub.add_argument("--max-step", type=float, default=10.0)
    sub.add_argument("--sample-dt", type=float, default=0.1)
    sub.add_argument("--transient-fraction", type=float, default=0.5)


def _threads(sub):
    sub.add_argument("--threads", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="genspec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = subs.add_parser("equilibria", help="closed-form equilibria with residuals")
    _common(p)
    p.add_argument("--spectrum", action="store_true", help="write eigenvalues and stability instead")

    p = subs.add_parser("simulate", help="integrate one trajectory")
    _common(p)
    _integrator_flags(p, t_end=1000.0)
    p.add_argument("--zs0", type=float, default=0.5)
    p.add_argument("--z0", type=float, default=0.5)
    p.add_argument("--classify", metavar="PATH", help="also write the attractor classification CSV")

    p = subs.add_parser("sweep1d", help="1-D bifurcation table along one rate")
    _common(p)
    _integrator_flags(p)
    _threads(p)
    p.add_argument("--axis", choices=sw.AXES, default="alpha")
    p.add_argument("--range", type=_range, default=(0.1, 3.0), metavar="LO:HI")
    p.add_argument("--n", type=int, default=100)

    for name, helptext in (("stability-map", "basin probabilities on a rate grid"), ("lle-map", "LLE on a rate grid")):
        p = subs.add_parser(name, help=helptext)
        _common(p)
        _threads(p)
        p.add_argument("--alpha-range", type=_range, default=(0.25, 3.0), metavar="LO:HI")
        p.add_argument("--alpha-s-range", type=_range, default=(0.25, 3.0), metavar="LO:HI")
        p.add_argument("--n-alpha", type=int, default=12)
        p.add_argument("--n-alpha-s", type=int, default=12)
        if name == "stability-map":
            _integrator_flags(p)
            p.add_argument("--basin-n", type=int, default=5)
        else:
            p.add_argument("--transient", type=float, default=2000.0)
            p.add_argument("--accumulation", type=float, default=20000.0)
            p.add_argument("--renorm", type=float, default=1.0)
            p.add_argument("--rtol", type=float, default=1e-9)
            p.add_argument("--atol", type=float, default=1e-11)

    p = subs.add_parser("curves", help="transcritical and Hopf curves")
    _common(p)
    p.add_argument("--range", type=_range, default=(0.05, 3.0), metavar="LO:HI", help="alpha samples for curved loci")
    p.add_argument("--n", type=int, default=60)
    return parser


def resolve_params(args) -> Params:
    if args.config:
        base = Params.eq7().as_dict() if args.defaults_eq7 else None
        p = load_params(args.config, base=base)
        values = p.as_dict()
    elif args.defaults_eq7:
        values = Params.eq7().as_dict()
    else:
        raise UsageError("give --defaults-eq7 and/or --config PATH")
    if args.alpha is not None:
        values["alpha"] = args.alpha
    if args.alpha_s is not None:
        values["alpha_s"] = args.alpha_s
    for item in args.set:
        key, value = parse_assignment(item)
        values[key] = value
    return Params(**values)


def _integrator(args) -> IntegratorConfig:
    return IntegratorConfig(
        t_end=args.t_end,
        rel_tol=args.rtol,
        abs_tol=args.atol,
        max_step=args.max_step,
        sample_dt=args.sample_dt,
        transient_fraction=args.transient_fraction,
    )


def _grid(args) -> sw.Grid2D:
    return sw.Grid2D(args.alpha_range, args.n_alpha, args.alpha_s_range, args.n_alpha_s)


def cmd_equilibria(p: Params, args) -> csvio.Table:
    if args.spectrum:
        table = csvio.Table(csvio.REPORT_COLUMNS).add_params(p)
        for r in st.stability_reports(p, feasible_only=False):
            ev = r.eigenvalues
            table.rows.append((r.name, *ev.real.tolist(), *ev.imag.tolist(), r.classification))
        return table
    table = csvio.Table(csvio.EQUILIBRIA_COLUMNS).add_params(p)
    for e in eqm.all_equilibria(p):
        table.rows.append((e.name, *e.reported_state().tolist(), e.feasible, e.residual))
    return table


def cmd_simulate(p: Params, args) -> csvio.Table:
    cfg = _integrator(args)
    s0 = reference_state(p, args.zs0, args.z0)
    try:
        traj = integrate(p, s0, cfg)
    except IntegrationError as exc:
        raise NumericalError(str(exc)) from exc
    table = csvio.Table(csvio.TRAJECTORY_COLUMNS).add_params(p)
    table.meta += [("accepted_steps", traj.accepted), ("rejected_steps", traj.rejected)]
    table.rows = [(float(t), *s.tolist()) for t, s in zip(traj.t, traj.states)]
    if args.classify:
        c = classify_trajectory(p, traj, cfg.transient_fraction * cfg.t_end)
        ct = csvio.Table(csvio.CLASSIFICATION_COLUMNS).add_params(p)
        ct.rows.append((p.alpha, p.alpha_s, args.zs0, args.z0, c.kind, c.target, csvio.format_metrics(c.metrics)))
        ct.write(args.classify)
    return table


def cmd_sweep1d(p: Params, args) -> csvio.Table:
    lo, hi = args.range
    cfg = sw.BasinConfig(integrator=_integrator(args))
    result = sw.bifurcation_sweep_1d(p, args.axis, lo, hi, args.n, cfg, workers=args.threads)
    table = csvio.Table(csvio.sweep_columns(args.axis)).add_params(p)
    table.meta += [(f"crossing {c.label}", c.value) for c in result.crossings]
    table.meta += [(f"error at {v!r}", msg) for v, msg in result.errors]
    table.rows = [(r.value, r.equilibrium, r.norm, r.stable, r.po_max, r.po_min) for r in result.rows]
    if result.errors:
        for v, msg in result.errors:
            print(f"sample {args.axis}={v!r} failed: {msg}", file=sys.stderr)
    return table


def cmd_stability_map(p: Params, args) -> csvio.Table:
    cfg = sw.BasinConfig(n=args.basin_n, integrator=_integrator(args))
    rows = sw.stability_map(p, _grid(args), cfg, workers=args.threads)
    table = csvio.Table(csvio.MAP_COLUMNS).add_params(p)
    table.meta.append(("basin_n", args.basin_n))
    table.rows = [(r.alpha, r.alpha_s, r.attractor, r.probability) for r in rows]
    return table


def cmd_lle_map(p: Params, args) -> csvio.Table:
    cfg = LleConfig(
        transient=args.transient,
        accumulation=args.accumulation,
        renorm_interval=args.renorm,
        rel_tol=args.rtol,
        abs_tol=args.atol,
    )
    rows = sw.lle_map(p, _grid(args), cfg=cfg, workers=args.threads)
    table = csvio.Table(csvio.LLE_COLUMNS).add_params(p)
    table.rows = [(r.alpha, r.alpha_s, r.lle, r.converged) for r in rows]
    failed = [r for r in rows if not np.isfinite(r.lle)]
    if failed:
        raise NumericalError(f"LLE failed at {len(failed)} grid cells")
    return table


def cmd_curves(p: Params, args) -> csvio.Table:
    table = csvio.Table(csvio.CURVE_COLUMNS).add_params(p)
    lo, hi = args.range
    for label, curve in st.TRANSCRITICAL.items():
        if not curve.depends_on_alpha:
            v = curve.value(p)
            table.rows.append((label, v, None) if curve.axis == "alpha" else (label, None, v))
            continue
        alphas = [args.alpha] if args.alpha is not None else np.linspace(lo, hi, args.n).tolist()
        for a in alphas:
            try:
                table.rows.append((label, a, curve.value(p, a)))
            except (st.UndefinedCurveError, ZeroDivisionError):
                continue
    try:
        table.rows.append(("H5", st.hopf_locus_v5(p), None))
    except st.NoHopfInRange:
        pass
    return table


COMMANDS = {
    "equilibria": cmd_equilibria,
    "simulate": cmd_simulate,
    "sweep1d": cmd_sweep1d,
    "stability-map": cmd_stability_map,
    "lle-map": cmd_lle_map,
    "curves": cmd_curves,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
        p = resolve_params(args)
        table = COMMANDS[args.command](p, args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return USAGE_ERROR
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return USAGE_ERROR
    except (ModelAssumptionError, argparse.ArgumentTypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (NumericalError, IntegrationError, LyapunovError, st.NoHopfInRange, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except ValueError as exc:
        # config values and flag combinations rejected by the library
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR

    text = table.render()
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return USAGE_ERROR
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
