"""Command line interface.

Subcommands:
  evolve      integrate the moment ODE and export the trajectory
  stationary  stationary moments and measure decomposition
  flow        integrate one characteristic trajectory of the disk flow
  bridge      map symmetry moments to projection moments
  oracle      Monte Carlo moments from the matrix model
  verify      run the acceptance criteria

Every subcommand accepts --config pointing at a JSON file whose keys
match the long option names (with dashes replaced by underscores);
explicit flags override the file.  Exit codes: 0 success, 1 validation
or domain error, 2 numerical health error.  verify exits 0 only when
every requested criterion passes.
"""

import argparse
import json
import sys

from .acceptance import run_all
from .bridge import project_moments
from .errors import NumericalHealthError, ValidationError
from .measures import TraceParams
from .moments import evolve_moments, stationary_moments
from .rmt import EnsembleConfig, monte_carlo
from .subordination import flow_ode
from .transforms import (classical_evaluator, free_evaluator, initial_moments,
                         point_mass_pi, point_mass_zero,
                         stationary_decomposition)

_REQUIRED = object()


def _load_config(path):
    if path is None:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValidationError("config file must hold a JSON object")
    return data


def _get(args, config, name, default=_REQUIRED):
    value = getattr(args, name, None)
    if value is None:
        value = config.get(name)
    if value is None:
        if default is _REQUIRED:
            raise ValidationError("missing config field: %s" % name)
        return default
    return value


def _initial_evaluator(kind, params):
    if kind == "classical":
        return classical_evaluator(params)
    if kind == "free":
        return free_evaluator(params)
    if kind == "equal":
        return point_mass_zero()
    if kind == "opposite":
        return point_mass_pi()
    raise ValidationError(
        "unknown initial law %r (choose classical, free, equal, opposite)" % (kind,))


def _params(args, config):
    alpha = float(_get(args, config, "alpha"))
    beta = float(_get(args, config, "beta"))
    return TraceParams(alpha, beta)


def _emit(payload, out=None):
    text = json.dumps(payload, indent=2)
    print(text)
    if out is not None:
        with open(out, "w") as fh:
            fh.write(text + "\n")


def cmd_evolve(args):
    config = _load_config(args.config)
    params = _params(args, config)
    init = _get(args, config, "init", "classical")
    n_moments = int(_get(args, config, "n_moments", 32))
    t_end = float(_get(args, config, "t_end"))
    step = float(_get(args, config, "step", 1e-3))
    store_every = int(_get(args, config, "store_every", 1))
    f0 = initial_moments(_initial_evaluator(init, params), n_moments)
    traj = evolve_moments(f0, params, t_end, step=step, store_every=store_every)
    if args.out is not None:
        traj.write_csv(args.out)
    final = traj.final()
    _emit({
        "alpha": params.alpha, "beta": params.beta, "init": init,
        "t_end": t_end, "step": traj.step, "n_moments": n_moments,
        "rows": len(traj.times),
        "final_moments": [float(v) for v in final.f],
        "csv": args.out,
    })
    return 0


def cmd_stationary(args):
    config = _load_config(args.config)
    params = _params(args, config)
    n_moments = int(_get(args, config, "n_moments", 32))
    n_points = int(_get(args, config, "n_points", 100001))
    seq = stationary_moments(params, n_moments)
    measure = stationary_decomposition(params, n_points=n_points)
    if args.out is not None:
        if args.out.endswith(".csv"):
            measure.write_csv(args.out)
        else:
            measure.write_json(args.out)
    _emit({
        "alpha": params.alpha, "beta": params.beta,
        "atom_zero": measure.atom_zero, "atom_pi": measure.atom_pi,
        "mass": measure.mass(),
        "moments": [float(v) for v in seq.f],
        "out": args.out,
    }, out=None)
    return 0


def cmd_flow(args):
    config = _load_config(args.config)
    params = _params(args, config)
    init = _get(args, config, "init", "classical")
    z0 = complex(float(_get(args, config, "z0_re")),
                 float(_get(args, config, "z0_im", 0.0)))
    t_end = float(_get(args, config, "t_end"))
    step = float(_get(args, config, "step", 1e-3))
    record_every = int(_get(args, config, "record_every", 10))
    h0 = _initial_evaluator(init, params)
    states = flow_ode(z0, params, h0, t_end, step=step,
                      record_every=record_every)
    if args.out is not None:
        with open(args.out, "w") as fh:
            fh.write("t,z0_re,z0_im,phi_re,phi_im,h_re,h_im,alive\n")
            for st in states:
                fh.write("%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n"
                         % (st.t, st.z0.real, st.z0.imag, st.phi.real,
                            st.phi.imag, st.h.real, st.h.imag, int(st.alive)))
    last = states[-1]
    _emit({
        "alpha": params.alpha, "beta": params.beta, "init": init,
        "z0": [z0.real, z0.imag], "t_end": t_end,
        "phi": [last.phi.real, last.phi.imag],
        "h": [last.h.real, last.h.imag],
        "alive": last.alive,
        "csv": args.out,
    })
    return 0


def cmd_bridge(args):
    config = _load_config(args.config)
    params = _params(args, config)
    n_moments = int(_get(args, config, "n_moments", 16))
    t_end = _get(args, config, "t_end", None)
    if t_end is None:
        f = stationary_moments(params, n_moments).f
        tag = "stationary"
    else:
        init = _get(args, config, "init", "classical")
        step = float(_get(args, config, "step", 1e-3))
        f0 = initial_moments(_initial_evaluator(init, params), n_moments)
        f = evolve_moments(f0, params, float(t_end), step=step,
                           store_every=10 ** 9).final().f
        tag = "t = %s" % t_end
    m = project_moments(f, params)
    if args.out is not None:
        with open(args.out, "w") as fh:
            fh.write("n,f,m\n")
            for n in range(n_moments):
                fh.write("%d,%.17g,%.17g\n" % (n + 1, f[n], m[n]))
    _emit({
        "alpha": params.alpha, "beta": params.beta, "source": tag,
        "symmetry_moments": [float(v) for v in f],
        "projection_moments": [float(v) for v in m],
        "csv": args.out,
    })
    return 0


def cmd_oracle(args):
    config = _load_config(args.config)
    t_grid = _get(args, config, "t_grid")
    if isinstance(t_grid, str):
        t_grid = tuple(float(v) for v in t_grid.split(","))
    else:
        t_grid = tuple(float(v) for v in t_grid)
    ensemble = EnsembleConfig(
        n_dim=int(_get(args, config, "n_dim")),
        alpha=float(_get(args, config, "alpha", 0.0)),
        beta=float(_get(args, config, "beta", 0.0)),
        preset=_get(args, config, "preset", "free"),
        delta=float(_get(args, config, "delta", 0.05)),
        seed=int(_get(args, config, "seed", 42)),
        n_samples=int(_get(args, config, "n_samples", 40)),
        n_moments=int(_get(args, config, "n_moments", 6)),
        t_grid=t_grid,
        n_workers=int(_get(args, config, "n_workers", 1)),
    )
    table = monte_carlo(ensemble)
    if args.out is not None:
        table.write_csv(args.out)
    _emit({
        "n_dim": ensemble.n_dim, "preset": ensemble.preset,
        "achieved_alpha": table.achieved_alpha,
        "achieved_beta": table.achieved_beta,
        "n_samples": table.n_samples,
        "t_grid": list(table.t_grid),
        "final_symmetry_mean": [float(v) for v in table.f_mean[-1]],
        "final_symmetry_stderr": [float(v) for v in table.f_err[-1]],
        "csv": args.out,
    })
    return 0


def cmd_verify(args):
    config = _load_config(args.config)
    ids = _get(args, config, "criteria", None)
    if isinstance(ids, str):
        ids = [int(v) for v in ids.split(",")]
    elif ids is not None:
        ids = [int(v) for v in ids]
    results = run_all(ids, report=lambda res: print(res.format_line(), flush=True))
    n_pass = sum(1 for r in results if r.passed)
    print("%d/%d criteria passed" % (n_pass, len(results)))
    if args.out is not None:
        with open(args.out, "w") as fh:
            json.dump([{
                "id": r.cid, "name": r.name, "passed": r.passed,
                "observed": r.observed, "tolerance": r.tolerance,
                "runtime": r.runtime, "detail": r.detail,
            } for r in results], fh, indent=2)
            fh.write("\n")
    return 0 if n_pass == len(results) else 1


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option defaults")
    common.add_argument("--out", help="output file (CSV or JSON by command)")
    common.add_argument("--seed", type=int, help="random seed where applicable")

    parser = argparse.ArgumentParser(
        prog="liberation",
        description="numerical toolkit for the liberation process of two "
                    "symmetries under free unitary Brownian motion")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", parents=[common],
                       help="integrate the moment ODE")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--init", choices=("classical", "free", "equal", "opposite"))
    p.add_argument("--n-moments", dest="n_moments", type=int)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--store-every", dest="store_every", type=int)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("stationary", parents=[common],
                       help="stationary moments and measure")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--n-moments", dest="n_moments", type=int)
    p.add_argument("--n-points", dest="n_points", type=int)
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser("flow", parents=[common],
                       help="one characteristic trajectory of the disk flow")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--init", choices=("classical", "free", "equal", "opposite"))
    p.add_argument("--z0-re", dest="z0_re", type=float)
    p.add_argument("--z0-im", dest="z0_im", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--record-every", dest="record_every", type=int)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("bridge", parents=[common],
                       help="symmetry moments to projection moments")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--n-moments", dest="n_moments", type=int)
    p.add_argument("--t-end", dest="t_end", type=float,
                   help="evolve to this time first (default: stationary)")
    p.add_argument("--init", choices=("classical", "free", "equal", "opposite"))
    p.add_argument("--step", type=float)
    p.set_defaults(func=cmd_bridge)

    p = sub.add_parser("oracle", parents=[common],
                       help="Monte Carlo moments from the matrix model")
    p.add_argument("--n-dim", dest="n_dim", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--preset", choices=("free", "equal", "classical", "custom"))
    p.add_argument("--delta", type=float)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--n-moments", dest="n_moments", type=int)
    p.add_argument("--t-grid", dest="t_grid",
                   help="comma separated times, e.g. 0.5,1,2")
    p.add_argument("--n-workers", dest="n_workers", type=int)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", parents=[common],
                       help="run the acceptance criteria")
    p.add_argument("--criteria",
                   help="comma separated criterion ids, default all")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except NumericalHealthError as exc:
        print("numerical health error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
