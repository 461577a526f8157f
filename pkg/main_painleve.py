import argparse
import csv
import json
import logging
import math
import os
import sys
import uuid
from datetime import datetime

import numpy as np

import config_manager as cfg
import database_manager
import input_processor
import output_generator
from equilibria import CRITICAL, branch_stability, equilibrium_roots
from oracle import solve_p2
from painleve_errors import PainleveError, exit_code_for
from regime_classifier import composite_eval, composite_sweep, load_regime_modules
from regime_matcher import suggest

log = logging.getLogger("main_painleve")

COMMANDS = ('constants', 'equilibria', 'outer', 'inner1', 'inner2', 'boutroux', 'kuzmak',
            'oracle', 'composite', 'figure1', 'sweep')
# subcommand -> regime plugin
REGIME_COMMANDS = {'outer': 'outer', 'inner1': 'inner1', 'inner2': 'inner2',
                   'boutroux': 'elliptic', 'kuzmak': 'kuzmak'}
FIGURE1_EPS = math.sqrt(0.1)


def setup_logging(level_name=None):
    level_name = (level_name or cfg.get_general_setting('log_level', 'INFO')).upper()
    logging.basicConfig(level=getattr(logging, level_name, logging.INFO),
                        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
                        datefmt='%Y-%m-%d %H:%M:%S')
    # scipy reports integration trouble through warnings
    logging.captureWarnings(True)


def collect_constants():
    """Critical and degeneration constants for manifests and the `constants` command."""
    out = {'t_star': CRITICAL.t_star, 'u_star': CRITICAL.u_star, 'E_star': CRITICAL.E_star,
           'E_star_displayed': CRITICAL.E_star_displayed, 'alpha_star': CRITICAL.alpha_star}
    try:
        from kuzmak import solve_k
        k = solve_k()
        out.update(k=k.k, C_star=k.C_star, T=k.T, nu1=k.nu1, mu1=k.mu1, gamma1=k.gamma1)
    except PainleveError as e:
        log.warning(f"degeneration constants unavailable: {e}")
    try:
        from boutroux import solve_g3
        p = solve_g3()
        out.update(g2=p.g2, g3=p.g3, g3_std=p.g3_std, Omega=p.omega_real)
    except PainleveError as e:
        log.warning(f"Boutroux invariants unavailable: {e}")
    return out


def _t_values(args, rc):
    if args.t is not None:
        return [args.t]
    t0, t1 = rc.t_range
    return list(np.linspace(t0, t1, args.n))


def _run_id(command):
    return f"{command}-{datetime.now():%Y%m%dT%H%M%S}-{uuid.uuid4().hex[:6]}"


def _emit(samples, args, rc, command):
    """Exports (or prints) samples and archives them when asked."""
    if args.out:
        output_generator.export(samples, args.format or rc.default_format, args.out, rc,
                                collect_constants())
    else:
        writer, digits = csv.writer(sys.stdout), rc.csv_digits
        writer.writerow(output_generator.CSV_HEADER)
        for s in samples:
            writer.writerow([output_generator.format_float(s.t, digits), output_generator.format_float(s.u, digits),
                             s.regime, output_generator.format_float(s.residual, digits), s.source])
    if args.archive:
        run_id = _run_id(command)
        database_manager.init_db(rc.database_file)
        database_manager.save_run(run_id, command, rc.eps, rc, rc.database_file)
        database_manager.save_samples(run_id, samples, rc.database_file)
        log.info(f"archived {len(samples)} samples as run '{run_id}'")


# --- subcommands ---

def cmd_constants(args, rc):
    print(json.dumps(collect_constants(), indent=4))
    return 0


def cmd_equilibria(args, rc):
    rows = []
    for t in _t_values(args, rc):
        eq = equilibrium_roots(t)
        rows.append({'t': t, 'discriminant': eq.discriminant, 'roots': list(eq.roots),
                     'stability': [branch_stability(t, i + 1) for i in range(eq.count)]})
    print(json.dumps(rows, indent=4))
    return 0


def cmd_regime(args, rc):
    name = REGIME_COMMANDS[args.command]
    regime = load_regime_modules([name], rc)[name]
    if name == 'inner2' and args.pole is not None:
        regime.pole_index = args.pole
    _write_tables(name, args, rc)
    if name == 'elliptic':
        evaluate = getattr(args, 'eval', False) or args.t is not None or args.t0 is not None
        if getattr(args, 'solve_g3', False):
            return _print_invariants(rc)
        if not evaluate:
            return _print_boutroux(rc)
    if args.t is not None:
        samples = [regime.evaluate(args.t, rc.eps)]
    else:
        samples = regime.sweep(_t_values(args, rc), rc.eps)
    _emit(samples, args, rc, args.command)
    return 0


def _write_tables(name, args, rc):
    """Side tables of a regime: inner1 poles, Kuzmak modulation and constants, Boutroux invariants."""
    poles_out = getattr(args, 'poles_out', None)
    table_out = getattr(args, 'table_out', None)
    constants_out = getattr(args, 'constants_out', None)
    if name == 'inner1' and poles_out:
        from regime_modules.layer_cache import trajectory_for
        output_generator.write_pole_table(poles_out, trajectory_for(rc).poles, rc.csv_digits)
    if name == 'kuzmak' and (table_out or constants_out):
        from regime_modules.layer_cache import modulation_table_for
        table = modulation_table_for(rc)
        if table_out:
            output_generator.write_modulation_csv(table_out, table, rc.csv_digits)
        if constants_out:
            output_generator.write_constants_json(constants_out, table.constants)
    if name == 'elliptic' and constants_out:
        from boutroux import solve_g3
        output_generator.write_constants_json(constants_out, solve_g3(quad_tol=rc.quad_tol))


def _print_invariants(rc):
    from boutroux import solve_g3
    params = solve_g3(quad_tol=rc.quad_tol)
    print(json.dumps({'g2': params.g2, 'g3': params.g3, 'g3_std': params.g3_std,
                      'Omega': params.omega_real}, indent=4))
    return 0


def _print_boutroux(rc):
    from boutroux import aperiodic_pair, fp_forcing_p1_half, fp_forcing_p2, lattice_phase, solve_g3
    from regime_modules.layer_cache import trajectory_for
    params = solve_g3(quad_tol=rc.quad_tol)
    pair = aperiodic_pair(params)
    offset, spread = lattice_phase(trajectory_for(rc).poles, params)
    print(json.dumps({'g2': params.g2, 'g3': params.g3, 'g3_std': params.g3_std,
                      'Omega': params.omega_real, 'C': pair.C,
                      'fp_p1_half': fp_forcing_p1_half(params), 'fp_p2': fp_forcing_p2(params),
                      'lattice_offset': offset, 'lattice_spread': spread}, indent=4))
    return 0


def cmd_oracle(args, rc):
    t0, t1 = rc.t_range
    run = solve_p2(rc.eps, t0, t1, tol=rc.oracle_tol)
    if args.out:
        output_generator.write_oracle_csv(args.out, run, rc.csv_digits)
    else:
        print(json.dumps({'eps': run.eps, 't0': run.t0, 't1': run.t1, 'steps': len(run.samples),
                          'turning_points': len(run.events), 'max_drift': run.max_drift}, indent=4))
    if args.archive:
        _emit(run.as_samples(), argparse.Namespace(out=None, format=None, archive=True), rc, 'oracle')
    return 0


def cmd_composite(args, rc):
    regimes = load_regime_modules(rc.regimes, rc)
    if args.t is not None:
        samples = [composite_eval(args.t, rc.eps, regimes)]
    else:
        samples, gaps = composite_sweep(_t_values(args, rc), rc.eps, regimes)
        if gaps:
            log.warning(f"{len(gaps)} points fell in validity gaps, first at t={gaps[0]:.6f}")
    _emit(samples, args, rc, 'composite')
    return 0


def cmd_figure1(args, rc):
    """eps^2 = 0.1 on [t* - 1, t* + 1.5]: oracle and composite side by side."""
    rc.eps = FIGURE1_EPS
    t0, t1 = CRITICAL.t_star - 1.0, CRITICAL.t_star + 1.5
    rc.t_range = (t0, t1)
    run = solve_p2(rc.eps, t0, t1, tol=rc.oracle_tol)
    regimes = load_regime_modules(rc.regimes, rc)
    composite, gaps = composite_sweep(list(np.linspace(t0, t1, args.n)), rc.eps, regimes)
    log.info(f"figure1: {len(run.samples)} oracle samples, {len(composite)} composite samples, {len(gaps)} gaps")
    _emit(run.as_samples() + composite, args, rc, 'figure1')
    return 0


def cmd_sweep(args, rc):
    """Runs every job of the sweep file; a failing job is logged and skipped."""
    path = args.input or cfg.get_general_setting('input_file', 'input.json')
    jobs = input_processor.read_sweep_file(path)
    if not jobs:
        log.warning(f"No valid jobs found in '{path}'. Nothing to do.")
        return 0
    failures = 0
    for i, job in enumerate(jobs):
        log.info(f"--- Job {i}: {job['command']} eps={job['eps']} t=[{job['t0']}, {job['t1']}] ---")
        job_rc = cfg.build_run_config(eps=job['eps'], t_range=(job['t0'], job['t1']),
                                      phase_a=args.phase_a)
        out = os.path.join(job_rc.output_dir, f"job{i:02d}_{job['command']}.csv")
        job_args = argparse.Namespace(command=job['command'], t=None, t0=job['t0'], n=job['n'],
                                      out=out, format='csv', archive=True, pole=None, input=None)
        try:
            DISPATCH[job['command']](job_args, job_rc)
        except PainleveError as e:
            failures += 1
            log.error(f"Job {i} ({job['command']}) failed: {e}", exc_info=True)
    log.info(f"Sweep finished: {len(jobs) - failures}/{len(jobs)} jobs succeeded.")
    return 0 if failures == 0 else 3


DISPATCH = {
    'constants': cmd_constants,
    'equilibria': cmd_equilibria,
    'outer': cmd_regime,
    'inner1': cmd_regime,
    'inner2': cmd_regime,
    'boutroux': cmd_regime,
    'kuzmak': cmd_regime,
    'oracle': cmd_oracle,
    'composite': cmd_composite,
    'figure1': cmd_figure1,
    'sweep': cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog='main_painleve',
        description='Asymptotics and reference solutions of eps^2 u\'\' + 2u^3 + tu = 1.')
    parser.add_argument('command', help=f"one of: {', '.join(COMMANDS)}")
    parser.add_argument('--eps', type=float, help='small parameter (> 0)')
    parser.add_argument('--t', type=float, help='single evaluation point')
    parser.add_argument('--t0', type=float, help='sweep start')
    parser.add_argument('--t1', type=float, help='sweep end')
    parser.add_argument('--n', type=int, default=101, help='sweep points (default 101)')
    parser.add_argument('--tol', type=float, help='oracle tolerance')
    parser.add_argument('--out', help='output file (stdout when omitted)')
    parser.add_argument('--format', choices=('csv', 'json'), help='export format')
    parser.add_argument('--config', help='alternative config.ini')
    parser.add_argument('--print-config', action='store_true', help='dump the run configuration and exit')
    parser.add_argument('--pole', type=int, help='inner2: evaluate around pole k')
    parser.add_argument('--phase-a', type=float, dest='phase_a', help='Kuzmak phase constant a')
    parser.add_argument('--input', help='sweep: job file (default [General] input_file)')
    parser.add_argument('--eval', action='store_true', help='boutroux: evaluate the elliptic regime at --t or over --t0..--t1')
    parser.add_argument('--solve-g3', action='store_true', dest='solve_g3',
                        help='boutroux: print the Boutroux invariants g2, g3, Omega and exit')
    parser.add_argument('--poles-out', dest='poles_out', help='inner1: write the pole table CSV here')
    parser.add_argument('--table-out', dest='table_out', help='kuzmak: write the modulation table CSV here')
    parser.add_argument('--constants-out', dest='constants_out',
                        help='kuzmak: degeneration constants JSON; boutroux: elliptic invariants JSON')
    parser.add_argument('--archive', action='store_true', help='also store samples in the SQLite archive')
    parser.add_argument('--log-level', dest='log_level', help='overrides [General] log_level')
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if args.config:
            cfg.use_config(args.config)
    except Exception as e:
        setup_logging(args.log_level)
        log.critical(f"Configuration loading failed: {e}")
        return 3
    setup_logging(args.log_level)

    if args.command not in DISPATCH:
        hint = suggest(args.command, COMMANDS)
        log.critical(f"Unknown command '{args.command}'." + (f" Did you mean '{hint}'?" if hint else ""))
        return 2

    try:
        t_range = None
        if args.t0 is not None or args.t1 is not None:
            base = cfg.build_run_config().t_range
            t_range = (args.t0 if args.t0 is not None else base[0],
                       args.t1 if args.t1 is not None else base[1])
        rc = cfg.build_run_config(eps=args.eps, t_range=t_range, oracle_tol=args.tol,
                                  phase_a=args.phase_a)
    except ValueError as e:
        log.critical(f"Invalid run configuration: {e}")
        return 2
    if args.print_config:
        print(rc.to_json())
        return 0

    log.info(f"Running '{args.command}' at eps={rc.eps}")
    try:
        return DISPATCH[args.command](args, rc)
    except PainleveError as e:
        code = exit_code_for(e)
        log.critical(f"'{args.command}' failed ({type(e).__name__}): {e}")
        return code


if __name__ == "__main__":
    sys.exit(main())
