import csv
import dataclasses
import json
import logging
import os
from datetime import datetime

import numpy as np
import scipy

from painleve_errors import IOFailure
from solution_sample import SolutionSample

log = logging.getLogger(__name__)

TOOLKIT_VERSION = "1.0.0"
CSV_HEADER = ('t', 'u', 'regime', 'residual', 'source')
ORACLE_HEADER = ('t', 'u', 'du', 'event_flag')
POLE_HEADER = ('k', 'tau_k', 'c_k', 'a1_minus', 'b1_minus', 'b1_plus')
MODULATION_HEADER = ('t', 'E', 'alpha', 'beta', 'm', 'n', 'Sprime', 'S')


def format_float(x, digits=17):
    return f"{x:.{digits - 1}e}"


def _open_for_write(file_path):
    if not file_path or not isinstance(file_path, str):
        raise IOFailure(f"output path is invalid or empty ('{file_path}')")
    folder = os.path.dirname(os.path.abspath(file_path))
    os.makedirs(folder, exist_ok=True)
    log.info(f"Writing to '{os.path.abspath(file_path)}'")
    return open(file_path, 'w', encoding='utf-8', newline='')


def write_csv(file_path, samples, digits=17):
    """
    Writes samples as CSV with header t,u,regime,residual,source.

    Floats carry `digits` significant digits (17 by default, enough to
    re-parse every double exactly).

    Raises:
        IOFailure: empty sample list or an unwritable path.
    """
    if not samples:
        raise IOFailure("nothing to export")
    try:
        with _open_for_write(file_path) as f:
            writer = csv.writer(f)
            writer.writerow(CSV_HEADER)
            for s in samples:
                writer.writerow([format_float(s.t, digits), format_float(s.u, digits), s.regime,
                                 format_float(s.residual, digits), s.source])
    except OSError as e:
        log.error(f"IOError writing output file '{file_path}': {e}", exc_info=True)
        raise IOFailure(f"cannot write '{file_path}': {e}") from e
    log.info(f"Successfully wrote {len(samples)} samples to {file_path}")


def read_csv(file_path):
    """Parses a file written by write_csv back into SolutionSample rows."""
    try:
        with open(file_path, 'r', encoding='utf-8', newline='') as f:
            reader = csv.DictReader(f)
            return [SolutionSample(t=float(r['t']), u=float(r['u']), regime=r['regime'],
                                   residual=float(r['residual']), source=r['source'])
                    for r in reader]
    except (OSError, KeyError, ValueError) as e:
        raise IOFailure(f"cannot read '{file_path}': {e}") from e


def write_oracle_csv(file_path, run, digits=17):
    """Oracle steps as t,u,du,event_flag; turning points are extra rows flagged 1 (peak) or -1 (trough)."""
    if not run.samples and not run.events:
        raise IOFailure("nothing to export")
    rows = [(t, u, du, 0) for t, u, du in run.samples]
    rows += [(e.t, e.u, 0.0, 1 if e.kind == 'peak' else -1) for e in run.events]
    rows.sort(key=lambda r: r[0])
    try:
        with _open_for_write(file_path) as f:
            writer = csv.writer(f)
            writer.writerow(ORACLE_HEADER)
            for t, u, du, flag in rows:
                writer.writerow([format_float(t, digits), format_float(u, digits), format_float(du, digits), flag])
    except OSError as e:
        raise IOFailure(f"cannot write '{file_path}': {e}") from e
    log.info(f"Successfully wrote {len(rows)} oracle rows to {file_path}")


def write_pole_table(file_path, poles, digits=17):
    """Painleve-1 pole data as k,tau_k,c_k,a1_minus,b1_minus,b1_plus."""
    if not poles:
        raise IOFailure("no poles to export")
    try:
        with _open_for_write(file_path) as f:
            writer = csv.writer(f)
            writer.writerow(POLE_HEADER)
            for p in poles:
                writer.writerow([p.k] + [format_float(getattr(p, name), digits) for name in POLE_HEADER[1:]])
    except OSError as e:
        raise IOFailure(f"cannot write '{file_path}': {e}") from e
    log.info(f"Successfully wrote {len(poles)} poles to {file_path}")


def write_modulation_csv(file_path, table, digits=17):
    """Modulation states of a Kuzmak table as t,E,alpha,beta,m,n,Sprime,S."""
    if not table.states:
        raise IOFailure("empty modulation table")
    try:
        with _open_for_write(file_path) as f:
            writer = csv.writer(f)
            writer.writerow(MODULATION_HEADER)
            for s in table.states:
                writer.writerow([format_float(v, digits) for v in
                                 (s.t, s.E, s.alpha, s.beta, s.m, s.n, s.S_prime, s.S)])
    except OSError as e:
        raise IOFailure(f"cannot write '{file_path}': {e}") from e
    log.info(f"Successfully wrote {len(table.states)} modulation states to {file_path}")


def write_constants_json(file_path, constants):
    """A constants dataclass (degeneration constants, elliptic invariants) as one JSON object."""
    doc = dataclasses.asdict(constants) if dataclasses.is_dataclass(constants) else dict(constants)
    try:
        with _open_for_write(file_path) as f:
            json.dump(doc, f, indent=4)
    except OSError as e:
        raise IOFailure(f"cannot write '{file_path}': {e}") from e
    return doc


def manifest(run_config, constants, total_results):
    return {
        "last_updated": datetime.now().isoformat(),
        "total_results": total_results,
        "run_config": json.loads(run_config.to_json()) if hasattr(run_config, 'to_json') else run_config,
        "constants": constants,
        "versions": {"toolkit": TOOLKIT_VERSION, "numpy": np.__version__, "scipy": scipy.__version__},
    }


def write_manifest(file_path, run_config, constants, total_results=0):
    try:
        with _open_for_write(file_path) as f:
            json.dump(manifest(run_config, constants, total_results), f, indent=4, default=str)
    except OSError as e:
        raise IOFailure(f"cannot write '{file_path}': {e}") from e


def export(samples, fmt, file_path, run_config, constants):
    """
    Writes a run to disk.

    csv: samples to `file_path` and the manifest next to it as `<file_path>.manifest.json`.
    json: one document with the manifest fields plus a "results" list.

    Raises:
        IOFailure: nothing to export, unknown format or unwritable path.
    """
    if not samples:
        raise IOFailure("nothing to export")
    if fmt == 'csv':
        write_csv(file_path, samples, getattr(run_config, 'csv_digits', 17))
        write_manifest(f"{file_path}.manifest.json", run_config, constants, len(samples))
    elif fmt == 'json':
        doc = manifest(run_config, constants, len(samples))
        doc["results"] = [s.as_row() for s in samples]
        try:
            with _open_for_write(file_path) as f:
                json.dump(doc, f, indent=4)
        except OSError as e:
            raise IOFailure(f"cannot write '{file_path}': {e}") from e
    else:
        raise IOFailure(f"unknown export format '{fmt}'")
    return file_path
