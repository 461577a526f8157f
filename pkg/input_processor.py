import json
import logging
import os

log = logging.getLogger(__name__)

SWEEP_COMMANDS = ('outer', 'inner1', 'inner2', 'boutroux', 'kuzmak', 'oracle', 'composite')


def read_sweep_file(file_path):
    """
    Reads the JSON list of sweep jobs.

    Each job is {"command", "eps", "t0", "t1", "n"}; n defaults to 101.

    Args:
        file_path (str): path to the JSON file.

    Returns:
        list: validated jobs. Empty if the file is missing, empty or invalid.
    """
    if not os.path.exists(file_path):
        log.error(f"Sweep file not found: {file_path}")
        return []

    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            content = f.read()
        if not content.strip():
            log.warning(f"Sweep file is empty: {file_path}")
            return []
        data = json.loads(content)
    except json.JSONDecodeError as e:
        log.error(f"Error decoding JSON from {file_path}: {e}")
        return []
    except OSError as e:
        log.error(f"Could not read {file_path}: {e}")
        return []

    if not isinstance(data, list):
        log.error(f"Sweep file does not contain a JSON list: {file_path}")
        return []

    jobs = []
    for i, job in enumerate(data):
        if not isinstance(job, dict) or job.get('command') not in SWEEP_COMMANDS:
            log.warning(f"Skipping job {i} in {file_path}: missing or unknown 'command'")
            continue
        try:
            eps = float(job['eps'])
            t0, t1 = float(job['t0']), float(job['t1'])
            n = int(job.get('n', 101))
        except (KeyError, ValueError, TypeError):
            log.warning(f"Job {i} in {file_path} has missing or non-numeric eps/t0/t1/n. Skipping.")
            continue
        if eps <= 0 or t1 <= t0 or n < 1:
            log.warning(f"Job {i} in {file_path} needs eps > 0, t0 < t1, n >= 1. Skipping.")
            continue
        jobs.append({'command': job['command'], 'eps': eps, 't0': t0, 't1': t1, 'n': n})
    log.info(f"Read {len(jobs)} sweep jobs from {file_path}")
    return jobs
