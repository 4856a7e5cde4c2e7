"""
CSV and JSON outputs of a campaign.

Floats are written with ``repr`` and rows in drop order, so two runs of
the same scenario and seed produce byte-identical CSV files.
"""
from pathlib import Path
import csv
import hashlib
import json
import logging
import math
import numbers
import subprocess

from django.conf import settings

logger = logging.getLogger(__name__)

TABLE_HEADER = ['sweep_var', 'sweep_value', 'algorithm', 'metric', 'value', 'stderr']
DROP_HEADER = [
    'drop', 'sweep_var', 'sweep_value', 'algorithm', 'feasible', 'objective',
    'first_objective', 'iterations', 'mean_se', 'mean_battery_fraction', 'anomaly', 'violations',
]


def format_cell(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        # NaN (no feasible drops, single-drop stderr) is an empty cell
        return '' if math.isnan(value) else repr(float(value))
    return str(value)


def json_safe(value):
    """Replace NaN and infinities (not valid JSON) with None, recursively."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def config_hash(scenario_dict):
    canonical = json.dumps(json_safe(scenario_dict), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def git_revision():
    try:
        completed = subprocess.run(
            ['git', 'rev-parse', 'HEAD'],
            cwd=settings.BASE_DIR,
            capture_output=True,
            text=True,
            timeout=10,
        )
    except (OSError, subprocess.SubprocessError):
        return None
    if completed.returncode != 0:
        return None
    return completed.stdout.strip() or None


def write_table(rows, response_or_file):
    """Long-format rows to any writable text stream (a file or an HttpResponse)."""
    writer = csv.writer(response_or_file, lineterminator='\n')
    writer.writerow(TABLE_HEADER)
    for row in rows:
        writer.writerow([format_cell(cell) for cell in row])


class ReportWriter:
    """Writes a campaign's files into one output directory and lists them for the manifest."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.files = []

    def _path(self, name):
        path = self.out_dir / name
        self.files.append(name)
        return path

    def write_table(self, name, rows):
        path = self._path(name)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            write_table(rows, f)
        logger.info("[Report] wrote %s (%d rows)", path, len(rows))
        return path

    def write_drops(self, name, drops):
        path = self._path(name)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(DROP_HEADER)
            for d in drops:
                writer.writerow([format_cell(cell) for cell in (
                    d.drop_index, d.sweep_var, d.sweep_value, d.algorithm, d.feasible, d.objective,
                    d.first_objective, d.iterations, d.mean_se, d.mean_battery_fraction,
                    d.anomaly, '; '.join(d.violations),
                )])
        logger.info("[Report] wrote %s (%d drops)", path, len(drops))
        return path

    def write_json(self, name, data):
        path = self._path(name)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(json_safe(data), f, indent=2, sort_keys=True)
            f.write('\n')
        return path

    def write_manifest(self, *, command, scenario_dict, seed, campaign_id=None, parameters=None):
        manifest = {
            'command': command,
            'campaign': str(campaign_id) if campaign_id else None,
            'config_hash': config_hash(scenario_dict),
            'seed': seed,
            'git_revision': git_revision(),
            'scenario': scenario_dict,
            'parameters': parameters or {},
            'files': list(self.files),
        }
        return self.write_json('manifest.json', manifest)
