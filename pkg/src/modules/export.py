"""
Module for exporting scenario results, plot data and timing tables.
"""

import csv
import json
import logging
import os
import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .scenario import ScenarioResult

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

PLOT_SCRIPT = '''"""Plot the exported data files (generated; needs matplotlib)."""

import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt

FILES = {files}


def read(path):
    with open(path, newline='') as f:
        rows = list(csv.DictReader(f))
    return {{key: [float(row[key]) for row in rows] for key in rows[0]}} if rows else {{}}


def main(directory):
    for name in FILES:
        data = read(Path(directory) / name)
        if not data:
            continue
        x_key = next(iter(data))
        fig, ax = plt.subplots()
        for key, values in data.items():
            if key != x_key:
                ax.plot(data[x_key], values, label=key)
        ax.set_xlabel(x_key)
        ax.set_title(name)
        ax.legend()
        fig.savefig(Path(directory) / (Path(name).stem + '.png'))
        plt.close(fig)


if __name__ == '__main__':
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent)
'''


def slug(label: str) -> str:
    """File-name friendly form of a governor label."""
    return re.sub(r'[^A-Za-z0-9]+', '_', label).strip('_').lower()


class ResultExporter:
    """Handles exporting of governed simulation results."""

    def __init__(self, timing: bool = False):
        """Per-step wall times are written only when timing is requested."""
        self.timing = timing

    def fieldnames(self, result: ScenarioResult) -> List[str]:
        m, p = result.r.shape[1], result.y.shape[1]
        return (['t'] + [f'r_{i + 1}' for i in range(m)] + [f'v_{i + 1}' for i in range(m)]
                + [f'y_{i + 1}' for i in range(p)] + ['kappa', 'step_time_ns'])

    def _rows(self, result: ScenarioResult) -> List[Dict]:
        fields = self.fieldnames(result)
        rows = []
        for k in range(result.steps):
            values = ([float(result.t[k])] + result.r[k].tolist() + result.v[k].tolist()
                      + result.y[k].tolist() + [float(result.kappa[k])]
                      + [int(result.step_time_ns[k]) if self.timing else 0])
            rows.append(dict(zip(fields, values)))
        return rows

    def summary(self, result: ScenarioResult) -> Dict:
        document = result.summary()
        if not self.timing:
            document['step_time_mean_ns'] = 0.0
            document['step_time_max_ns'] = 0
        return document

    def export_to_csv(self, result: ScenarioResult, output_path: str) -> bool:
        """Export per-step records to CSV with the fixed column order."""
        try:
            Path(output_path).parent.mkdir(parents=True, exist_ok=True)
            with open(output_path, 'w', newline='', encoding='utf-8') as f:
                writer = csv.DictWriter(f, fieldnames=self.fieldnames(result))
                writer.writeheader()
                writer.writerows(self._rows(result))
            logger.info(f"Successfully exported {result.steps} steps to {output_path}")
            return True
        except Exception as e:
            logger.error(f"Error exporting to CSV: {str(e)}")
            raise

    def export_summary(self, results: Sequence[ScenarioResult],
                       output_path: Optional[str] = None) -> Union[bool, str]:
        """
        Export the summary document.
        If output_path is None, returns the JSON string.
        If output_path is provided, returns True on success.
        """
        try:
            document = {
                'schema_version': SCHEMA_VERSION,
                'scenario': results[0].scenario if results else None,
                'seed': results[0].seed if results else None,
                'timing': self.timing,
                'results': [self.summary(result) for result in results],
            }
            json_data = json.dumps(document, indent=2, ensure_ascii=False)

            if output_path:
                Path(output_path).parent.mkdir(parents=True, exist_ok=True)
                with open(output_path, 'w', encoding='utf-8') as f:
                    f.write(json_data)
                logger.info(f"Successfully exported summary to {output_path}")
                return True

            return json_data

        except Exception as e:
            logger.error(f"Error exporting summary: {str(e)}")
            raise

    def _write_columns(self, path: Path, columns: Dict[str, np.ndarray]):
        names = list(columns)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            writer.writerow(names)
            for values in zip(*[columns[name] for name in names]):
                writer.writerow([float(value) for value in values])

    def export_plot_data(self, result: ScenarioResult, directory: str) -> List[str]:
        """Write x/y column files for the output, command and κ plots."""
        try:
            directory = Path(directory)
            directory.mkdir(parents=True, exist_ok=True)
            prefix = slug(result.governor)
            written = []

            outputs = {'t': result.t}
            outputs.update({f'y_{i + 1}': result.y[:, i] for i in range(result.y.shape[1])})
            commands = {'t': result.t}
            for i in range(result.r.shape[1]):
                commands[f'r_{i + 1}'] = result.r[:, i]
                commands[f'v_{i + 1}'] = result.v[:, i]
            plots = {'outputs': outputs, 'commands': commands,
                     'kappa': {'t': result.t, 'kappa': np.nan_to_num(result.kappa, nan=-1.0)}}

            for name in ('kappas', 'u', 'r_filtered'):
                if name in result.extras:
                    values = np.atleast_2d(result.extras[name].T).T
                    columns = {'t': result.t}
                    columns.update({f'{name}_{i + 1}': values[:, i] for i in range(values.shape[1])})
                    plots[name] = columns

            for name, columns in plots.items():
                path = directory / f'{prefix}_{name}.csv'
                self._write_columns(path, columns)
                written.append(str(path))
            logger.info(f"Successfully exported {len(written)} plot-data files to {directory}")
            return written
        except Exception as e:
            logger.error(f"Error exporting plot data: {str(e)}")
            raise

    def export_slice(self, points: np.ndarray, output_path: str) -> bool:
        """Boundary points of an admissible-set slice as x/y columns."""
        Path(output_path).parent.mkdir(parents=True, exist_ok=True)
        self._write_columns(Path(output_path), {'v_0': points[:, 0], 'v_1': points[:, 1]})
        logger.info(f"Successfully exported {len(points)} slice points to {output_path}")
        return True

    def write_plot_script(self, directory: str, files: Sequence[str]) -> str:
        """Generated plotting script stub for the exported data files."""
        path = Path(directory) / 'plot.py'
        path.parent.mkdir(parents=True, exist_ok=True)
        names = sorted(Path(name).name for name in files)
        path.write_text(PLOT_SCRIPT.format(files=json.dumps(names, indent=4)), encoding='utf-8')
        return str(path)

    def export_timing(self, table: List[Dict], output_path: str, format: str = 'csv') -> bool:
        """Export the timing table to CSV or JSON."""
        try:
            Path(output_path).parent.mkdir(parents=True, exist_ok=True)
            if format.lower() == 'json':
                with open(output_path, 'w', encoding='utf-8') as f:
                    f.write(json.dumps({'schema_version': SCHEMA_VERSION, 'rows': table}, indent=2))
            elif format.lower() == 'csv':
                with open(output_path, 'w', newline='', encoding='utf-8') as f:
                    writer = csv.DictWriter(f, fieldnames=['governor', 'variant', 'repeats', 'mean_ns', 'max_ns'])
                    writer.writeheader()
                    writer.writerows(table)
            else:
                raise ValueError(f"Invalid export format: {format}")
            logger.info(f"Successfully exported timing table to {output_path}")
            return True
        except Exception as e:
            logger.error(f"Error exporting timing table: {str(e)}")
            raise

    def export(self, results: Sequence[ScenarioResult], output_dir: str) -> Dict[str, List[str]]:
        """Write per-governor CSVs, the summary, plot data and the plot script."""
        try:
            output_dir = Path(output_dir)
            paths = {'csv': [], 'plot_data': []}
            for result in results:
                path = output_dir / f'{slug(result.governor)}.csv'
                self.export_to_csv(result, str(path))
                paths['csv'].append(str(path))
                paths['plot_data'].extend(self.export_plot_data(result, str(output_dir / 'plots')))
            summary_path = output_dir / 'summary.json'
            self.export_summary(results, str(summary_path))
            paths['summary'] = [str(summary_path)]
            paths['plot_script'] = [self.write_plot_script(str(output_dir / 'plots'), paths['plot_data'])]
            return paths
        except Exception as e:
            logger.error(f"Error during export: {str(e)}")
            raise


def default_output_dir(scenario: str) -> str:
    """PRG_OUTPUT_DIR/<scenario>."""
    return os.path.join(os.getenv('PRG_OUTPUT_DIR', 'data/results'), scenario)
