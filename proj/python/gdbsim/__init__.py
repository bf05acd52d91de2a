"""Group distance bounding simulator."""

import json

from ._core import GdbError, dbc, dbc_ap, dbc_avg, figure_csv, run_to_dir, validate, verify
from ._core import run as _run


def run(scenario, seed=None):
    """Run a scenario given as a JSON string, a dict, or a path to a file."""
    if isinstance(scenario, dict):
        text = json.dumps(scenario)
    elif isinstance(scenario, str) and scenario.lstrip().startswith("{"):
        text = scenario
    else:
        with open(scenario, encoding="utf-8") as f:
            text = f.read()
    return _run(text, seed)


__all__ = ["GdbError", "dbc", "dbc_ap", "dbc_avg", "figure_csv", "run", "run_to_dir", "validate", "verify"]
