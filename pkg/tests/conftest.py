import os
import sys

import pytest

# Scripts live at the repository root
ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

import config_manager  # noqa: E402


@pytest.fixture
def tmp_config(tmp_path):
    """A config.ini inside tmp_path with the database and outputs pointed there."""
    path = tmp_path / "config.ini"
    path.write_text(
        "[General]\n"
        f"database_file = {tmp_path / 'results.db'}\n"
        f"output_dir = {tmp_path / 'output'}\n"
        f"input_file = {tmp_path / 'input.json'}\n"
        "csv_digits = 17\n"
        "log_level = DEBUG\n"
        "\n[Regimes]\nenabled_regimes =\n    outer\n    kuzmak\n"
        "\n[Margins]\nm_outer = 5\nm_kuz = 5\na_default = 1.0\n",
        encoding="utf-8",
    )
    previous = config_manager.config
    config_manager.use_config(str(path))
    yield path
    config_manager.config = previous
