"""Declares some useful package_level metadata"""

import importlib.metadata
from pathlib import Path
import sys

from platformdirs import user_data_dir

try:
    __version__ = importlib.metadata.version("bregman-stationarity")
except importlib.metadata.PackageNotFoundError:
    __version__ = "0+unknown"

APP_NAME = __package__
ORGANIZATION = "bregman-stationarity"

# On linux, DATA_DIR resolves to ~/.local/share/{APP_NAME}
DATA_DIR = Path(user_data_dir(APP_NAME, appauthor=ORGANIZATION))

PYTHON_VERSION = sys.version
PYTHON_EXE = sys.executable
PACKAGES = {d.metadata["name"]: d.version for d in importlib.metadata.distributions()}
