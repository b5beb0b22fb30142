# src/simharness/errors.py
from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from src.ldp.errors import LdpError


class ConfigError(LdpError):
    """An ExperimentConfig that cannot be run."""


class DatasetError(LdpError):
    def __init__(self, message: str, path: Union[str, Path], line_no: Optional[int] = None) -> None:
        self.path = str(path)
        self.line_no = line_no
        where = f"{self.path}:{line_no}" if line_no is not None else self.path
        super().__init__(f"{where}: {message}")
