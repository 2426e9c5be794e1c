from __future__ import annotations

from typing import TYPE_CHECKING

import pytest
import yaml

from mollow_gain.model import DeviceParams

if TYPE_CHECKING:
    from collections.abc import Callable
    from pathlib import Path
    from typing import Any


@pytest.fixture
def device() -> DeviceParams:
    """
    Measured five-level device
    """
    return DeviceParams()


@pytest.fixture
def qubit() -> DeviceParams:
    """
    Two-level truncation with the measured rates
    """
    return DeviceParams(n_levels=2)


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[[dict[str, Any]], Path]:
    def write(data: dict[str, Any]) -> Path:
        path = tmp_path / "config.yml"
        with path.open("w") as f:
            yaml.safe_dump(data, f)
        return path

    return write
