from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rowswitch.field import FieldConfig, generate_field  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


def flat_config(**kw) -> FieldConfig:
    """Straight, evenly spaced rows on smooth ground."""
    base = dict(spacing_jitter=0.0, angle_jitter_deg=0.0, roughness_scale=0.0)
    base.update(kw)
    return FieldConfig(**base)


@pytest.fixture(scope="session")
def flat_field():
    return generate_field(flat_config(), 1)


@pytest.fixture(scope="session")
def field0():
    return generate_field(FieldConfig(), 0)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
