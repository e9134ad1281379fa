from __future__ import annotations

import pytest

from cislunar.kinematics import EphemerisConfig, two_body_field


@pytest.fixture(scope="session")
def cfg():
    return EphemerisConfig()


@pytest.fixture(scope="session")
def field(cfg):
    return two_body_field(cfg)
