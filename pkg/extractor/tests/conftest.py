"""Shared fixtures: one tiny seeded encoder per test session."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tinybert import build_tiny_encoder  # noqa: E402


@pytest.fixture(scope="session")
def encoder_dir(tmp_path_factory) -> str:
    return build_tiny_encoder(tmp_path_factory.mktemp("tiny-encoder"))
