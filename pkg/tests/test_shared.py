import logging

import pytest
from pydantic import ValidationError

from shared.config import REPO_ROOT, get_settings
from shared.utils import WorkerAdapter, configure_logging, get_logger, spawn_streams


class TestSettings:
    def test_defaults(self):
        settings = get_settings()
        assert settings.artifacts_dir == REPO_ROOT / "artifacts"
        assert settings.max_product_states == 1_000_000
        assert settings.curve_stride == 100

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("SPECSYNTH_CURVE_STRIDE", "25")
        monkeypatch.setenv("SPECSYNTH_LOG", "debug")
        get_settings.cache_clear()
        settings = get_settings()
        assert settings.curve_stride == 25
        assert settings.log == "debug"

    def test_rejects_bad_values(self, monkeypatch):
        monkeypatch.setenv("SPECSYNTH_MAX_PRODUCT_STATES", "0")
        get_settings.cache_clear()
        with pytest.raises(ValidationError):
            get_settings()


class TestStreams:
    def test_same_seed_same_draws(self):
        a, b = spawn_streams(9), spawn_streams(9)
        for left, right in zip(a, b):
            assert left.random(5).tolist() == right.random(5).tolist()

    def test_streams_are_distinct(self):
        streams = spawn_streams(9)
        draws = {tuple(g.random(3).tolist()) for g in streams}
        assert len(draws) == 3


class TestLogging:
    def test_worker_prefix(self):
        adapter = get_logger("specsynth.test", "seed-3")
        assert isinstance(adapter, WorkerAdapter)
        assert adapter.process("episode 10", {}) == ("[seed-3] episode 10", {})
        assert get_logger("specsynth.test").process("plain", {}) == ("plain", {})

    def test_configure_replaces_own_handler(self):
        root = logging.getLogger()
        level = root.level
        for handler in [h for h in root.handlers if getattr(h, "specsynth", False)]:
            root.removeHandler(handler)
        before = len(root.handlers)
        configure_logging("INFO")
        configure_logging("DEBUG")
        try:
            assert len(root.handlers) == before + 1
            assert root.level == logging.DEBUG
        finally:
            for handler in [h for h in root.handlers if getattr(h, "specsynth", False)]:
                root.removeHandler(handler)
            root.setLevel(level)
