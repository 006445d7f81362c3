import shutil

import pytest

from shared.config import REPO_ROOT, get_settings
from specsynth.services.envs import make_counterexample
from storage.connection import ArtifactStore
from storage.repositories.automaton_repo import AutomatonRepository
from storage.repositories.model_repo import ModelRepository


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture(scope="session")
def automata():
    repo = AutomatonRepository(ArtifactStore(REPO_ROOT / "artifacts"))
    return {name: repo.load(f"{name}.ldba") for name in ("gfp", "fgp", "phi1", "phi2")}


@pytest.fixture
def gfp(automata):
    return automata["gfp"]


@pytest.fixture
def fgp(automata):
    return automata["fgp"]


@pytest.fixture
def phi1(automata):
    return automata["phi1"]


@pytest.fixture
def phi2(automata):
    return automata["phi2"]


@pytest.fixture
def counterexample():
    """make_counterexample as a fixture: counterexample(nu) -> (model, automaton)"""
    return make_counterexample


@pytest.fixture(scope="session")
def env_specs():
    repo = ModelRepository(ArtifactStore(REPO_ROOT / "artifacts"))
    return {name: repo.load_env_spec(name) for name in ("grid3", "grid5", "grid10", "pacman5")}


@pytest.fixture
def artifact_dir(tmp_path, monkeypatch):
    """Copy of the shipped artifacts, installed as the configured artifact directory"""
    root = tmp_path / "artifacts"
    shutil.copytree(REPO_ROOT / "artifacts", root)
    monkeypatch.setenv("SPECSYNTH_ARTIFACTS_DIR", str(root))
    get_settings.cache_clear()
    return root
