"""
Model Repository
Reads and writes PL-MDP model files and environment spec files
"""
import json
from pathlib import Path
from typing import Optional, Union

from pydantic import TypeAdapter, ValidationError

from specsynth.errors import ModelValidationError
from specsynth.models.envs import EnvSpec, GridSpec, PacmanSpec
from specsynth.models.plmdp import PLMDP, PLMDPDocument
from specsynth.services.plmdp import load_plmdp, to_document
from storage.connection import ArtifactStore, PathLike

_env_spec = TypeAdapter(EnvSpec)


class ModelRepository:
    """Repository for models and environment layouts"""

    def __init__(self, store: Optional[ArtifactStore] = None):
        self.store = store or ArtifactStore()

    def load_document(self, path: PathLike) -> PLMDPDocument:
        path = Path(path)
        try:
            return PLMDPDocument.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as exc:
            raise ModelValidationError(f"{path}: {exc}") from exc

    def load_model(self, path: PathLike) -> PLMDP:
        """
        Load and validate a model file.

        Raises:
            ModelValidationError: On schema or normalization errors
        """
        return load_plmdp(self.load_document(path))

    def save_model(self, model: PLMDP, path: PathLike) -> Path:
        path = Path(path)
        path.write_text(json.dumps(to_document(model).to_dict(), indent=2) + "\n", encoding="utf-8")
        return path

    def load_env_spec(self, name: PathLike) -> Union[GridSpec, PacmanSpec]:
        path = self.store.resolve(name, ArtifactStore.ENVS)
        try:
            return _env_spec.validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as exc:
            raise ModelValidationError(f"{path}: {exc}") from exc
