"""
Artifact Store
Resolves shipped automata and environment specs, and run output directories
"""
from pathlib import Path
from typing import List, Optional, Union

from shared.config import get_settings

PathLike = Union[str, Path]


class ArtifactStore:
    AUTOMATA = "automata"
    ENVS = "envs"
    SUFFIXES = {AUTOMATA: ".ldba", ENVS: ".spec"}

    def __init__(self, root: Optional[PathLike] = None):
        self.root = Path(root) if root is not None else Path(get_settings().artifacts_dir)

    def resolve(self, name: PathLike, kind: str) -> Path:
        """
        Find an artifact by path or by shipped name.

        Args:
            name: Existing path, or a file name / stem under <root>/<kind>
            kind: ArtifactStore.AUTOMATA or ArtifactStore.ENVS

        Returns:
            Path of the artifact

        Raises:
            FileNotFoundError: If nothing matches
        """
        path = Path(name)
        if path.is_file():
            return path
        folder = self.root / kind
        for candidate in (folder / path.name, folder / f"{path.name}{self.SUFFIXES[kind]}"):
            if candidate.is_file():
                return candidate
        raise FileNotFoundError(f"No {kind} artifact named {name!s} (looked in {folder})")

    def list(self, kind: str) -> List[Path]:
        return sorted((self.root / kind).glob(f"*{self.SUFFIXES[kind]}"))

    @staticmethod
    def run_dir(path: PathLike) -> Path:
        directory = Path(path)
        directory.mkdir(parents=True, exist_ok=True)
        return directory
