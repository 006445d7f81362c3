"""
Automaton Repository
Reads and writes .ldba documents
"""
import json
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from specsynth.errors import AutomatonValidationError
from specsynth.models.automaton import LDBA, LDBADocument
from specsynth.models.formula import Formula
from specsynth.services.automaton import load_ldba
from specsynth.services.ltl import parse_ltl
from storage.connection import ArtifactStore, PathLike


class AutomatonRepository:
    """Repository for LDBA documents"""

    def __init__(self, store: Optional[ArtifactStore] = None):
        self.store = store or ArtifactStore()

    def load_document(self, name: PathLike) -> LDBADocument:
        """
        Read and schema-check an automaton file.

        Args:
            name: Path or shipped name (e.g. phi1.ldba, phi1)

        Returns:
            LDBADocument

        Raises:
            AutomatonValidationError: If the file is not a valid document
        """
        path = self.store.resolve(name, ArtifactStore.AUTOMATA)
        try:
            return LDBADocument.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as exc:
            raise AutomatonValidationError(f"{path}: {exc}") from exc

    def load(self, name: PathLike) -> LDBA:
        return load_ldba(self.load_document(name))

    def save(self, document: LDBADocument, path: PathLike) -> Path:
        path = Path(path)
        path.write_text(json.dumps(document.to_dict(), indent=2) + "\n", encoding="utf-8")
        return path

    def find_by_formula(self, formula: Formula) -> Optional[LDBA]:
        """Shipped automaton whose declared formula parses to the same tree, if any"""
        for path in self.store.list(ArtifactStore.AUTOMATA):
            document = self.load_document(path)
            if document.formula and parse_ltl(document.formula) == formula:
                return load_ldba(document)
        return None
