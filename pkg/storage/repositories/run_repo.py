"""
Run Repository
Reads and writes the files of one run output directory
"""
import csv
import json
from pathlib import Path
from typing import List, Union

from pydantic import BaseModel

from specsynth.models.learning import CurvePoint, LearningCurve, Policy, Trace
from specsynth.models.manifest import RunManifest
from specsynth.models.product import ProductState
from specsynth.models.report import VerificationReport
from storage.connection import ArtifactStore, PathLike

CURVE_HEADER = ("episode", "u_s0")


class RunRepository:
    """Repository for curve.csv, policy.json, report.json, trace.json and manifest.json"""

    CURVE = "curve.csv"
    SWEEP = "sweep.csv"
    POLICY = "policy.json"
    REPORT = "report.json"
    TRACE = "trace.json"
    MANIFEST = "manifest.json"

    def __init__(self, directory: PathLike):
        self.directory = ArtifactStore.run_dir(directory)

    def path(self, name: str) -> Path:
        return self.directory / name

    def _write_json(self, name: str, payload: Union[dict, list]) -> Path:
        path = self.path(name)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    def _read_json(self, name: Union[str, Path]):
        return json.loads(Path(self.path(name) if isinstance(name, str) else name).read_text(encoding="utf-8"))

    def save_curve(self, curve: LearningCurve, name: str = CURVE) -> Path:
        """
        Write a learning curve as CSV.

        Floats are written with repr, so the same curve always gives the same bytes.
        """
        path = self.path(name)
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CURVE_HEADER)
            for point in curve.points:
                writer.writerow((point.episode, repr(float(point.u_s0))))
        return path

    def load_curve(self) -> LearningCurve:
        return self.read_curve(self.path(self.CURVE))

    @staticmethod
    def read_curve(path: PathLike) -> LearningCurve:
        with Path(path).open(encoding="utf-8", newline="") as handle:
            rows = list(csv.DictReader(handle))
        points = [CurvePoint(episode=int(r["episode"]), u_s0=float(r["u_s0"])) for r in rows]
        return LearningCurve(points=points, episodes=points[-1].episode if points else 0)

    def save_policy(self, policy: Policy) -> Path:
        entries = [
            {**s.key(), "action": action, "fallback": s in policy.fallback}
            for s, action in policy.actions.items()
        ]
        entries.sort(key=lambda e: (e["x"], e["q"], e["label"]))
        return self._write_json(self.POLICY, {
            "automaton": policy.automaton,
            "preread_initial_label": policy.preread_initial_label,
            "entries": entries,
        })

    def load_policy(self) -> Policy:
        return self.read_policy(self.path(self.POLICY))

    @classmethod
    def read_policy(cls, path: PathLike) -> Policy:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        actions = {}
        fallback = set()
        for entry in payload["entries"]:
            s = ProductState(int(entry["x"]), frozenset(entry["label"]), int(entry["q"]))
            actions[s] = entry["action"]
            if entry.get("fallback"):
                fallback.add(s)
        return Policy(
            actions=actions,
            fallback=frozenset(fallback),
            automaton=payload.get("automaton"),
            preread_initial_label=payload.get("preread_initial_label", False),
        )

    def save_report(self, report: VerificationReport) -> Path:
        return self._save_model(self.REPORT, report)

    def load_report(self) -> VerificationReport:
        return VerificationReport.model_validate(self._read_json(self.REPORT))

    def save_trace(self, trace: Trace) -> Path:
        return self._save_model(self.TRACE, trace)

    def load_trace(self) -> Trace:
        return Trace.model_validate(self._read_json(self.TRACE))

    def save_manifest(self, manifest: RunManifest) -> Path:
        return self._write_json(self.MANIFEST, manifest.to_dict())

    def load_manifest(self) -> RunManifest:
        return RunManifest.model_validate(self._read_json(self.MANIFEST))

    def _save_model(self, name: str, document: BaseModel) -> Path:
        return self._write_json(name, document.model_dump(mode="json"))

    def subdirectory(self, name: str) -> "RunRepository":
        return RunRepository(self.directory / name)

    def list_seed_dirs(self) -> List[Path]:
        return sorted(p for p in self.directory.glob("seed-*") if p.is_dir())
