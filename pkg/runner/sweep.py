"""
Seed Sweep
Runs independent learning runs concurrently, one per seed
"""
import asyncio
from concurrent.futures import Executor, ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import BaseModel, Field

from shared.utils import get_logger
from specsynth.models.learning import CurvePoint, LearningCurve
from specsynth.models.manifest import RunManifest
from specsynth.services.experiment import learn_run
from storage.repositories.run_repo import RunRepository


class SweepResult(BaseModel):
    curves: Dict[int, LearningCurve] = Field(default_factory=dict)
    mean: LearningCurve = Field(default_factory=LearningCurve)

    @property
    def converged(self) -> bool:
        return all(c.converged for c in self.curves.values())


def _learn_one(manifest_json: str, seed: int, out: str) -> str:
    """Process-pool entry point; returns the curve as JSON"""
    manifest = RunManifest.model_validate_json(manifest_json)
    manifest.config = manifest.config.model_copy(update={"seed": seed})
    manifest.out = out
    curve, _ = learn_run(manifest, Path(out), worker_id=f"seed-{seed}")
    return curve.model_dump_json()


def mean_curve(curves: Sequence[LearningCurve]) -> LearningCurve:
    """
    Per-episode mean of u_s0. A run that stopped early keeps contributing
    its last recorded value.
    """
    episodes = sorted({p.episode for c in curves for p in c.points})
    points: List[CurvePoint] = []
    for episode in episodes:
        values = []
        for curve in curves:
            seen = [p.u_s0 for p in curve.points if p.episode <= episode]
            if seen:
                values.append(seen[-1])
        points.append(CurvePoint(episode=episode, u_s0=sum(values) / len(values)))
    return LearningCurve(
        points=points,
        episodes=max((c.episodes for c in curves), default=0),
        converged=bool(curves) and all(c.converged for c in curves),
    )


class SeedSweep:
    """Learning runs of one manifest under several seeds, written to <out>/seed-<n>/"""

    def __init__(self, manifest: RunManifest, executor: Optional[Executor] = None, worker_id: Optional[str] = None):
        self.manifest = manifest
        self.repo = RunRepository(manifest.out)
        self.executor = executor
        self.log = get_logger(__name__, worker_id)

    async def run(self, seeds: Sequence[int]) -> SweepResult:
        loop = asyncio.get_running_loop()
        executor = self.executor or ProcessPoolExecutor(max_workers=len(seeds) or None)
        payload = self.manifest.model_dump_json()
        self.log.info("Sweeping %d seeds into %s", len(seeds), self.repo.directory)
        try:
            futures = [
                loop.run_in_executor(
                    executor, _learn_one, payload, seed, str(self.repo.subdirectory(f"seed-{seed}").directory)
                )
                for seed in seeds
            ]
            results = await asyncio.gather(*futures)
        finally:
            if self.executor is None:
                executor.shutdown()

        curves = {seed: LearningCurve.model_validate_json(raw) for seed, raw in zip(seeds, results)}
        result = SweepResult(curves=curves, mean=mean_curve(list(curves.values())))
        self.repo.save_curve(result.mean, RunRepository.SWEEP)
        self.repo.save_manifest(self.manifest)
        for seed, curve in curves.items():
            self.log.info("seed %d: %d episodes, converged=%s", seed, curve.episodes, curve.converged)
        return result
