"""
Shared helpers: logging setup and seeded random sub-streams
"""
import logging
from typing import NamedTuple, Optional

import numpy as np

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


class WorkerAdapter(logging.LoggerAdapter):
    """Prefixes every record with the worker id, e.g. ``[seed-7] episode 100``"""

    def process(self, msg, kwargs):
        worker_id = self.extra.get("worker_id") if self.extra else None
        if worker_id:
            return f"[{worker_id}] {msg}", kwargs
        return msg, kwargs


def configure_logging(level: str = "WARNING") -> None:
    """Install the stream handler on the root logger, replacing one set up earlier."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "specsynth", False):
            root.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.specsynth = True
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(getattr(logging, str(level).upper(), logging.WARNING))


def get_logger(name: str, worker_id: Optional[str] = None) -> WorkerAdapter:
    return WorkerAdapter(logging.getLogger(name), {"worker_id": worker_id})


class RunStreams(NamedTuple):
    """Independent generators derived from one seed"""
    env: np.random.Generator
    labels: np.random.Generator
    learner: np.random.Generator


def spawn_streams(seed: Optional[int]) -> RunStreams:
    """
    Derive the named sub-streams of a run from a single seed.

    Args:
        seed: Root seed; None draws fresh OS entropy

    Returns:
        RunStreams with env, labels and learner generators
    """
    env, labels, learner = np.random.SeedSequence(seed).spawn(3)
    return RunStreams(
        env=np.random.default_rng(env),
        labels=np.random.default_rng(labels),
        learner=np.random.default_rng(learner),
    )
