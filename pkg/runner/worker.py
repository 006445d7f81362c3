"""
Sweep Worker
Runs a seed sweep for a manifest file
"""
import asyncio
import os
import sys

from runner.sweep import SeedSweep
from shared.config import get_settings
from shared.utils import configure_logging, get_logger
from specsynth.models.manifest import RunManifest


async def main(argv=None) -> int:
    """
    Run a sweep.

    Usage: python -m runner.worker MANIFEST SEED [SEED ...]
    The worker id comes from WORKER_ID, else worker-<pid>.
    """
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) < 2:
        print("usage: python -m runner.worker MANIFEST SEED [SEED ...]", file=sys.stderr)
        return 2
    worker_id = os.getenv("WORKER_ID") or get_settings().worker_id or f"worker-{os.getpid()}"
    configure_logging(get_settings().log)
    log = get_logger(__name__, worker_id)

    with open(argv[0], encoding="utf-8") as handle:
        manifest = RunManifest.model_validate_json(handle.read())
    seeds = [int(s) for s in argv[1:]]
    log.info("Starting sweep of %s over seeds %s", argv[0], seeds)
    try:
        result = await SeedSweep(manifest, worker_id=worker_id).run(seeds)
    except KeyboardInterrupt:
        log.warning("Sweep stopped by user")
        return 130
    print(f"{len(result.curves)} runs, converged={result.converged}")
    return 0


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
