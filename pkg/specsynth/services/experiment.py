"""
Experiment Service
Resolves the inputs of a run manifest and carries out a learning run
"""
import logging
from pathlib import Path
from typing import NamedTuple, Optional, Tuple

from specsynth.errors import AutomatonValidationError
from specsynth.models.automaton import LDBA
from specsynth.models.learning import LearningCurve, Policy
from specsynth.models.manifest import RunManifest
from specsynth.models.plmdp import PLMDP
from specsynth.services.envs import make_environment
from specsynth.services.learner import extract_policy, run_learning
from specsynth.services.ltl import parse_ltl
from storage.repositories.automaton_repo import AutomatonRepository
from storage.repositories.model_repo import ModelRepository
from storage.repositories.run_repo import RunRepository

logger = logging.getLogger(__name__)


class RunInputs(NamedTuple):
    model: PLMDP
    automaton: LDBA
    model_name: str


def resolve_automaton(automaton: Optional[str], formula: Optional[str]) -> LDBA:
    """
    Load the named automaton, or the shipped one recognising formula.

    Raises:
        AutomatonValidationError: If no shipped automaton matches the formula
    """
    repo = AutomatonRepository()
    if automaton is not None:
        return repo.load(automaton)
    found = repo.find_by_formula(parse_ltl(formula))
    if found is None:
        raise AutomatonValidationError(f"No shipped automaton recognises {formula!r}; pass --automaton")
    return found


def load_inputs(manifest: RunManifest) -> RunInputs:
    if manifest.model is not None:
        model = ModelRepository().load_model(manifest.model)
        name = model.name or Path(manifest.model).stem
    else:
        model = make_environment(ModelRepository().load_env_spec(manifest.env), manifest.case)
        name = model.name
    automaton = resolve_automaton(manifest.automaton, manifest.formula)
    logger.info("Loaded model %s (%d states) and automaton %s (%d states)",
                name, model.n_states, automaton.name, automaton.n_states)
    return RunInputs(model, automaton, name)


def learn_run(
    manifest: RunManifest,
    out: Optional[Path] = None,
    worker_id: Optional[str] = None,
) -> Tuple[LearningCurve, Policy]:
    """
    Learn with the manifest's config and write curve.csv, policy.json and
    manifest.json to out (the manifest's directory by default).
    """
    inputs = load_inputs(manifest)
    qtable, curve = run_learning(inputs.model, inputs.automaton, manifest.config, worker_id=worker_id)
    policy = extract_policy(qtable, inputs.automaton, manifest.config.preread_initial_label)
    repo = RunRepository(out if out is not None else manifest.out)
    repo.save_curve(curve)
    repo.save_policy(policy)
    repo.save_manifest(manifest)
    return curve, policy
