"""
Environment Service
Builds the gridworld, Pacman, counterexample and random PL-MDPs
"""
import itertools
import logging
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from specsynth.errors import InvalidParameterError, ModelValidationError
from specsynth.models.automaton import LDBA
from specsynth.models.envs import Cell, GridCase, GridSpec, PacmanSpec
from specsynth.models.plmdp import PROBABILITY_TOLERANCE, PLMDP
from specsynth.services.plmdp import build_plmdp
from storage.repositories.automaton_repo import AutomatonRepository

logger = logging.getLogger(__name__)

DIRECTIONS = ("Up", "Right", "Down", "Left")
OFFSETS = {"Up": (0, -1), "Right": (1, 0), "Down": (0, 1), "Left": (-1, 0), "None": (0, 0)}
MOVES = DIRECTIONS + ("None",)
CAMERA = ("TakePicture", "NoPicture")
GRID_ACTIONS = tuple(f"{move}/{camera}" for move in MOVES for camera in CAMERA)
CASE_II_NOISE = 0.8


def _inside(cell: Cell, width: int, height: int) -> bool:
    return 0 <= cell[0] < width and 0 <= cell[1] < height


def _shift(cell: Cell, move: str) -> Cell:
    dx, dy = OFFSETS[move]
    return cell[0] + dx, cell[1] + dy


def make_gridworld(case: Union[GridCase, str], spec: GridSpec) -> PLMDP:
    """
    Gridworld with 10 actions per cell (5 moves x 2 camera settings).

    Args:
        case: "I" for deterministic moves, "II" for noisy moves
        spec: Layout and label table

    Returns:
        PLMDP: One state per cell, index y * width + x

    Raises:
        ModelValidationError: On an unknown case or an invalid layout
    """
    try:
        case = GridCase(case)
    except ValueError:
        raise ModelValidationError(f"Unknown gridworld case {case!r}; expected I or II") from None
    width, height = spec.width, spec.height
    if not _inside(spec.start, width, height):
        raise ModelValidationError(f"Start cell {spec.start} lies outside the grid")
    noise = 1.0 if case is GridCase.I else (spec.noise if spec.noise is not None else CASE_II_NOISE)

    def index(cell: Cell) -> int:
        return cell[1] * width + cell[0]

    def outcome(cell: Cell, move: str) -> int:
        target = _shift(cell, move)
        return index(target) if _inside(target, width, height) else index(cell)

    kernel: Dict[Tuple[int, str], Dict[int, float]] = {}
    for y in range(height):
        for x in range(width):
            cell = (x, y)
            for action in GRID_ACTIONS:
                move = action.split("/")[0]
                dist: Dict[int, float] = {}
                if move == "None":
                    dist[index(cell)] = 1.0
                else:
                    dist[outcome(cell, move)] = noise
                    for other in DIRECTIONS:
                        if other != move:
                            slot = outcome(cell, other)
                            dist[slot] = dist.get(slot, 0.0) + (1.0 - noise) / 3.0
                kernel[(index(cell), action)] = dist

    labels: Dict[int, Dict[frozenset, float]] = {i: {frozenset(): 1.0} for i in range(width * height)}
    for entry in spec.cells:
        if not _inside(entry.cell, width, height):
            raise ModelValidationError(f"Labelled cell {entry.cell} lies outside the grid")
        total = sum(o.p for o in entry.dist)
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise ModelValidationError(f"Label row of cell {entry.cell} sums to {total}")
        labels[index(entry.cell)] = {frozenset(o.labels): o.p for o in entry.dist}

    model = build_plmdp(
        n_states=width * height,
        initial=index(spec.start),
        ap=spec.ap,
        actions=[list(GRID_ACTIONS)] * (width * height),
        kernel=kernel,
        labels=labels,
        name=f"{spec.name or 'grid'}-{case.value}",
    )
    logger.info("Built gridworld %s (case %s, noise %.2f)", model.name, case.value, noise)
    return model


def _ghost_moves(ghost: Cell, pacman: Cell, open_cells: set, p_g: float) -> Dict[Cell, float]:
    legal = [c for c in (_shift(ghost, d) for d in DIRECTIONS) if c in open_cells]
    if not legal:
        return {ghost: 1.0}
    distance = abs(ghost[0] - pacman[0]) + abs(ghost[1] - pacman[1])
    closer = [c for c in legal if abs(c[0] - pacman[0]) + abs(c[1] - pacman[1]) < distance]
    moves: Dict[Cell, float] = {}
    wander = (1.0 - p_g) if closer else 1.0
    if closer:
        moves[closer[0]] = p_g
    for c in legal:
        moves[c] = moves.get(c, 0.0) + wander / len(legal)
    return moves


def make_pacman(spec: PacmanSpec) -> PLMDP:
    """
    Pacman with ghosts that chase with probability p_g.

    States are tuples (pacman cell, ghost cells...) over open cells. Pacman
    moves first; each ghost then moves towards Pacman's new cell with
    probability p_g (first strictly closer move in Up, Right, Down, Left
    order) and otherwise to a uniformly random open neighbour.

    Raises:
        ModelValidationError: If an agent or a food cell is on a wall or off the grid
    """
    width, height = spec.width, spec.height
    walls = set(map(tuple, spec.walls))
    placed = {"pacman_start": spec.pacman_start, "food1": spec.food1, "food2": spec.food2}
    placed.update({f"ghost_starts[{i}]": g for i, g in enumerate(spec.ghost_starts)})
    for what, cell in placed.items():
        if not _inside(cell, width, height):
            raise ModelValidationError(f"{what} {cell} lies outside the grid")
        if tuple(cell) in walls:
            raise ModelValidationError(f"{what} {cell} is placed on a wall")

    open_cells = [(x, y) for y in range(height) for x in range(width) if (x, y) not in walls]
    open_set = set(open_cells)
    agents = 1 + len(spec.ghost_starts)
    states = list(itertools.product(open_cells, repeat=agents))
    state_index = {s: i for i, s in enumerate(states)}

    def pacman_move(cell: Cell, move: str) -> Cell:
        target = _shift(cell, move)
        return target if target in open_set else cell

    kernel: Dict[Tuple[int, str], Dict[int, float]] = {}
    labels: Dict[int, Dict[frozenset, float]] = {}
    for i, (pacman, *ghosts) in enumerate(states):
        for move in MOVES:
            moved = pacman_move(pacman, move)
            per_ghost = [_ghost_moves(g, moved, open_set, spec.p_g).items() for g in ghosts]
            dist: Dict[int, float] = {}
            for combo in itertools.product(*per_ghost):
                p = float(np.prod([prob for _, prob in combo]))
                j = state_index[(moved, *(cell for cell, _ in combo))]
                dist[j] = dist.get(j, 0.0) + p
            kernel[(i, move)] = dist
        if pacman in ghosts:
            labels[i] = {frozenset(["ghost"]): 1.0}
        elif pacman in (tuple(spec.food1), tuple(spec.food2)):
            food = "food1" if pacman == tuple(spec.food1) else "food2"
            labels[i] = {frozenset([food]): spec.food_probability, frozenset(): 1.0 - spec.food_probability}
        else:
            labels[i] = {frozenset(["neutral"]): 1.0}

    start = (tuple(spec.pacman_start), *(tuple(g) for g in spec.ghost_starts))
    model = build_plmdp(
        n_states=len(states),
        initial=state_index[start],
        ap=["food1", "food2", "ghost", "neutral"],
        actions=[list(MOVES)] * len(states),
        kernel=kernel,
        labels=labels,
        name=spec.name or "pacman",
    )
    logger.info("Built Pacman %s with %d states", model.name, model.n_states)
    return model


def pacman_state(spec: PacmanSpec, pacman: Cell, *ghosts: Cell) -> int:
    """Index of the state with the given agent cells"""
    walls = set(map(tuple, spec.walls))
    open_cells = [(x, y) for y in range(spec.height) for x in range(spec.width) if (x, y) not in walls]
    position = {c: i for i, c in enumerate(open_cells)}
    index = 0
    for cell in (pacman, *ghosts):
        index = index * len(open_cells) + position[tuple(cell)]
    return index


def make_counterexample(nu: float) -> Tuple[PLMDP, LDBA]:
    """
    Six-state model where s0 chooses between right (s1 with 1 - nu, else s2)
    and left (the s3 -> s4 -> s5 cycle), paired with the G F p automaton.
    """
    if not 0.0 <= nu <= 1.0:
        raise ModelValidationError(f"nu must lie in [0, 1], got {nu}")
    actions = [["right", "left"], ["stay"], ["stay"], ["next"], ["next"], ["next"]]
    kernel = {
        (0, "right"): {1: 1.0 - nu, 2: nu},
        (0, "left"): {3: 1.0},
        (1, "stay"): {1: 1.0},
        (2, "stay"): {2: 1.0},
        (3, "next"): {4: 1.0},
        (4, "next"): {5: 1.0},
        (5, "next"): {3: 1.0},
    }
    labels = {x: {frozenset(["p"] if x in (1, 5) else ["u"]): 1.0} for x in range(6)}
    model = build_plmdp(6, 0, ["p", "u"], actions, kernel, labels, name=f"counterexample-{nu:g}")
    return model, AutomatonRepository().load("gfp.ldba")


def random_plmdp(seed: Optional[int], n_states: int, n_actions: int, n_props: int) -> PLMDP:
    """
    Seeded random model for oracle tests.

    Action a0 of every state keeps an edge x -> x+1 (mod n), so the model is
    strongly connected. Propositions are p, a1, a2, ...; some state emits p
    with positive probability.
    """
    if n_states < 1 or n_actions < 1 or n_props < 1:
        raise InvalidParameterError("n_states, n_actions and n_props must be positive")
    rng = np.random.default_rng(seed)
    ap = ["p"] + [f"a{i}" for i in range(1, n_props)]
    actions = [[f"a{i}" for i in range(n_actions)] for _ in range(n_states)]
    kernel: Dict[Tuple[int, str], Dict[int, float]] = {}
    for x in range(n_states):
        for i, name in enumerate(actions[x]):
            size = int(rng.integers(1, min(3, n_states) + 1))
            support = [int(s) for s in rng.choice(n_states, size=size, replace=False)]
            if i == 0 and (x + 1) % n_states not in support:
                support[0] = (x + 1) % n_states
            weights = rng.dirichlet(np.ones(len(support)))
            kernel[(x, name)] = {s: float(w) for s, w in zip(support, weights)}

    labels: Dict[int, Dict[frozenset, float]] = {}
    for x in range(n_states):
        count = int(rng.integers(1, 3))
        row: Dict[frozenset, float] = {}
        for weight in rng.dirichlet(np.ones(count)):
            label = frozenset(a for a in ap if rng.random() < 0.4)
            row[label] = row.get(label, 0.0) + float(weight)
        labels[x] = row
    if not any("p" in label for row in labels.values() for label in row):
        first = next(iter(labels[0]))
        labels[0][first | {"p"}] = labels[0].pop(first)
    return build_plmdp(n_states, 0, ap, actions, kernel, labels, name=f"random-{seed}")


def make_environment(spec: Union[GridSpec, PacmanSpec], case: Union[GridCase, str] = GridCase.I) -> PLMDP:
    if isinstance(spec, PacmanSpec):
        return make_pacman(spec)
    return make_gridworld(case, spec)
