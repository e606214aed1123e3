"""The work generator: candidate synthesis, the best-K population and the
asynchronous coordinator/worker loop."""

from __future__ import annotations

import bisect
import math
import queue
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from loguru import logger

from cants.agents import PathStats, create_path, new_agent
from cants.clustering import condense_paths
from cants.config import ColonyConfig
from cants.dataio import Dataset
from cants.genome import RnnGenome, build_genome
from cants.pheromone import PheromoneConfig, PheromoneSpace, reward_genome
from cants.training import train

HISTORY_FIELDS = (
    "iteration",
    "candidate_id",
    "fitness",
    "accepted",
    "best_fitness",
    "population_worst",
    "nodes",
    "edges",
    "recurrent_edges",
)


class GenerationError(RuntimeError):
    """Every agent path of a swarm was abandoned."""


class Population:
    """Best-K genomes, ascending by fitness (lower is better)."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("population capacity must be >= 1")
        self.capacity = capacity
        self.members: list = []
        self._keys: list[float] = []

    def offer(self, genome, fitness: float) -> bool:
        """Insert when there is room or ``fitness`` beats the worst member.

        Ties with the worst member and non-finite fitness are rejected.
        """
        if not math.isfinite(fitness):
            return False
        if len(self.members) >= self.capacity:
            if not fitness < self._keys[-1]:
                return False
            self.members.pop()
            self._keys.pop()
        i = bisect.bisect_right(self._keys, fitness)
        self._keys.insert(i, fitness)
        self.members.insert(i, genome)
        return True

    @property
    def fitnesses(self) -> list[float]:
        return list(self._keys)

    @property
    def best(self):
        return self.members[0] if self.members else None

    @property
    def best_fitness(self) -> float:
        return self._keys[0] if self._keys else math.inf

    @property
    def worst_fitness(self) -> float:
        return self._keys[-1] if self._keys else math.inf

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class HistoryRow:
    iteration: int
    candidate_id: int
    fitness: float
    accepted: bool
    best_fitness: float
    population_worst: float
    nodes: int
    edges: int
    recurrent_edges: int

    def as_row(self) -> list[str]:
        return [
            str(self.iteration),
            str(self.candidate_id),
            repr(float(self.fitness)),
            str(int(self.accepted)),
            repr(float(self.best_fitness)),
            repr(float(self.population_worst)),
            str(self.nodes),
            str(self.edges),
            str(self.recurrent_edges),
        ]


class Colony:
    """Owns the search space and population; all mutation happens here."""

    def __init__(self, config: ColonyConfig, num_inputs: int, num_outputs: int, recorder: Callable[[dict], None] | None = None):
        self.config = config
        pcfg = PheromoneConfig(
            initial=config.initial_pheromone,
            maximum=config.pheromone_max,
            decay=config.pheromone_decay,
            reward=config.pheromone_reward,
            evict_threshold=config.evict_threshold,
            grid_cell=config.grid_cell,
        )
        self.space = PheromoneSpace(num_inputs, num_outputs, config.levels, pcfg)
        self.population = Population(config.population_size)
        self.rng = np.random.default_rng(config.seed)
        self.stats = PathStats()
        self.history: list[HistoryRow] = []
        self.recorder = recorder
        self.generated = 0
        self.decay_passes = 0
        self.evicted = 0

    def generate_candidate(self) -> RnnGenome:
        """Run one swarm and turn its paths into a genome.

        One decay pass follows every generated candidate.
        """
        cfg = self.config
        paths = []
        for _ in range(cfg.num_ants):
            agent = new_agent(self.rng, cfg.sensing_radius, cfg.exploitation)
            path = create_path(agent, self.space, self.rng, self.stats)
            if path is not None:
                paths.append(path)
        if not paths:
            raise GenerationError(f"all {cfg.num_ants} agent paths were abandoned")
        centroids, condensed = condense_paths(paths, self.space, cfg.dbscan_eps, cfg.dbscan_min_pts)
        genome = build_genome(condensed, centroids, self.space, self.rng, cfg.weight_init)
        genome.candidate_id = self.generated
        self.generated += 1
        self.evicted += self.space.decay_all()
        self.decay_passes += 1
        return genome

    def report_fitness(self, genome: RnnGenome, fitness: float) -> bool:
        genome.fitness = fitness
        accepted = self.population.offer(genome, fitness)
        if accepted:
            reward_genome(self.space, genome)
        s = genome.summary()
        self.history.append(
            HistoryRow(
                iteration=len(self.history),
                candidate_id=genome.candidate_id if genome.candidate_id is not None else -1,
                fitness=fitness,
                accepted=accepted,
                best_fitness=self.population.best_fitness,
                population_worst=self.population.worst_fitness,
                nodes=s["nodes"],
                edges=s["edges"],
                recurrent_edges=s["recurrent_edges"],
            )
        )
        if accepted and self.recorder is not None:
            self.recorder(self.frame(genome))
        return accepted

    def frame(self, genome: RnnGenome) -> dict:
        return {
            "iteration": len(self.history) - 1,
            "candidate_id": genome.candidate_id,
            "points": self.space.snapshot(),
            "paths": [[list(c) for c in path] for path in genome.provenance.paths],
            "genome": genome.summary(),
        }


@dataclass
class CandidateRequest:
    worker: int


@dataclass
class FitnessReport:
    worker: int
    candidate_id: int
    genome: object
    fitness: float
    error: str | None = None


@dataclass
class RunResult:
    best: RnnGenome | None
    history: list[HistoryRow]
    space: list[dict]
    colony: Colony
    arrivals: list[FitnessReport] = field(default_factory=list)


def coordinate(colony, evaluate: Callable, workers: int, max_iterations: int) -> list[FitnessReport]:
    """Serve candidates to ``workers`` threads until ``max_iterations`` reports.

    Workers pull work whenever they are idle. The coordinator handles one
    message at a time, so the colony sees reports strictly in arrival order.
    A worker whose evaluation raises reports ``inf``, which is rejected.
    """
    if workers < 1 or max_iterations < 1:
        raise ValueError("workers and max_iterations must be >= 1")
    inbox: queue.Queue = queue.Queue()
    outboxes = [queue.Queue() for _ in range(workers)]

    def worker_loop(wid: int) -> None:
        while True:
            inbox.put(CandidateRequest(wid))
            genome = outboxes[wid].get()
            if genome is None:
                return
            try:
                trained, fitness = evaluate(genome)
                error = None
            except Exception as exc:  # noqa: BLE001 - reported to the coordinator
                trained, fitness, error = genome, math.inf, f"{type(exc).__name__}: {exc}"
            inbox.put(FitnessReport(wid, genome.candidate_id, trained, fitness, error))

    threads = [threading.Thread(target=worker_loop, args=(w,), daemon=True) for w in range(workers)]
    for t in threads:
        t.start()
    arrivals: list[FitnessReport] = []
    issued = 0
    try:
        while len(arrivals) < max_iterations:
            msg = inbox.get()
            if isinstance(msg, CandidateRequest):
                if issued < max_iterations:
                    issued += 1
                    outboxes[msg.worker].put(colony.generate_candidate())
                else:
                    outboxes[msg.worker].put(None)
            else:
                if msg.error is not None:
                    logger.warning("worker {} failed on candidate {}: {}", msg.worker, msg.candidate_id, msg.error)
                colony.report_fitness(msg.genome, msg.fitness)
                arrivals.append(msg)
    finally:
        for box in outboxes:
            box.put(None)
        for t in threads:
            t.join(timeout=60)
    return arrivals


def run(config: ColonyConfig, dataset: Dataset, evaluate: Callable | None = None, recorder=None) -> RunResult:
    """Full search on a normalized, split dataset."""
    if not dataset.normalized:
        raise ValueError("dataset must be normalized and split before a run")
    colony = Colony(config, len(dataset.inputs), len(dataset.outputs), recorder)
    if evaluate is None:

        def evaluate(genome):
            trained, report = train(
                genome, dataset, config.epochs, config.learning_rate, config.grad_clip, config.horizon
            )
            return trained, report.fitness

    arrivals = coordinate(colony, evaluate, config.workers, config.max_iterations)
    logger.info(
        "run finished: {} candidates, best fitness {:.6g}, {} aborted / {} dropped paths",
        len(arrivals),
        colony.population.best_fitness,
        colony.stats.aborted,
        colony.stats.dropped,
    )
    return RunResult(colony.population.best, colony.history, colony.space.snapshot(), colony, arrivals)
