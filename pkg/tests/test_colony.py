import math
import random
import statistics
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import cants.colony as colony_mod
from cants.colony import Colony, GenerationError, Population, coordinate, run
from cants.config import ColonyConfig
from cants.dataio import normalize_and_split, synth_generate


def small_config(**kw):
    base = dict(num_ants=3, max_lag=2, population_size=4, epochs=2, max_iterations=12, seed=0)
    base.update(kw)
    return ColonyConfig(**base)


def test_population_evicts_worst():
    pop = Population(2)
    assert pop.offer("a", 0.5) and pop.offer("b", 0.9)
    assert pop.offer("c", 0.7)
    assert pop.fitnesses == [0.5, 0.7] and pop.members == ["a", "c"]


def test_population_rejects_worse_tie_and_inf():
    pop = Population(2)
    pop.offer("a", 0.5)
    pop.offer("b", 0.9)
    assert not pop.offer("c", 1.2)
    assert not pop.offer("d", 0.9)
    assert not pop.offer("e", math.inf)
    assert pop.fitnesses == [0.5, 0.9]


def test_population_fills_unconditionally():
    pop = Population(3)
    assert all(pop.offer(k, f) for k, f in (("a", 5.0), ("b", 9.0), ("c", 7.0)))
    assert pop.fitnesses == [5.0, 7.0, 9.0]
    assert not Population(1).offer("x", math.nan)


@settings(max_examples=200)
@given(cap=st.integers(1, 8), fits=st.lists(st.one_of(st.floats(0, 10), st.just(math.inf)), max_size=60))
def test_population_invariants(cap, fits):
    pop = Population(cap)
    worst_history = []
    for i, f in enumerate(fits):
        accepted = pop.offer(i, f)
        assert len(pop) <= cap
        assert pop.fitnesses == sorted(pop.fitnesses)
        assert all(math.isfinite(v) for v in pop.fitnesses)
        if accepted and len(pop) == cap:
            worst_history.append(pop.worst_fitness)
    # once full, the worst member only ever improves
    assert all(b <= a for a, b in zip(worst_history, worst_history[1:]))


def test_single_ant_candidate_is_a_chain():
    col = Colony(small_config(num_ants=1), 2, 1)
    g = col.generate_candidate()
    indeg = {n.id: 0 for n in g.nodes}
    outdeg = dict(indeg)
    for e in g.edges:
        indeg[e.dst] += 1
        outdeg[e.src] += 1
    assert len(g.edges) == len(g.hidden_nodes) + 1
    assert all(indeg[n.id] == 1 and outdeg[n.id] == 1 for n in g.hidden_nodes)


def test_decay_once_per_candidate():
    col = Colony(small_config(), 2, 1)
    for _ in range(5):
        col.generate_candidate()
    assert col.decay_passes == col.generated == 5


def test_identical_state_identical_candidates():
    a = Colony(small_config(num_ants=10, seed=4), 2, 1).generate_candidate()
    b = Colony(small_config(num_ants=10, seed=4), 2, 1).generate_candidate()
    assert a.to_json() == b.to_json()


def test_more_ants_bigger_candidates():
    def median_nodes(ants):
        col = Colony(small_config(num_ants=ants, max_lag=4, seed=0), 2, 1)
        return statistics.median(len(col.generate_candidate().hidden_nodes) for _ in range(20))

    assert median_nodes(150) > median_nodes(10)


def test_report_rewards_only_accepted():
    col = Colony(small_config(population_size=1), 2, 1)
    g1 = col.generate_candidate()
    assert col.report_fitness(g1, 0.5)
    levels_after_accept = col.space.level_pheromones.copy()
    g2 = col.generate_candidate()
    assert not col.report_fitness(g2, 0.9)
    np.testing.assert_array_equal(col.space.level_pheromones, levels_after_accept)
    assert [r.accepted for r in col.history] == [True, False]
    assert col.history[-1].best_fitness == 0.5


def test_generation_error_when_every_path_fails(monkeypatch):
    monkeypatch.setattr(colony_mod, "create_path", lambda *a, **k: None)
    with pytest.raises(GenerationError):
        Colony(small_config(), 1, 1).generate_candidate()


def test_recorder_gets_one_frame_per_accepted():
    frames = []
    col = Colony(small_config(population_size=2), 2, 1, recorder=frames.append)
    fits = [0.5, 0.4, 0.9, 0.3, 0.35, 0.6]
    for f in fits:
        col.report_fitness(col.generate_candidate(), f)
    assert len(frames) == sum(r.accepted for r in col.history) == 4
    assert [f["iteration"] for f in frames] == sorted(f["iteration"] for f in frames)
    assert set(frames[0]) == {"iteration", "candidate_id", "points", "paths", "genome"}


def _random_evaluator(seed, jitter):
    rng = random.Random(seed)
    fits = {}

    def evaluate(genome):
        f = fits.setdefault(genome.candidate_id, rng.choice([math.inf, rng.uniform(0, 1)]) if rng.random() < 0.1 else rng.uniform(0, 1))
        if jitter:
            time.sleep(rng.random() * jitter)
        return genome, f

    return evaluate


def _fold(reports, capacity):
    pop = Population(capacity)
    best = []
    for r in reports:
        pop.offer(r.candidate_id, r.fitness)
        best.append(pop.best_fitness)
    return pop, best


@pytest.mark.parametrize("seed", range(5))
def test_concurrent_coordinator_is_a_fold(seed):
    col = Colony(small_config(seed=seed), 2, 1)
    arrivals = coordinate(col, _random_evaluator(seed, 0.002), workers=4, max_iterations=15)
    pop, best = _fold(arrivals, col.population.capacity)
    assert [g.candidate_id for g in col.population.members] == pop.members
    assert col.population.fitnesses == pop.fitnesses
    assert [r.best_fitness for r in col.history] == best
    assert all(b <= a for a, b in zip(best, best[1:]))


def test_worker_failure_is_a_rejection():
    col = Colony(small_config(), 2, 1)

    def flaky(genome):
        if genome.candidate_id == 2:
            raise RuntimeError("boom")
        return genome, 0.1 * genome.candidate_id

    arrivals = coordinate(col, flaky, workers=2, max_iterations=6)
    failed = [r for r in arrivals if r.error]
    assert len(arrivals) == 6 and len(failed) == 1 and failed[0].fitness == math.inf
    assert 2 not in [g.candidate_id for g in col.population.members]


def test_run_with_four_workers_keeps_invariants():
    ds = normalize_and_split(synth_generate("noisy-sine", 300, 0.05, 0))
    for workers in (1, 4):
        res = run(small_config(workers=workers, max_iterations=10), ds)
        fits = res.colony.population.fitnesses
        assert len(fits) <= 4 and fits == sorted(fits)
        first_accepted = next(r.fitness for r in res.history if r.accepted)
        assert res.colony.population.best_fitness <= first_accepted
        assert res.colony.decay_passes == res.colony.generated == 10
        for p in res.colony.space.points.values():
            assert res.colony.space.cfg.evict_threshold < p.pheromone <= res.colony.space.cfg.maximum


def test_run_is_deterministic_with_one_worker():
    ds = normalize_and_split(synth_generate("noisy-sine", 300, 0.05, 0))
    a = run(small_config(), ds)
    b = run(small_config(), ds)
    assert [r.as_row() for r in a.history] == [r.as_row() for r in b.history]
    assert a.best.to_json() == b.best.to_json()


def test_run_needs_normalized_data():
    with pytest.raises(ValueError):
        run(small_config(), synth_generate("noisy-sine", 300))
