"""Continuous ant-based neural topology search.

Pheromone-guided agents walk a stack of continuous planes (one per time lag),
their paths are condensed with DBSCAN into recurrent network genomes, and the
genomes are trained with BPTT and kept in a best-K population.
"""

from cants.cells import CellType
from cants.config import ColonyConfig, ConfigError
from cants.pheromone import PheromoneConfig, PheromonePoint, PheromoneSpace
from cants.agents import AgentPath, CantAgent, create_path
from cants.clustering import dbscan, condense_paths
from cants.genome import RnnGenome, build_genome
from cants.network import UnrolledNet
from cants.training import TrainReport, evaluate, train
from cants.colony import Colony, Population, run
from cants.dataio import Dataset, load_csv, synth_generate

__version__ = "0.1.0"

__all__ = [
    "AgentPath",
    "CantAgent",
    "CellType",
    "Colony",
    "ColonyConfig",
    "ConfigError",
    "Dataset",
    "PheromoneConfig",
    "PheromonePoint",
    "PheromoneSpace",
    "Population",
    "RnnGenome",
    "TrainReport",
    "UnrolledNet",
    "build_genome",
    "condense_paths",
    "create_path",
    "dbscan",
    "evaluate",
    "load_csv",
    "run",
    "synth_generate",
    "train",
]
