from passgraph.training.optim import AdamWState, PlateauState, adamw_step, plateau_scheduler
from passgraph.training.search import SearchSpace, random_search
from passgraph.training.trainer import (
    DatasetSplit,
    TrainConfig,
    TrainReport,
    evaluate_graphs,
    split_dataset,
    train,
)
