from passgraph.model.model_io import load_model, save_model
from passgraph.model.mpnn import (
    MpnnConfig,
    MpnnModel,
    backward,
    forward,
    init_model,
    loss_and_gradients,
    predict_proba,
    predict_topk,
    rank_order,
    replay,
    training_step,
)
