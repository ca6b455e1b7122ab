from passgraph.baselines.logreg import (
    LogRegModel,
    load_logreg,
    logreg_predict,
    logreg_train,
    save_logreg,
)
from passgraph.baselines.nearest import (
    NearestPlayerModel,
    nearest_player_predict,
    nearest_player_proba,
)
