from passgraph.evaluation.kpi import KpiProfile, kpi_profiles, role_distributions
from passgraph.evaluation.metrics import (
    brier_score,
    comparison_table,
    global_auroc,
    metrics_summary,
    stratified_metrics,
    topk_accuracy,
)
from passgraph.evaluation.records import PredictionRecord, build_records, make_record
