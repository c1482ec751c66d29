from .attribution import AttributionError, AttributionMap, masking_attribution, top_decile_mass_in_region
from .neighbors import NeighborResult, cosine_distances, final_layer_embedding, nearest_neighbor, nn_audit
from .panels import save_panel
from .stats import Confusion, StatsError, confusion_and_accuracy, mann_whitney_one_sided, wilcoxon_signed_rank_vs

__all__ = [
    "AttributionError",
    "AttributionMap",
    "Confusion",
    "NeighborResult",
    "StatsError",
    "confusion_and_accuracy",
    "cosine_distances",
    "final_layer_embedding",
    "mann_whitney_one_sided",
    "masking_attribution",
    "nearest_neighbor",
    "nn_audit",
    "save_panel",
    "top_decile_mass_in_region",
]
