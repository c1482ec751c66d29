from .manifest import load_fold, load_set, save_set
from .policies import RawRecord, binarize_labels, filter_rare_combinations
from .records import DataError, ImageRecord, LabeledImageSet, base_id, bits_from_key, combo_key
from .splits import AXES, BenchmarkSetting, FoldAssignment, build_benchmark_setting, stratified_patient_split
from .toy import ToySpec, generate_toy_corpus, primitive_region, region_mean_scores

__all__ = [
    "AXES",
    "BenchmarkSetting",
    "DataError",
    "FoldAssignment",
    "ImageRecord",
    "LabeledImageSet",
    "RawRecord",
    "ToySpec",
    "base_id",
    "binarize_labels",
    "bits_from_key",
    "build_benchmark_setting",
    "combo_key",
    "filter_rare_combinations",
    "generate_toy_corpus",
    "load_fold",
    "load_set",
    "primitive_region",
    "region_mean_scores",
    "save_set",
    "stratified_patient_split",
]
