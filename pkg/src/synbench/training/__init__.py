from .loop import (
    GanDivergenceError,
    GanTrainer,
    TrainSchedule,
    desk_schedule,
    full_scale_schedule,
    progressive_phase,
    run_repetitions,
    run_to_completion,
    should_stop,
    train_gan,
    write_fid_history,
)
from .losses import AuxTerms, TrainingError, adversarial_losses, gradient_penalty, softmax_label_ce
from .synthesis import check_label_space, synthesize_fold

__all__ = [
    "AuxTerms",
    "GanDivergenceError",
    "GanTrainer",
    "TrainSchedule",
    "TrainingError",
    "adversarial_losses",
    "check_label_space",
    "desk_schedule",
    "gradient_penalty",
    "full_scale_schedule",
    "progressive_phase",
    "run_repetitions",
    "run_to_completion",
    "should_stop",
    "softmax_label_ce",
    "synthesize_fold",
    "train_gan",
    "write_fid_history",
]
