from .protocol import ClassifierProtocol, ProtocolError, TrainHistory, desk_protocol
from .train import PairResult, evaluate, run_pair, train_classifier, write_history

__all__ = [
    "ClassifierProtocol",
    "PairResult",
    "ProtocolError",
    "TrainHistory",
    "desk_protocol",
    "evaluate",
    "run_pair",
    "train_classifier",
    "write_history",
]
