"""Decoding eyes-free touch typing on an invisible keyboard.

The package turns raw (x, y) touch sequences into text with a deep
bidirectional GRU decoder trained purely in numpy, and ships everything
around it: a behavioral typing simulator, metrics, a training harness,
checkpointing, a CLI and a live websocket decode service.
"""

__version__ = "0.1.0"

from .chars import DICTIONARY, CharacterDictionary, PhraseError, preprocess_phrase
from .data import (
    Dataset,
    DatasetFormatError,
    ScreenSpec,
    TouchPoint,
    TouchSample,
    read_dataset,
    split_dataset,
    write_dataset,
)
from .model import DecodeState, ModelConfig, NeuralDecoder, decode_stream, select
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .simulate import MentalModel, SimConfig, augment_offsets, generate_dataset, type_phrase
from .metrics import EvalReport, cer, evaluate, levenshtein, wer, wpm
from .train import TrainConfig, fit, run_ablation
from .baseline import GaussianBaseline
from .bench import standard_benchmark

__all__ = [
    "DICTIONARY",
    "CharacterDictionary",
    "PhraseError",
    "preprocess_phrase",
    "Dataset",
    "DatasetFormatError",
    "ScreenSpec",
    "TouchPoint",
    "TouchSample",
    "read_dataset",
    "split_dataset",
    "write_dataset",
    "DecodeState",
    "ModelConfig",
    "NeuralDecoder",
    "decode_stream",
    "select",
    "CheckpointError",
    "load_checkpoint",
    "save_checkpoint",
    "MentalModel",
    "SimConfig",
    "augment_offsets",
    "generate_dataset",
    "type_phrase",
    "EvalReport",
    "cer",
    "evaluate",
    "levenshtein",
    "wer",
    "wpm",
    "TrainConfig",
    "fit",
    "run_ablation",
    "GaussianBaseline",
    "standard_benchmark",
    "__version__",
]
