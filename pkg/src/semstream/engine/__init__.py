"""Windowed evaluation of registered queries on a virtual clock."""

from .core import (
    BindingRow,
    DuplicateQueryError,
    Emission,
    Engine,
    EngineError,
    Evaluation,
    IngestionQueue,
    OutOfOrderError,
    RegistrationError,
    StreamBuffer,
    evaluate,
    write_emission_log,
)
from .expressions import EvaluationError, eval_expr, filter_passes, to_term
from .transport import BIND, DecodeError, decode_bindings, encode_result_stream

__all__ = [
    "BIND",
    "BindingRow",
    "DecodeError",
    "DuplicateQueryError",
    "Emission",
    "Engine",
    "EngineError",
    "Evaluation",
    "EvaluationError",
    "IngestionQueue",
    "OutOfOrderError",
    "RegistrationError",
    "StreamBuffer",
    "decode_bindings",
    "encode_result_stream",
    "eval_expr",
    "evaluate",
    "filter_passes",
    "to_term",
    "write_emission_log",
]
