"""Python bindings for the DisCEdge context-management core."""

from ._discedge import (
    DisCEdgeError,
    MetricsReport,
    ScenarioConfig,
    Vocab,
    build_vocab_entries,
    compare_modes,
    decode_tokens,
    default_scenario,
    encode_tokens,
    hash64,
    load_scenario,
    model_id_from_name,
    parse_scenario,
    run_scenario,
)

__all__ = [
    "DisCEdgeError",
    "MetricsReport",
    "ScenarioConfig",
    "Vocab",
    "build_vocab_entries",
    "compare_modes",
    "decode_tokens",
    "default_scenario",
    "encode_tokens",
    "hash64",
    "load_scenario",
    "model_id_from_name",
    "parse_scenario",
    "run_scenario",
]
