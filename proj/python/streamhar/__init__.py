"""Streaming activity recognition over smart-home sensor event logs."""

from ._core import (
    Episode,
    LabeledStream,
    Model,
    SensorEvent,
    StreamharError,
    fit,
    from_json,
    generate,
    load,
    parse_text,
)

__all__ = [
    "Episode",
    "LabeledStream",
    "Model",
    "SensorEvent",
    "StreamharError",
    "fit",
    "from_json",
    "generate",
    "load",
    "parse_text",
]
