"""OEE factors, the six-query pipeline and its end-to-end runner."""

from .formulas import KpiValues, availability, oee, performance, quality
from .pipeline import (
    LITERAL_LISTINGS,
    PipelineRun,
    build_engine,
    executable_pipeline_text,
    kpis_at,
    load_pipeline,
    literal_listings_text,
    replay,
    run_pipeline,
    substitute_elided,
)

__all__ = [
    "KpiValues",
    "LITERAL_LISTINGS",
    "PipelineRun",
    "availability",
    "build_engine",
    "executable_pipeline_text",
    "kpis_at",
    "load_pipeline",
    "oee",
    "literal_listings_text",
    "performance",
    "quality",
    "replay",
    "run_pipeline",
    "substitute_elided",
]
