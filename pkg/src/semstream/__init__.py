"""RDF stream queries over SOSA sensor observations, with an OEE KPI pipeline."""

__version__ = "0.1.0"
