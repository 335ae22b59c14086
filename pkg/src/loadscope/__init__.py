"""Feature discovery, identification and benchmarking for short-term power demand forecasting."""

__version__ = "0.1.0"
