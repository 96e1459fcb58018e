"""Self-modifying dataflow matrix machines: matrix algebra, Warmus numbers, engine and demos."""

__version__ = "0.1.0"
