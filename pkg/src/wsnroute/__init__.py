"""Round-based simulator of energy-aware negotiation routing in flat sensor networks."""

__version__ = "0.1.0"
