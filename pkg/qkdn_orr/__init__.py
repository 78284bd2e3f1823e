"""Key distribution models for QKD networks: Key Relay, Trusted Node and
Onion Routing Relay, benchmarked over a simulated network."""

__version__ = "0.1.0"
