"""Non-binary polar codes over GF(2^p) with CCSK spread-spectrum modulation."""

__version__ = "0.1.0"
