"""Desk-scale decoder-only transformer trainer for random-walk token streams.

Consumes token-stream files (the shared binary walk format) and emits
loss-table CSV rows that the analysis package ingests unchanged.
"""

__version__ = "0.1.0"
