"""Adaptive preference elicitation with robust portfolio selection."""

__version__ = "0.1.0"
