"""
Utilities module for edgeroute.

Shared helpers: logging setup, CSV/JSON artifact writers, command error reporting.
"""
