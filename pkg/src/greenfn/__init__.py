"""Exact Green functions and two-parameter Green functions for Spin8 and its Levi subgroups."""

from __future__ import annotations

__version__ = "0.1.0"
