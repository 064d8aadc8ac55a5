"""Simulator and analysis toolkit for vision-based switching between crop rows."""

__version__ = "0.1.0"
