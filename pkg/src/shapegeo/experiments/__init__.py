"""Experiment runner: named subcommands, flat configs, CSV tables, SVG plots."""

from . import cli, io

__all__ = ["cli", "io"]
