"""Rough singular integrals: star sets, stratified covers, weights, maximal and singular integral operators."""

__version__ = "0.1.0"
