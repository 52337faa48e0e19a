"""Logical predicates over operational models of typed combinatory logic and the lambda calculus."""

__version__ = "0.1.0"
