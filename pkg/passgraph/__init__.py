"""Receiver-selection toolkit: passer-centric star graphs, a message-passing
network trained on them, baselines, decision-quality KPIs and analyst reports."""

__version__ = "0.3.0"
