"""Explainable deep RL for adaptive services.

Trains a reward-decomposed Double DQN on a simulated adaptive webshop,
extracts per-decision insight records (DINEs), and answers natural-language
questions about the agent's decisions through an LLM prompt pipeline, with a
fidelity and stability evaluation harness on top.
"""

__version__ = "0.1.0"
