"""Adaptive paraphrasing for text simplification.

A candidate-generation pipeline (paraphrase resources, trigram LM
filtering, learning-to-rank), an event-sourced usage store, and an
iterative retraining loop that improves ranking quality from usage data,
exposed over a REST service.
"""

__version__ = "0.1.0"
