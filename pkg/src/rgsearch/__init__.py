"""Randomized hyperparameter grid search for categorical tabular classification."""

__version__ = "0.1.0"
