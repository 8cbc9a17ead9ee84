"""Keyword-bootstrapped tweet corpus analysis: ingestion, preprocessing,
corpus statistics, bag-of-words features and linear classifiers."""

__version__ = "0.1.0"
