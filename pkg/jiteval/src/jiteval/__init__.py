"""jiteval: random-forest evaluation harness for commit-level bug-prediction
datasets, with imbalance sampling regimes and time-aware validation."""

__version__ = "0.1.0"
