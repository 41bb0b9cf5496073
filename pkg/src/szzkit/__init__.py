"""szzkit: trace bug-introducing commits in git history and emit labeled
commit-level datasets for just-in-time bug prediction."""

__version__ = "0.1.0"
