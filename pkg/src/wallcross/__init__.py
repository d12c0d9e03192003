"""Wall-crossing of I-functions for toric GIT quotients."""

__version__ = "0.1.0"
