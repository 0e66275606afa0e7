"""lexloop: human-in-the-loop active learning for mental/physical word tagging."""

__version__ = "0.1.0"
