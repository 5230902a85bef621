"""Label-invariant representation-space augmentation for graph classification."""

__version__ = "0.1.0"
