"""Synthetic training-data pipeline for three-class document segmentation."""

__version__ = "0.1.0"
