"""Predict a driver's upcoming stress class from windows of GSR, respiration and ECG."""

__version__ = "0.1.0"
