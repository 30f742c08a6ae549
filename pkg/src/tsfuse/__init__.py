"""Joint bi-temporal land-use segmentation and change detection with a
fused satellite time series: synthetic dataset, model, training harness."""

__version__ = "0.1.0"
