"""
edgeroute - Edge-enhanced segmentation routing and evaluation toolkit.

Kirsch-family edge enhancement, raw-image meta-features, DSC/NSD scoring, a
per-modality routing meta-classifier choosing between a raw-input and an
edge-input predictor, and the statistics used to compare them.
"""

__version__ = "0.1.0"
__author__ = "edgeroute contributors"
__description__ = "Edge-enhanced segmentation routing and evaluation toolkit"
