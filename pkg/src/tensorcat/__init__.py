"""Symbolic tensor algebra and calculus in two equivalent languages.

``roger`` is the point-free categorical term language evaluated into
tabulated symbolic matrices; ``albert`` is the Einstein-index tensor
network frontend that extracts to ``roger`` terms.  ``geometry`` adds
metrics, connections and curvature on a single coordinate chart.
"""

__version__ = "0.1.0"
