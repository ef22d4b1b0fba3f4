# ==============================================
# EXPLAIN
# ==============================================
#
# Grad-CAM heatmaps and their rendering.
#
# Modules:
# --------
# - gradcam.py → gradcam, Heatmap, overlay, colormap, heatmap grid I/O
#
# ==============================================

from .gradcam import Heatmap, colormap, gradcam, overlay, read_heatmap_grid, write_heatmap_grid

__all__ = [
    "Heatmap",
    "gradcam",
    "overlay",
    "colormap",
    "write_heatmap_grid",
    "read_heatmap_grid",
]
