# ==============================================
# derm-resnet: melanoma-vs-rest residual network
# ==============================================
#
# Package Structure (bottom-up):
#
# src/
# ├── tensor/       # Tensors + tape-based reverse-mode autodiff
# ├── nn/           # conv, batch norm, max pool, ReLU, linear, loss
# ├── model/        # Three-parameter-layer residual network
# ├── data/         # Manifests, decoding, preprocessing, augmentation, synthetic set
# ├── training/     # SGD loop and per-epoch history
# ├── explain/      # Grad-CAM heatmaps and overlays
# ├── persistence/  # Checksummed binary checkpoints
# ├── service/      # HTTP inference service
# ├── config.py     # Configuration management
# ├── pipeline.py   # Workflows shared by the CLI and scripts
# └── cli.py        # Command line entry point
#
# ==============================================

__version__ = "0.1.0"
