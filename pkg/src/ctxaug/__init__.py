"""Segmentation-based context augmentation toolkit.

Splits labeled images into foreground and background with binary masks,
fills the background holes with a patch-match search, recombines and
transforms the layers into augmented training sets, and checks their
effect with a small from-scratch ConvNet trainer.
"""

__version__ = "0.1.0"
