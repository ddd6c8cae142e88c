"""Unsupervised pose-guided person image generation.

Two-stage pipeline: a semantic generative network transforms parsing maps
between poses, then an appearance generative network synthesizes textures on
the transformed parsing.  Includes pseudo-pair mining, the full training
schedule, evaluation metrics and an inference service.
"""

__version__ = "0.1.0"
