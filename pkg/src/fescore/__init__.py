"""Symmetric-key quadratic functional encryption and the blind credit-scoring
pipeline built on it.

Layers, bottom to top:

- ``fescore.pairing``  — bilinear groups, pairing, bounded discrete log
- ``fescore.sgp``      — the quadratic FE scheme with ciphertext/key projection
- ``fescore.preprocess`` / ``fescore.network`` — data cleaning, quantization
  and the square-activation classifier whose weights define the FE functions
- ``fescore.pipeline`` — the three-role scoring flow (authority / client /
  evaluator) over those pieces
- ``fescore.wire`` / ``fescore.bench`` / ``fescore.cli`` — TCP services,
  benchmark harness and the operator command line
"""

from . import bench, errors, network, pipeline, preprocess, serial, sgp, wire
from .pairing import setup

__version__ = "0.1.0"

__all__ = ["bench", "errors", "network", "pipeline", "preprocess", "serial", "sgp", "wire",
           "setup", "__version__"]
