"""Quantum-inspired classification by quantum state discrimination."""
from .classify import (
    MetricsReport,
    Prediction,
    TrainedModel,
    evaluate,
    pearson,
    predict,
    train,
)
from .discrimination import (
    Ensemble,
    HelstromResult,
    Measurement,
    helstrom,
    helstrom_bound_trace_form,
    pgm,
    pgm_bound,
    success_probability,
)
from .encoding import Dataset, amplitude_encode, class_centroids, encode_copies, quantum_centroid
from .estimators import HelstromClassifier, PGMClassifier, QuantumCentroidClassifier
from .exceptions import QSDError

__version__ = "0.1.0"
