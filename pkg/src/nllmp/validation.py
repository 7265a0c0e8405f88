"""Input checks shared by the estimator and the command line."""
from __future__ import annotations

import numpy as np

from .model import ProblemInstance, _as_components, _as_labels, is_feasible


def check_instance(instance):
    if not isinstance(instance, ProblemInstance):
        raise TypeError(f"expected a ProblemInstance, got {type(instance).__name__}")
    return instance


def check_labeling(instance, labels):
    """Integer labeling of length ``num_nodes`` with every label in range."""
    labels = np.asarray(labels)
    if labels.dtype.kind == "f" and np.any(labels != np.round(labels)):
        raise ValueError("labels must be integers")
    return _as_labels(check_instance(instance), labels)


def check_partition(instance, components, require_feasible=True):
    """Integer component labeling; optionally require connected components."""
    components = np.asarray(components)
    if components.dtype.kind == "f" and np.any(components != np.round(components)):
        raise ValueError("component ids must be integers")
    components = _as_components(check_instance(instance), components)
    if require_feasible and not is_feasible(instance, components):
        raise ValueError("some component is not connected in the base graph")
    return components
