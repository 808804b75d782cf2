"""Sparse sensor precision and observer gain design for LTI systems."""

from pathlib import Path

from ._core import (
    DesignResult,
    DesignSpec,
    DesignStatus,
    ExhaustiveResult,
    LtiPlant,
    ModelFormatError,
    NormType,
    NotDetectableError,
    ReweightOptions,
    StructuralError,
    certify_design,
    exhaustive_search,
    h2_norm,
    hinf_norm,
    is_detectable,
    load_model,
    polish,
    solve_design,
    sparse_design,
)

__version__ = "0.1.0"


def bundled_model(name="f16_v1000"):
    """Path of a model file shipped with the source tree, if present."""
    here = Path(__file__).resolve()
    for root in (here.parent, *here.parents):
        candidate = root / "data" / f"{name}.json"
        if candidate.exists():
            return candidate
    raise FileNotFoundError(name)
