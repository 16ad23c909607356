"""Argumentative explanations for neural network predictions."""

from .attribution import GradCamResult, RelevanceMap, gradcam, linear_contribution, lrp0_backward
from .backward import GradientRecord, gradient
from .dialectics import (
    PropertyReport,
    check_additive_monotonicity,
    check_counterfactuality,
    check_dialectical_monotonicity,
    check_property,
    strength_set_eq,
    strength_set_leq,
    strength_set_lt,
)
from .errors import (
    ArchitectureError,
    ArglensError,
    ExtractionError,
    InvalidStrataError,
    ModelFormatError,
    TrainingDivergedError,
)
from .explainers import (
    ExplanationBundle,
    ImageCnnExplainer,
    TabularFfnnExplainer,
    TextCnnExplainer,
    ToyExplainer,
    bundle_from_json,
    explain_image_cnn,
    explain_tabular_ffnn,
    explain_text_cnn,
    explainer_for,
)
from .fidelity import (
    CostReport,
    FidelityReport,
    PerturbKind,
    deep_fidelity_eval,
    measure_costs,
    per_element_relative_difference,
    perturb,
    relative_difference,
)
from .forward import ActivationRecord, forward, predict
from .gaf import Argument, ArgumentGraph, Characterization, StrengthSpec, assign_strengths, extract_gaf
from .influence import InfluenceGraph, Node, Strata, StrataSpec, extract_influence_graph, select_strata
from .model import LayerSpec, NeuralGraph, dumps_bundle, from_bundle, load_model, save_model, to_bundle
from .render import (
    ChiArtifact,
    ExplanationDocument,
    ReferenceStats,
    build_reference_stats,
    build_word_clouds,
    document_from_json,
    dumps_canonical,
    prune_top_k,
    render_conversational,
    render_graphical,
    stats_from_json,
)
from .training import TrainConfig, TrainResult, evaluate_accuracy, init_network, train_toy

__version__ = "0.1.0"
