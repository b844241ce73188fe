"""Helmholtz machine trained by wake-sleep and fine-tuned by active inference."""

from .active import (
    RoundReport,
    SalienceDistribution,
    Stage2Config,
    Stage2Trace,
    filtered_sleep_step,
    salience_init,
    salience_update,
    sample_input,
    stage2_round,
    train_stage2,
)
from .grammar import (
    Pattern,
    Rule,
    RuleViolation,
    enumerate_wellformed,
    is_well_formed,
    violations,
)
from .metrics import EvalReport, evaluate, fe_decomposition, generation_accuracy, kl_from_uniform
from .network import (
    CompleteState,
    GenerativeParams,
    NetworkShape,
    RecognitionParams,
    ShapeError,
    activation,
    clamped_generative_probabilities,
    estimate_free_energy,
    generative_pass,
    log_generative_density,
    log_recognition_density,
    recognition_pass,
    unit_probability,
)
from .training import (
    TrainConfig,
    TrainTrace,
    UpdateRule,
    generative_delta,
    init_params,
    sleep_step,
    train_stage1,
    wake_step,
)

__version__ = "0.1.0"
