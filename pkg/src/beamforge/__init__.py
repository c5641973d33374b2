"""beamforge: beam-pattern driven beamforming design for rectangular arrays.

Maps target far-field beam patterns to beamforming vectors under digital,
analog, and hybrid hardware constraints by gradient descent on a
region-masked pattern-discrepancy loss, with channel simulation, classical
baselines, and a spectral-efficiency evaluation harness around it.
"""

from .arrays import (
    ArrayConfig,
    SteeringMatrix,
    build_steering_matrix,
    cached_steering_matrix,
    compute_pattern,
    response_adjoint,
    response_grid,
    steering_vector,
    target_from_beamformer,
)
from .baselines import (
    PhasePattern,
    dft_codebook,
    dft_codebook_abf,
    ls_recover,
    mrt,
    omp_hybrid,
    partial_csi_dbf,
)
from .beamformers import (
    AnalogBeamformer,
    Beamformer,
    DigitalBeamformer,
    HybridBeamformer,
    ParameterLayout,
    analog_from_hybrid,
    from_json_dict,
    layout_for,
    load_beamformer,
    parameter_layout,
    random_beamformer,
    realize,
    save_beamformer,
    to_json_dict,
)
from .channels import (
    Channel,
    ChannelModelConfig,
    PathParams,
    generate_channels,
    load_channels,
    reconstruct_channel,
    save_channels,
)
from .errors import (
    BeamforgeError,
    ChannelFormatError,
    DegenerateInputError,
    GridMismatchError,
    InvalidTargetSpecError,
    NonFiniteLossError,
    UnsupportedGridError,
)
from .evaluate import (
    ComplianceMetrics,
    EvalConfig,
    EvalReport,
    pattern_compliance,
    run_sweep,
    spectral_efficiency,
)
from .kernels import backend_name
from .objective import (
    LossBreakdown,
    composite_loss,
    loss_gradient,
    loss_of_beamformer,
    pattern_mse,
)
from .patterns import (
    DB_FLOOR,
    AngleGrid,
    BeamPattern,
    RegionMask,
    TargetSpec,
    default_grid,
    load_pattern_csv,
    load_target,
    make_target,
    save_pattern_csv,
    save_pattern_pgm,
    save_target,
    segment_regions,
)
from .synthesis import (
    Adam,
    Mlp,
    MlpDecoder,
    SynthesisConfig,
    SynthesisResult,
    decode,
    featurize,
    load_decoder,
    save_decoder,
    synthesize_direct,
    train_decoder,
)

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "AnalogBeamformer",
    "AngleGrid",
    "ArrayConfig",
    "BeamPattern",
    "Beamformer",
    "BeamforgeError",
    "Channel",
    "ChannelFormatError",
    "ChannelModelConfig",
    "ComplianceMetrics",
    "DB_FLOOR",
    "DegenerateInputError",
    "DigitalBeamformer",
    "EvalConfig",
    "EvalReport",
    "GridMismatchError",
    "HybridBeamformer",
    "InvalidTargetSpecError",
    "LossBreakdown",
    "Mlp",
    "MlpDecoder",
    "NonFiniteLossError",
    "ParameterLayout",
    "PathParams",
    "PhasePattern",
    "RegionMask",
    "SteeringMatrix",
    "SynthesisConfig",
    "SynthesisResult",
    "TargetSpec",
    "UnsupportedGridError",
    "analog_from_hybrid",
    "backend_name",
    "build_steering_matrix",
    "cached_steering_matrix",
    "composite_loss",
    "compute_pattern",
    "decode",
    "default_grid",
    "dft_codebook",
    "dft_codebook_abf",
    "featurize",
    "from_json_dict",
    "generate_channels",
    "layout_for",
    "load_beamformer",
    "load_channels",
    "load_decoder",
    "load_pattern_csv",
    "load_target",
    "loss_gradient",
    "loss_of_beamformer",
    "ls_recover",
    "make_target",
    "mrt",
    "omp_hybrid",
    "parameter_layout",
    "partial_csi_dbf",
    "pattern_compliance",
    "pattern_mse",
    "random_beamformer",
    "realize",
    "reconstruct_channel",
    "response_adjoint",
    "response_grid",
    "run_sweep",
    "save_beamformer",
    "save_channels",
    "save_decoder",
    "save_pattern_csv",
    "save_pattern_pgm",
    "save_target",
    "segment_regions",
    "spectral_efficiency",
    "steering_vector",
    "synthesize_direct",
    "target_from_beamformer",
    "to_json_dict",
]
