"""Test-time scaling for token-grid generators with searched fill scores."""

from .analysis import (
    CorrelationTable,
    EvalSpec,
    attention_entropy,
    average_ranks,
    correlation_experiment,
    middle_half_checkpoints,
    spearman,
)
from .diversity import diversity_scores, extract_features
from .engine import (
    RunResult,
    ScalingConfig,
    expected_calls,
    importance_resample,
    run_bon,
    run_fr_tts,
    validate_run,
)
from .errors import (
    AlignmentError,
    CapacityError,
    ConfigError,
    DegenerateInputError,
    EmptyRegionError,
    FillscaleError,
    IncompleteGridError,
    NumericError,
    ProtocolError,
    SchemeError,
    ShapeMismatchError,
    TransportError,
)
from .fillsearch import (
    FillSearchConfig,
    FillSearchResult,
    coarse_search,
    filling_reward,
    filling_search,
    zero_order_refine,
)
from .grid import (
    EMPTY_SCHEME,
    FillingScheme,
    TokenGrid,
    apply_filling,
    complete_grid,
    load_grid,
    new_grid,
    random_scheme,
    save_grid,
    segment_blocks,
)
from .kernels import BACKEND
from .rngstream import seed_sequence, stream
from .schedule import (
    ScheduleConfig,
    minmax_normalize,
    unified_rewards,
    variance_adjust,
    weight_at,
)
from .strategies import (
    RemoteOracle,
    Strategy,
    SyntheticOracle,
    cropping_reward,
    intermediate_reward,
    remote_health,
    remote_score,
    remote_score_batch,
    rollout_reward,
    zeropad_reward,
)
from .toyworld import (
    Codebook,
    GeneratorParams,
    PromptSpec,
    SampleState,
    WorldConfig,
    crop_resize_reencode,
    decode,
    decode_rows,
    encode,
    generate_tokens,
    make_prompt,
    new_sample,
    nn_resize,
    synthetic_reward,
)

__version__ = "0.1.0"
