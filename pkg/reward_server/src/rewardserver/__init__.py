"""Reference scoring service for the token-grid reward wire protocol."""

from .app import (
    DEFAULT_MAX_BATCH,
    RequestError,
    RewardServer,
    create_server,
    score_request,
)
from .models import ConstantModel, MeanGrayModel, ModelError, load_model

__version__ = "0.1.0"
