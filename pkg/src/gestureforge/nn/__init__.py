from .adam import AdamState, adam_step
from .gradcheck import grad_check
from .layers import (
    AffineParams,
    BatchNormParams,
    affine_bwd,
    affine_fwd,
    batchnorm_bwd,
    batchnorm_fwd,
    cross_entropy_bwd,
    cross_entropy_fwd,
    glorot_uniform,
    log_softmax,
    relu_bwd,
    relu_fwd,
    softmax,
)
from .lstm import (
    LstmParams,
    bilstm_bwd,
    bilstm_fwd,
    lstm_cell_bwd,
    lstm_cell_fwd,
    lstm_seq_bwd,
    lstm_seq_fwd,
)

__all__ = [
    "AdamState", "adam_step", "grad_check",
    "AffineParams", "BatchNormParams", "LstmParams",
    "affine_fwd", "affine_bwd", "batchnorm_fwd", "batchnorm_bwd",
    "relu_fwd", "relu_bwd", "softmax", "log_softmax",
    "cross_entropy_fwd", "cross_entropy_bwd", "glorot_uniform",
    "lstm_cell_fwd", "lstm_cell_bwd", "lstm_seq_fwd", "lstm_seq_bwd",
    "bilstm_fwd", "bilstm_bwd",
]
