"""Minimal neural-network kernel: layers, losses, optimizers, grad checking."""

from .layers import (
    AttentionContext,
    BiGRU,
    BiLSTM,
    Conv1D,
    Dense,
    Flatten,
    Layer,
    MaxPool1D,
    attention_context_forward,
    bidirectional,
    conv1d_forward,
    dense_forward,
    glorot_uniform,
    gru_step,
    init_gru_params,
    init_lstm_params,
    lstm_step,
    maxpool1d_forward,
    relu,
    sigmoid,
    softmax,
)
from .losses import BCE_EPS, bce_grad_batch, bce_loss, bce_loss_batch
from .optim import Adam, NonFiniteGradient, RMSProp, make_optimizer
from .gradcheck import check_layer_gradients, grad_check, maxpool_tie_skip
from .checkpoint import FORMAT_VERSION, load_checkpoint, save_checkpoint

__all__ = [
    "AttentionContext", "BiGRU", "BiLSTM", "Conv1D", "Dense", "Flatten",
    "Layer", "MaxPool1D", "attention_context_forward", "bidirectional",
    "conv1d_forward", "dense_forward", "glorot_uniform", "gru_step",
    "init_gru_params", "init_lstm_params", "lstm_step", "maxpool1d_forward",
    "relu", "sigmoid", "softmax",
    "BCE_EPS", "bce_grad_batch", "bce_loss", "bce_loss_batch",
    "Adam", "NonFiniteGradient", "RMSProp", "make_optimizer",
    "check_layer_gradients", "grad_check", "maxpool_tie_skip",
    "FORMAT_VERSION", "load_checkpoint", "save_checkpoint",
]
