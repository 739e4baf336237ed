"""From-scratch ConvNet trainer (valid convolutions, max pooling, GAP head,
softmax cross-entropy, SGD with momentum)."""

from .layers import (
    conv_backward,
    conv_forward,
    gap_backward,
    gap_forward,
    pool_backward,
    pool_forward,
    relu_backward,
    relu_forward,
    sgd_momentum_step,
    softmax_xent,
)
from .network import (
    Conv,
    GlobalAvgPool,
    LayerSpec,
    MaxPool,
    NetworkSpec,
    Relu,
    backward,
    build_micro_network,
    build_paper_network,
    forward,
    init_params,
)
from .training import (
    EpochLog,
    TrainConfig,
    evaluate,
    load_weights,
    parse_config,
    preprocess,
    run_experiment,
    save_weights,
    train,
    train_config_from,
    write_log_csv,
)

__all__ = [
    "Conv", "GlobalAvgPool", "LayerSpec", "MaxPool", "NetworkSpec", "Relu",
    "EpochLog", "TrainConfig",
    "backward", "build_micro_network", "build_paper_network",
    "conv_backward", "conv_forward", "evaluate", "forward",
    "gap_backward", "gap_forward", "init_params", "load_weights",
    "parse_config", "pool_backward", "pool_forward", "preprocess",
    "relu_backward", "relu_forward", "run_experiment", "save_weights",
    "sgd_momentum_step", "softmax_xent", "train", "train_config_from",
    "write_log_csv",
]
