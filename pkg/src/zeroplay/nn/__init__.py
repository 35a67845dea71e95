"""From-scratch dense-tensor network: layers with explicit backprop, the
policy/value architecture, function-preserving growth, and checkpoint files."""

from .checkpoint import (
    BadMagicError,
    Checkpoint,
    CheckpointError,
    ChecksumError,
    TruncatedError,
    VersionError,
    load_checkpoint,
    save_checkpoint,
)
from .growth import grow_add_block, grow_add_channels, grow_kernel
from .network import Network, NetworkSpec, loss_and_gradients, param_shapes, sgd_step

__all__ = [
    "BadMagicError", "Checkpoint", "CheckpointError", "ChecksumError",
    "TruncatedError", "VersionError", "load_checkpoint", "save_checkpoint",
    "grow_add_block", "grow_add_channels", "grow_kernel",
    "Network", "NetworkSpec", "loss_and_gradients", "param_shapes", "sgd_step",
]
