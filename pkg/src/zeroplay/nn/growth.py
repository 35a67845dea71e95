"""Function-preserving network growth: deepen, widen, enlarge kernels.

Every operation initialises the added weights to exact zeros (plus, for a new
block, a randomly initialised first convolution whose output is discarded by
the zeroed second convolution). Because the convolution accumulates taps and
channel contractions whose extra terms are exact zeros, the grown network
reproduces the old outputs exactly, not merely approximately; training can
then resume with the extra capacity.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .network import Network, NetworkSpec, _he_uniform, param_shapes

WIDEN_GROUPS = ("trunk", "value_hidden")


def grow_add_block(net: Network, rng: np.random.Generator | None = None) -> Network:
    """Append one residual block; its second convolution starts at zero."""
    rng = rng or np.random.default_rng(0)
    spec = replace(net.spec, residual_blocks=net.spec.residual_blocks + 1)
    c, k = spec.trunk_channels, spec.kernel_size
    dtype = net.dtype
    i = net.spec.residual_blocks
    params = {name: value.copy() for name, value in net.params.items()}
    params[f"trunk.block{i}.conv1.kernel"] = _he_uniform((c, c, k, k), c * k * k, rng, dtype)
    params[f"trunk.block{i}.conv1.bias"] = np.zeros((c,), dtype=dtype)
    params[f"trunk.block{i}.conv2.kernel"] = np.zeros((c, c, k, k), dtype=dtype)
    params[f"trunk.block{i}.conv2.bias"] = np.zeros((c,), dtype=dtype)
    ordered = {name: params[name] for name, _ in param_shapes(spec)}
    return Network(spec, ordered)


def grow_add_channels(net: Network, extra: int, group: str = "trunk") -> Network:
    """Widen a layer group; new producers and their readers start at zero.

    New channels are appended after the existing ones, so existing reductions
    see their old terms in the old order followed by exact-zero terms.
    """
    if extra < 1:
        raise ValueError("extra must be >= 1")
    if group == "trunk":
        return _widen_trunk(net, extra)
    if group == "value_hidden":
        return _widen_value_hidden(net, extra)
    raise ValueError(f"unknown layer group {group!r}; choose from {WIDEN_GROUPS}")


def _append_zeros(arr: np.ndarray, axis: int, extra: int) -> np.ndarray:
    shape = list(arr.shape)
    shape[axis] = extra
    return np.concatenate([arr, np.zeros(shape, dtype=arr.dtype)], axis=axis)


def _widen_trunk(net: Network, extra: int) -> Network:
    old = net.params
    spec = replace(net.spec, trunk_channels=net.spec.trunk_channels + extra)
    params: dict[str, np.ndarray] = {}
    params["trunk.in.kernel"] = _append_zeros(old["trunk.in.kernel"], 0, extra)
    params["trunk.in.bias"] = _append_zeros(old["trunk.in.bias"], 0, extra)
    for i in range(net.spec.residual_blocks):
        for conv in ("conv1", "conv2"):
            kernel = _append_zeros(old[f"trunk.block{i}.{conv}.kernel"], 0, extra)
            params[f"trunk.block{i}.{conv}.kernel"] = _append_zeros(kernel, 1, extra)
            params[f"trunk.block{i}.{conv}.bias"] = \
                _append_zeros(old[f"trunk.block{i}.{conv}.bias"], 0, extra)
    params["policy.conv.kernel"] = _append_zeros(old["policy.conv.kernel"], 1, extra)
    params["policy.conv.bias"] = old["policy.conv.bias"].copy()
    params["value.conv.kernel"] = _append_zeros(old["value.conv.kernel"], 1, extra)
    params["value.conv.bias"] = old["value.conv.bias"].copy()
    for name in ("value.fc1.weight", "value.fc1.bias", "value.fc2.weight", "value.fc2.bias"):
        params[name] = old[name].copy()
    ordered = {name: params[name] for name, _ in param_shapes(spec)}
    return Network(spec, ordered)


def _widen_value_hidden(net: Network, extra: int) -> Network:
    old = net.params
    spec = replace(net.spec, value_hidden=net.spec.value_hidden + extra)
    params = {name: value.copy() for name, value in old.items()}
    params["value.fc1.weight"] = _append_zeros(old["value.fc1.weight"], 0, extra)
    params["value.fc1.bias"] = _append_zeros(old["value.fc1.bias"], 0, extra)
    params["value.fc2.weight"] = _append_zeros(old["value.fc2.weight"], 1, extra)
    ordered = {name: params[name] for name, _ in param_shapes(spec)}
    return Network(spec, ordered)


def grow_kernel(net: Network, new_size: int) -> Network:
    """Embed every trunk kernel at the centre of a larger zero kernel.

    With same padding the added border taps contribute exact zeros, so
    outputs are unchanged. The 1x1 head convolutions are left alone.
    """
    old_size = net.spec.kernel_size
    if new_size % 2 == 0:
        raise ValueError("kernel size must be odd")
    if new_size <= old_size:
        raise ValueError(f"new kernel size {new_size} must exceed {old_size}")
    offset = (new_size - old_size) // 2
    spec = replace(net.spec, kernel_size=new_size)
    params: dict[str, np.ndarray] = {}
    for name, value in net.params.items():
        if name.startswith("trunk.") and name.endswith(".kernel"):
            out_c, in_c = value.shape[:2]
            grown = np.zeros((out_c, in_c, new_size, new_size), dtype=value.dtype)
            grown[:, :, offset:offset + old_size, offset:offset + old_size] = value
            params[name] = grown
        else:
            params[name] = value.copy()
    ordered = {name: params[name] for name, _ in param_shapes(spec)}
    return Network(spec, ordered)
