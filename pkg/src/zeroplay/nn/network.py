"""The fully-convolutional policy/value network.

Trunk: an initial convolution (ReLU) followed by residual blocks, each
conv -> ReLU -> conv plus the identity skip, then ReLU. The policy head is a
1x1 convolution straight to per-action logits over the board, with no
spatially fixed layer anywhere, so one weight set serves every board size.
The value head is a 1x1 convolution to a few channels, global (max, mean)
pooling, and a small affine stack ending in tanh: pooling removes the board
dimensions, so the value head is size-independent too.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ops


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture descriptor; fully determines every weight shape."""

    input_channels: int = 3
    trunk_channels: int = 16
    residual_blocks: int = 2
    kernel_size: int = 3
    policy_channels: int = 1
    value_pool_channels: int = 4
    value_hidden: int = 32

    def __post_init__(self):
        for name in ("input_channels", "trunk_channels", "residual_blocks",
                     "kernel_size", "policy_channels", "value_pool_channels",
                     "value_hidden"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.kernel_size % 2 == 0:
            raise ValueError("kernel_size must be odd")


def param_shapes(spec: NetworkSpec) -> list[tuple[str, tuple[int, ...]]]:
    """Canonical parameter order; checkpoints serialise weights in this order."""
    c, k = spec.trunk_channels, spec.kernel_size
    shapes: list[tuple[str, tuple[int, ...]]] = [
        ("trunk.in.kernel", (c, spec.input_channels, k, k)),
        ("trunk.in.bias", (c,)),
    ]
    for i in range(spec.residual_blocks):
        shapes += [
            (f"trunk.block{i}.conv1.kernel", (c, c, k, k)),
            (f"trunk.block{i}.conv1.bias", (c,)),
            (f"trunk.block{i}.conv2.kernel", (c, c, k, k)),
            (f"trunk.block{i}.conv2.bias", (c,)),
        ]
    shapes += [
        ("policy.conv.kernel", (spec.policy_channels, c, 1, 1)),
        ("policy.conv.bias", (spec.policy_channels,)),
        ("value.conv.kernel", (spec.value_pool_channels, c, 1, 1)),
        ("value.conv.bias", (spec.value_pool_channels,)),
        ("value.fc1.weight", (spec.value_hidden, 2 * spec.value_pool_channels)),
        ("value.fc1.bias", (spec.value_hidden,)),
        ("value.fc2.weight", (1, spec.value_hidden)),
        ("value.fc2.bias", (1,)),
    ]
    return shapes


def _he_uniform(shape: tuple[int, ...], fan_in: int, rng: np.random.Generator, dtype):
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Network:
    """Immutable-by-convention weight container with explicit forward/backward.

    Training code owns a private copy and mutates it through `sgd_step`;
    everyone else treats instances as read-only snapshots.
    """

    def __init__(self, spec: NetworkSpec, params: dict[str, np.ndarray]):
        expected = param_shapes(spec)
        if [n for n, _ in expected] != list(params):
            raise ValueError("parameter names do not match the spec")
        for name, shape in expected:
            if params[name].shape != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {params[name].shape}")
        self.spec = spec
        self.params = params

    @classmethod
    def initialize(cls, spec: NetworkSpec, rng: np.random.Generator | None = None,
                   dtype=np.float32) -> "Network":
        rng = rng or np.random.default_rng(0)
        params: dict[str, np.ndarray] = {}
        for name, shape in param_shapes(spec):
            if name.endswith(".bias"):
                params[name] = np.zeros(shape, dtype=dtype)
            elif name.endswith(".kernel"):
                fan_in = shape[1] * shape[2] * shape[3]
                params[name] = _he_uniform(shape, fan_in, rng, dtype)
            else:  # affine weight
                params[name] = _he_uniform(shape, shape[1], rng, dtype)
        return cls(spec, params)

    @property
    def dtype(self):
        return self.params["trunk.in.kernel"].dtype

    def copy(self) -> "Network":
        return Network(self.spec, {k: v.copy() for k, v in self.params.items()})

    def astype(self, dtype) -> "Network":
        return Network(self.spec, {k: v.astype(dtype) for k, v in self.params.items()})

    def forward(self, x: np.ndarray, want_cache: bool = False):
        """(N, C_in, H, W) -> (policy logits (N, P, H, W), value (N,))."""
        if x.ndim != 4:
            raise ValueError(f"expected a batched (N, C, H, W) input, got shape {x.shape}")
        if x.shape[1] != self.spec.input_channels:
            raise ValueError(
                f"expected {self.spec.input_channels} input channels, got {x.shape[1]}")
        p = self.params
        cache: list = []
        h, c0 = ops.conv2d_forward(x, p["trunk.in.kernel"], p["trunk.in.bias"])
        h, r0 = ops.relu_forward(h)
        cache.append((c0, r0))
        block_caches = []
        for i in range(self.spec.residual_blocks):
            skip = h
            y, c1 = ops.conv2d_forward(h, p[f"trunk.block{i}.conv1.kernel"],
                                       p[f"trunk.block{i}.conv1.bias"])
            y, r1 = ops.relu_forward(y)
            y, c2 = ops.conv2d_forward(y, p[f"trunk.block{i}.conv2.kernel"],
                                       p[f"trunk.block{i}.conv2.bias"])
            y = y + skip
            h, r2 = ops.relu_forward(y)
            block_caches.append((c1, r1, c2, r2))
        policy, cp = ops.conv2d_forward(h, p["policy.conv.kernel"], p["policy.conv.bias"])
        v, cv = ops.conv2d_forward(h, p["value.conv.kernel"], p["value.conv.bias"])
        pooled, cpool = ops.global_pool_forward(v)
        hid, cfc1 = ops.affine_forward(pooled, p["value.fc1.weight"], p["value.fc1.bias"])
        hid, rfc = ops.relu_forward(hid)
        out, cfc2 = ops.affine_forward(hid, p["value.fc2.weight"], p["value.fc2.bias"])
        value, ctanh = ops.tanh_forward(out[:, 0])
        if not want_cache:
            return policy, value
        full_cache = (cache, block_caches, cp, cv, cpool, cfc1, rfc, cfc2, ctanh)
        return policy, value, full_cache

    def backward(self, cache, d_policy: np.ndarray, d_value: np.ndarray) -> dict[str, np.ndarray]:
        """Gradients of a scalar loss w.r.t. every parameter.

        `d_policy` is dLoss/dlogits, `d_value` is dLoss/dvalue (after tanh).
        """
        (in_cache, block_caches, cp, cv, cpool, cfc1, rfc, cfc2, ctanh) = cache
        p = self.params
        grads: dict[str, np.ndarray] = {}

        dout = ops.tanh_backward(d_value, ctanh)[:, None]
        dhid, grads["value.fc2.weight"], grads["value.fc2.bias"] = ops.affine_backward(dout, cfc2)
        dhid = ops.relu_backward(dhid, rfc)
        dpooled, grads["value.fc1.weight"], grads["value.fc1.bias"] = ops.affine_backward(dhid, cfc1)
        dv = ops.global_pool_backward(dpooled, cpool)
        dh_value, grads["value.conv.kernel"], grads["value.conv.bias"] = ops.conv2d_backward(dv, cv)
        dh_policy, grads["policy.conv.kernel"], grads["policy.conv.bias"] = \
            ops.conv2d_backward(d_policy, cp)
        dh = dh_value + dh_policy

        for i in range(self.spec.residual_blocks - 1, -1, -1):
            c1, r1, c2, r2 = block_caches[i]
            dy = ops.relu_backward(dh, r2)
            dskip = dy
            dy, grads[f"trunk.block{i}.conv2.kernel"], grads[f"trunk.block{i}.conv2.bias"] = \
                ops.conv2d_backward(dy, c2)
            dy = ops.relu_backward(dy, r1)
            dy, grads[f"trunk.block{i}.conv1.kernel"], grads[f"trunk.block{i}.conv1.bias"] = \
                ops.conv2d_backward(dy, c1)
            dh = dy + dskip

        c0, r0 = in_cache[0]
        dh = ops.relu_backward(dh, r0)
        _, grads["trunk.in.kernel"], grads["trunk.in.bias"] = ops.conv2d_backward(dh, c0)
        return {name: grads[name] for name, _ in param_shapes(self.spec)}

    def predict(self, planes: np.ndarray) -> tuple[np.ndarray, float]:
        """Single-position convenience wrapper: (C, H, W) -> (logits (P,H,W), value)."""
        policy, value = self.forward(planes[None].astype(self.dtype, copy=False))
        return policy[0], float(value[0])


def policy_log_softmax(logits_flat: np.ndarray, legal: np.ndarray):
    """Row-wise log softmax over legal entries only; illegal entries stay 0."""
    z = np.where(legal, logits_flat, -np.inf)
    zmax = z.max(axis=1, keepdims=True)
    ez = np.exp(z - zmax, where=legal, out=np.zeros_like(logits_flat, dtype=np.float64))
    total = ez.sum(axis=1, keepdims=True)
    logq = np.where(legal, z - zmax - np.log(total), 0.0)
    return logq, ez / total


def loss_and_gradients(
    net: Network,
    states: np.ndarray,
    target_policies: np.ndarray,
    legal_masks: np.ndarray,
    rewards: np.ndarray,
    weight_decay: float = 0.0,
):
    """Cross-entropy on the masked policy + squared value error + weight decay.

    Data terms are averaged over the batch; the decay term is
    weight_decay * sum of squared parameters, added once. Returns
    (total loss, dict of term values, gradients per parameter).
    """
    n = states.shape[0]
    sums = target_policies.sum(axis=1)
    if np.abs(sums - 1.0).max() > 1e-6:
        raise ValueError("target policies must sum to 1 over legal actions")
    policy, value, cache = net.forward(states, want_cache=True)
    flat = policy.reshape(n, -1).astype(np.float64)
    legal = legal_masks.astype(bool)
    logq, q = policy_log_softmax(flat, legal)
    policy_loss = float(-(target_policies * logq).sum() / n)
    diff = value.astype(np.float64) - rewards
    value_loss = float((diff * diff).mean())
    decay_loss = 0.0
    if weight_decay:
        decay_loss = weight_decay * float(sum((w.astype(np.float64) ** 2).sum()
                                              for w in net.params.values()))
    d_flat = np.where(legal, q - target_policies, 0.0) / n
    d_policy = d_flat.reshape(policy.shape).astype(net.dtype)
    d_value = (2.0 * diff / n).astype(net.dtype)
    grads = net.backward(cache, d_policy, d_value)
    if weight_decay:
        for name, w in net.params.items():
            grads[name] = grads[name] + (2.0 * weight_decay) * w
    total = policy_loss + value_loss + decay_loss
    terms = {"policy": policy_loss, "value": value_loss, "decay": decay_loss}
    return total, terms, grads


def sgd_step(net: Network, grads: dict[str, np.ndarray], learning_rate: float) -> None:
    """In-place theta <- theta - lr * grad; rejects non-finite gradients by name."""
    for name, w in net.params.items():
        g = grads[name]
        if not np.isfinite(g).all():
            raise FloatingPointError(f"non-finite gradient in {name}")
        w -= (learning_rate * g).astype(w.dtype)
