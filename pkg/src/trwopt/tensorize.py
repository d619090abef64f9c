"""Block tensorization of images.

An ``U x V x C`` image with ``U = u_1 ... u_l`` and ``V = v_1 ... v_l`` is
mapped to an ``(l+1)``-way tensor of shape ``(u_1 v_1, ..., u_l v_l, C)``.
Row ``i`` is written in mixed radix ``(u_1, ..., u_l)`` as digits
``a_1, ..., a_l`` (``a_1`` fastest), column ``j`` likewise as ``b_k`` over
``(v_1, ..., v_l)``, and pixel ``(i, j)`` lands at ``a_k + u_k b_k`` along
mode ``k`` (0-based).  Mode 1 therefore indexes pixels inside the smallest
``u_1 x v_1`` block and later modes index progressively coarser blocks.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["TensorizationPlan", "parse_plan", "tensorize_visual", "detensorize_visual"]


@dataclass(frozen=True)
class TensorizationPlan:
    u: tuple
    v: tuple
    channels: int = 3

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(int(k) for k in self.u))
        object.__setattr__(self, "v", tuple(int(k) for k in self.v))
        if not self.u or len(self.u) != len(self.v):
            raise ValueError("u and v factor lists must be non-empty and of equal length")
        if any(k < 1 for k in self.u + self.v) or self.channels < 1:
            raise ValueError("factors and channel count must be positive")

    @property
    def levels(self):
        return len(self.u)

    @property
    def image_shape(self):
        return (int(np.prod(self.u)), int(np.prod(self.v)), self.channels)

    @property
    def tensor_shape(self):
        return tuple(a * b for a, b in zip(self.u, self.v)) + (self.channels,)

    def check(self, shape):
        if tuple(shape) != self.image_shape:
            raise ValueError(
                f"plan u={self.u} v={self.v} needs an image of shape {self.image_shape}, got {tuple(shape)}"
            )


def parse_plan(text, channels=3):
    """Parse ``"u1,u2,.../v1,v2,..."``."""
    try:
        us, vs = text.split("/")
        u = [int(k) for k in us.split(",")]
        v = [int(k) for k in vs.split(",")]
    except ValueError as exc:
        raise ValueError(f"bad plan {text!r}, expected 'u1,u2,.../v1,v2,...'") from exc
    return TensorizationPlan(u, v, channels)


def tensorize_visual(img, plan):
    img = np.asarray(img)
    plan.check(img.shape)
    l = plan.levels
    x = img.reshape(plan.u + plan.v + (plan.channels,), order="F")
    axes = [a for k in range(l) for a in (k, l + k)] + [2 * l]
    return x.transpose(axes).reshape(plan.tensor_shape, order="F")


def detensorize_visual(x, plan):
    x = np.asarray(x)
    if tuple(x.shape) != plan.tensor_shape:
        raise ValueError(f"expected tensor of shape {plan.tensor_shape}, got {x.shape}")
    l = plan.levels
    pairs = [d for k in range(l) for d in (plan.u[k], plan.v[k])] + [plan.channels]
    axes = [a for k in range(l) for a in (k, l + k)] + [2 * l]
    y = x.reshape(pairs, order="F").transpose(np.argsort(axes))
    return y.reshape(plan.image_shape, order="F")
