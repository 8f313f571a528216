"""AdamW: Adam moments with decoupled weight decay.

Decay multiplies eligible parameters by (1 - lr * weight_decay) each
step, independent of the gradient path; embedding tables and biases are
created ineligible. Gradients are zeroed after every step.
"""

from __future__ import annotations

import numpy as np

from .autodiff import Parameter


class AdamW:
    def __init__(
        self,
        params: list[Parameter],
        lr: float,
        weight_decay: float = 0.01,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        if not params:
            raise ValueError("optimizer state needs at least one parameter")
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter names in optimizer")
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        self.params = list(params)
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m = [np.zeros_like(p.data) for p in params]
        self._v = [np.zeros_like(p.data) for p in params]

    def step(self) -> None:
        self.step_count += 1
        t = self.step_count
        b1, b2 = self.beta1, self.beta2
        for p, m, v in zip(self.params, self._m, self._v):
            g = p.grad
            if not np.isfinite(g).all():
                raise FloatingPointError(f"gradient of {p.name} is non-finite")
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            m_hat = m / (1.0 - b1**t)
            v_hat = v / (1.0 - b2**t)
            # decay shrinks the pre-update value, decoupled from the moments
            if p.weight_decay_eligible and self.weight_decay > 0.0:
                p.data -= self.lr * self.weight_decay * p.data
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            if not np.isfinite(p.data).all():
                raise FloatingPointError(f"parameter {p.name} became non-finite")
            p.zero_grad()
