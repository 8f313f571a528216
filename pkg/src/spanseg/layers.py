"""Neural building blocks: seeded RNG, initializers, linear maps, MLPs,
LSTM cells, and the stacked BiLSTM used to compute fencepost states.

All randomness flows through Rng, which derives independent named streams
from one seed so that runs are reproducible end to end.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Parameter, Tensor

# Stream ids are part of the reproducibility contract: changing them
# changes every seeded run.
_STREAMS = {"init": 0, "dropout": 1, "data": 2}


class Rng:
    """One named substream of a seeded 64-bit generator.

    Streams: "init" (parameter draws), "dropout" (masks, drawn
    sentence-major then layer-major during training), "data" (epoch
    shuffles). Draw order within a stream is the call order.
    """

    def __init__(self, seed: int, stream: str):
        if stream not in _STREAMS:
            raise ValueError(f"unknown RNG stream {stream!r}")
        self.seed = seed
        self.stream = stream
        seq = np.random.SeedSequence((int(seed), _STREAMS[stream]))
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def uniform(self, low: float, high: float, shape) -> np.ndarray:
        return self._gen.uniform(low, high, size=shape)

    def normal(self, std: float, shape) -> np.ndarray:
        return self._gen.normal(0.0, std, size=shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def dropout_mask(self, p: float, shape) -> np.ndarray:
        """Inverted-dropout mask: keep with prob 1-p, scaled by 1/(1-p)."""
        if not 0.0 <= p < 1.0:
            raise ValueError(f"dropout rate {p} outside [0, 1)")
        if p == 0.0:
            return np.ones(shape)
        keep = self._gen.random(shape) >= p
        return keep / (1.0 - p)


def xavier_uniform(rng: Rng, shape: tuple[int, int]) -> np.ndarray:
    fan_in, fan_out = shape[0], shape[1]
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, shape)


def apply_mask(x: Tensor, mask: np.ndarray) -> Tensor:
    return ad.mul(x, ad.constant(mask))


class Linear:
    """Affine map. Weights are stored (d_in, d_out) so both vector and
    row-matrix inputs go through the same matmul."""

    def __init__(self, rng: Rng, name: str, d_in: int, d_out: int, bias: bool = True):
        self.weight = Parameter(xavier_uniform(rng, (d_in, d_out)), f"{name}.weight")
        self.bias = None
        if bias:
            self.bias = Parameter(np.zeros(d_out), f"{name}.bias", weight_decay_eligible=False)

    def __call__(self, x: Tensor) -> Tensor:
        out = ad.matmul(x, self.weight)
        if self.bias is not None:
            out = ad.add(out, self.bias)
        return out

    def parameters(self) -> list[Parameter]:
        return [self.weight] + ([self.bias] if self.bias is not None else [])


class Mlp:
    """Single affine layer with ReLU, plus inverted dropout on the output
    in training mode."""

    def __init__(self, rng: Rng, name: str, d_in: int, d_out: int, dropout: float):
        self.linear = Linear(rng, name, d_in, d_out)
        self.dropout = dropout

    def __call__(self, x: Tensor, train: bool = False, rng: Rng | None = None) -> Tensor:
        out = ad.relu(self.linear(x))
        if train and self.dropout > 0.0:
            if rng is None:
                raise ValueError("training-mode MLP needs a dropout rng")
            out = apply_mask(out, rng.dropout_mask(self.dropout, out.shape))
        return out

    def parameters(self) -> list[Parameter]:
        return self.linear.parameters()


class LstmCell:
    """Fused-gate LSTM cell; gate order in the fused matrices is i, f, g, o."""

    def __init__(self, rng: Rng, name: str, d_in: int, hidden: int):
        self.hidden = hidden
        self.wx = Parameter(xavier_uniform(rng, (d_in, 4 * hidden)), f"{name}.wx")
        self.wh = Parameter(xavier_uniform(rng, (hidden, 4 * hidden)), f"{name}.wh")
        self.b = Parameter(np.zeros(4 * hidden), f"{name}.b", weight_decay_eligible=False)

    def step(self, x: Tensor, h: Tensor, c: Tensor) -> tuple[Tensor, Tensor]:
        z = ad.add(ad.add(ad.matmul(x, self.wx), ad.matmul(h, self.wh)), self.b)
        hid = self.hidden
        i = ad.sigmoid(ad.narrow(z, 0, hid))
        f = ad.sigmoid(ad.narrow(z, hid, hid))
        g = ad.tanh(ad.narrow(z, 2 * hid, hid))
        o = ad.sigmoid(ad.narrow(z, 3 * hid, hid))
        c_next = ad.add(ad.mul(f, c), ad.mul(i, g))
        h_next = ad.mul(o, ad.tanh(c_next))
        return h_next, c_next

    def run(self, xs: list[Tensor]) -> list[Tensor]:
        """Scan over xs from zero states; returns the hidden state after
        each input."""
        h = ad.constant(np.zeros(self.hidden))
        c = ad.constant(np.zeros(self.hidden))
        states = []
        for x in xs:
            h, c = self.step(x, h, c)
            states.append(h)
        return states

    def parameters(self) -> list[Parameter]:
        return [self.wx, self.wh, self.b]


class BiLstm:
    """Stacked bidirectional LSTM over an already-sentinelled row sequence.

    forward() takes the n+2 input rows (<s>, tokens, </s>) and returns the
    final layer's per-position forward states F[0..n+1] (state after
    consuming rows 0..p) and backward states B[0..n+1] (state after
    consuming rows n+1 down to p). Layers above the first consume the
    concatenated directions and, in training mode, a dropout mask per row.
    """

    def __init__(self, rng: Rng, name: str, d_in: int, hidden: int, layers: int, dropout: float):
        if layers < 1:
            raise ValueError("BiLSTM needs at least one layer")
        self.hidden = hidden
        self.dropout = dropout
        self.cells: list[tuple[LstmCell, LstmCell]] = []
        for k in range(layers):
            d = d_in if k == 0 else 2 * hidden
            fwd = LstmCell(rng, f"{name}.l{k}.fwd", d, hidden)
            bwd = LstmCell(rng, f"{name}.l{k}.bwd", d, hidden)
            self.cells.append((fwd, bwd))

    def forward(
        self, rows: list[Tensor], train: bool = False, rng: Rng | None = None
    ) -> tuple[list[Tensor], list[Tensor]]:
        if len(rows) < 3:
            raise ValueError("BiLSTM input must hold at least one token between sentinels")
        for k, (fwd, bwd) in enumerate(self.cells):
            if k > 0 and train and self.dropout > 0.0:
                if rng is None:
                    raise ValueError("training-mode BiLSTM needs a dropout rng")
                mask = rng.dropout_mask(self.dropout, (len(rows), rows[0].shape[0]))
                rows = [apply_mask(r, mask[p]) for p, r in enumerate(rows)]
            fstates = fwd.run(rows)
            bstates = list(reversed(bwd.run(list(reversed(rows)))))
            rows = [ad.concat([f, b]) for f, b in zip(fstates, bstates)]
        return fstates, bstates

    def parameters(self) -> list[Parameter]:
        params = []
        for fwd, bwd in self.cells:
            params.extend(fwd.parameters())
            params.extend(bwd.parameters())
        return params


class CharBiLstm:
    """Single-layer BiLSTM summarizing a character sequence as the final
    forward state concatenated with the final backward state."""

    def __init__(self, rng: Rng, name: str, d_in: int, summary_dim: int):
        if summary_dim % 2 != 0:
            raise ValueError(f"character summary dim must be even, got {summary_dim}")
        hidden = summary_dim // 2
        self.fwd = LstmCell(rng, f"{name}.fwd", d_in, hidden)
        self.bwd = LstmCell(rng, f"{name}.bwd", d_in, hidden)

    def summary(self, xs: list[Tensor]) -> Tensor:
        if not xs:
            raise ValueError("character sequence must be non-empty")
        last_fwd = self.fwd.run(xs)[-1]
        last_bwd = self.bwd.run(list(reversed(xs)))[-1]
        return ad.concat([last_fwd, last_bwd])

    def parameters(self) -> list[Parameter]:
        return self.fwd.parameters() + self.bwd.parameters()


class EmbeddingTable:
    """Trainable lookup table, one row per id."""

    def __init__(self, rng: Rng, name: str, count: int, dim: int):
        self.table = Parameter(rng.normal(0.01, (count, dim)), name, weight_decay_eligible=False)

    def rows(self, ids) -> Tensor:
        return ad.rows(self.table, ids)

    def parameters(self) -> list[Parameter]:
        return [self.table]
