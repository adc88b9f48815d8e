"""Trainable matrix-product-state feature extractor.

A chain of N order-3 tensors (boundary bonds of size 1) with one site
carrying an extra output leg. Contracting each site with its 2-vector input
``(cos(pi/2 x), sin(pi/2 x))`` and multiplying the chain left to right yields
an unbounded real output vector.

Numerical stabilization: chain products over hundreds of sites leave double
range, so every partial product is renormalized and the scale is carried as
a running log factor, folded back at the end. Gradients use cached left and
right environments with the same scale bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# exp(680) stays below double overflow even after multiplying by O(1) entries;
# beyond this scale the downstream arctan is saturated anyway.
_MAX_LOG_SCALE = 680.0


def feature_map(x: np.ndarray) -> np.ndarray:
    """Map features in [0, 1] to unit 2-vectors (cos(pi/2 x), sin(pi/2 x))."""
    values = np.asarray(x, dtype=float)
    if values.ndim != 1:
        raise ValueError(f"expected a 1-D feature vector, got shape {values.shape}")
    if values.size == 0:
        raise ValueError("feature vector must be nonempty")
    if np.any(values < 0.0) or np.any(values > 1.0):
        raise ValueError("feature values must lie in [0, 1]")
    half_pi_x = 0.5 * np.pi * values
    return np.stack([np.cos(half_pi_x), np.sin(half_pi_x)], axis=1)


def _rotation_block(rows: int, cols: int) -> np.ndarray:
    """90-degree block rotation, sliced to (rows, cols); orthogonal to eye."""
    size = max(rows, cols)
    size += size % 2
    block = np.kron(np.eye(size // 2), np.array([[0.0, -1.0], [1.0, 0.0]]))
    return block[:rows, :cols]


@dataclass
class MpsModel:
    """Site tensors (chi_l, 2, chi_r), one of them (chi_l, 2, chi_r, n_out)."""

    site_tensors: list[np.ndarray]
    output_site: int

    def __post_init__(self):
        n = len(self.site_tensors)
        if n == 0:
            raise ValueError("model needs at least one site")
        if not 0 <= self.output_site < n:
            raise ValueError(f"output site {self.output_site} out of range")
        for i, t in enumerate(self.site_tensors):
            want = 4 if i == self.output_site else 3
            if t.ndim != want or t.shape[1] != 2:
                raise ValueError(f"site {i}: bad tensor shape {t.shape}")
        if self.site_tensors[0].shape[0] != 1 or self.site_tensors[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have size 1")
        for i in range(n - 1):
            if self.site_tensors[i].shape[2] != self.site_tensors[i + 1].shape[0]:
                raise ValueError(f"bond mismatch between sites {i} and {i + 1}")

    @property
    def num_sites(self) -> int:
        return len(self.site_tensors)

    @property
    def n_out(self) -> int:
        return self.site_tensors[self.output_site].shape[3]

    @property
    def bond_dim(self) -> int:
        return max(t.shape[2] for t in self.site_tensors)

    @classmethod
    def initialize(
        cls,
        num_sites: int,
        n_out: int,
        bond_dim: int = 4,
        output_site: int | None = None,
        rng: int | np.random.Generator = 0,
        noise: float = 0.01,
    ) -> "MpsModel":
        """Near-identity start that keeps long chains numerically alive.

        The physical-0 slice of every site is an identity block and the
        physical-1 slice is the matching 90-degree rotation block, so each
        contracted site matrix cos*I + sin*J is close to orthogonal and the
        784-site product stays O(1) for any input. Small seeded Gaussian
        noise breaks the symmetry. (A noise-only physical-1 slice collapses
        real-image chains to ~1e-130 and kills every gradient.)
        """
        if num_sites < 1 or n_out < 1 or bond_dim < 1:
            raise ValueError("num_sites, n_out and bond_dim must be positive")
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        if output_site is None:
            output_site = num_sites // 2
        tensors = []
        for i in range(num_sites):
            left = 1 if i == 0 else bond_dim
            right = 1 if i == num_sites - 1 else bond_dim
            eye = np.eye(left, right)
            rot = _rotation_block(left, right)
            if i == output_site:
                t = rng.normal(0.0, noise, (left, 2, right, n_out))
                t[:, 0, :, :] += eye[:, :, None]
                t[:, 1, :, :] += rot[:, :, None]
            else:
                t = rng.normal(0.0, noise, (left, 2, right))
                t[:, 0, :] += eye
                t[:, 1, :] += rot
            tensors.append(t)
        return cls(tensors, output_site)

    def copy(self) -> "MpsModel":
        return MpsModel([t.copy() for t in self.site_tensors], self.output_site)


def _site_matrix(tensor: np.ndarray, pair: np.ndarray) -> np.ndarray:
    """Contract one site tensor with its input 2-vector."""
    return pair[0] * tensor[:, 0] + pair[1] * tensor[:, 1]


def _renormalize(carry: np.ndarray, log_scale: float) -> tuple[np.ndarray, float]:
    peak = float(np.max(np.abs(carry)))
    if peak == 0.0 or not np.isfinite(peak):
        return carry, log_scale
    return carry / peak, log_scale + np.log(peak)


def _fold_scale(values: np.ndarray, log_scale: float) -> np.ndarray:
    return values * np.exp(min(log_scale, _MAX_LOG_SCALE))


def _check_input(model: MpsModel, mapped_input: np.ndarray) -> np.ndarray:
    mapped = np.asarray(mapped_input, dtype=float)
    if mapped.shape != (model.num_sites, 2):
        raise ValueError(
            f"expected mapped input of shape ({model.num_sites}, 2), "
            f"got {mapped.shape}"
        )
    return mapped


def mps_forward(model: MpsModel, mapped_input: np.ndarray) -> np.ndarray:
    """Contract the chain with ``mapped_input`` and return the output vector."""
    mapped = _check_input(model, mapped_input)
    s = model.output_site
    # carry: (chi,) before the output site, (chi, n_out) from it onward; the
    # leading [0] drops the size-1 left boundary bond.
    carry = _site_matrix(model.site_tensors[0], mapped[0])[0]
    carry, log_scale = _renormalize(carry, 0.0)
    for i in range(1, model.num_sites):
        block = _site_matrix(model.site_tensors[i], mapped[i])
        if i == s:
            carry = np.einsum("a,abk->bk", carry, block)
        elif i < s:
            carry = carry @ block
        else:
            carry = np.einsum("ak,ab->bk", carry, block)
        carry, log_scale = _renormalize(carry, log_scale)
    return _fold_scale(carry[0], log_scale)


def mps_backward(
    model: MpsModel, mapped_input: np.ndarray, upstream: np.ndarray
) -> list[np.ndarray]:
    """Gradients of ``upstream . output`` with respect to every site tensor.

    Left and right environments are each computed once and shared across
    sites; scales are tracked per environment so the folded gradients are
    exact wherever they are representable.
    """
    mapped = _check_input(model, mapped_input)
    upstream = np.asarray(upstream, dtype=float)
    if upstream.shape != (model.n_out,):
        raise ValueError(
            f"expected upstream of shape ({model.n_out},), got {upstream.shape}"
        )
    n, s = model.num_sites, model.output_site
    blocks = [_site_matrix(model.site_tensors[i], mapped[i]) for i in range(n)]
    # Output block folded with the upstream vector: (chi_l, chi_r).
    folded_out = blocks[s] @ upstream

    # Left sweep. For sites up to the output site the environment is the plain
    # row product; past it the upstream-folded output block is included.
    left_env: list[np.ndarray] = [np.ones(1)] * (n + 1)
    left_log = np.zeros(n + 1)
    carry, log = np.ones(1), 0.0
    for i in range(n):
        block = folded_out if i == s else blocks[i]
        carry = carry @ block
        carry, log = _renormalize(carry, log)
        left_env[i + 1], left_log[i + 1] = carry, log

    # Right sweep, columns, mirrored.
    right_env: list[np.ndarray] = [np.ones(1)] * (n + 1)
    right_log = np.zeros(n + 1)
    carry, log = np.ones(1), 0.0
    for i in range(n - 1, -1, -1):
        block = folded_out if i == s else blocks[i]
        carry = block @ carry
        carry, log = _renormalize(carry, log)
        right_env[i], right_log[i] = carry, log

    grads: list[np.ndarray] = []
    for i in range(n):
        scale = left_log[i] + right_log[i + 1]
        outer = _fold_scale(np.outer(left_env[i], right_env[i + 1]), scale)
        if i == s:
            env = outer[:, :, None] * upstream  # (chi_l, chi_r, n_out)
        else:
            env = outer
        grads.append(np.stack([mapped[i, 0] * env, mapped[i, 1] * env], axis=1))
    return grads
