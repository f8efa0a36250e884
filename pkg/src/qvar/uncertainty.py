"""Builders for the uncertainty-loading operator.

Three constructions are provided:

* build_single_factor: one latent factor, the classic layout.
* build_multi_rotation: one register per factor; every factor register
  controls one rotation block per asset.
* build_single_rotation: factor marginals scaled by their weights, an index
  adder into a sum register, and a single rotation block per asset driven by
  the sum.  Requires all assets to share one weight vector.

Two encodings exist for the first two builders.  The "exact" encoding spends
one pattern-controlled rotation per joint grid point per asset, which is
exponential in the total factor width; it exists as a desk-scale oracle.  The
"linear" encoding approximates the rotation angle by an affine function of
the grid indices (endpoint secant per factor) and is the scalable form.

Register layout (little-endian throughout):
  multi-rotation:  [factor 0][factor 1]...[assets]
  single-rotation: [factor 0]...[sum register][assets]
Asset qubits always sit at the top so that a comparator appended later can
find them immediately below its objective qubit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import arith
from .circuit import Circuit, Gate
from .gaussian import FactorGrid, conditional_pd, std_normal_pdf


@dataclass
class Asset:
    """One obligor: loss given default, anchor PD, sensitivity, factor weights."""

    lgd: float
    p0: float
    rho: float
    alphas: tuple[float, ...]

    def __post_init__(self):
        self.alphas = tuple(float(a) for a in self.alphas)
        if self.lgd < 0:
            raise ValueError("lgd must be nonnegative")
        if not 0.0 < self.p0 < 1.0:
            raise ValueError("p0 must lie strictly inside (0, 1)")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if len(self.alphas) < 1:
            raise ValueError("need at least one factor weight")


@dataclass
class Portfolio:
    """A list of assets sharing a common number of systemic risk factors."""

    assets: list[Asset]

    def __post_init__(self):
        if not self.assets:
            raise ValueError("portfolio needs at least one asset")
        r = len(self.assets[0].alphas)
        for k, asset in enumerate(self.assets):
            if len(asset.alphas) != r:
                raise ValueError(
                    f"asset {k} carries {len(asset.alphas)} weights, expected {r}")

    @property
    def k(self) -> int:
        return len(self.assets)

    @property
    def r(self) -> int:
        return len(self.assets[0].alphas)

    @property
    def lgds(self) -> list[float]:
        return [a.lgd for a in self.assets]


@dataclass(eq=False)
class ModelCircuit:
    """A built uncertainty operator plus its register map."""

    circuit: Circuit
    factor_qubits: list[range]
    asset_qubits: list[int]
    ancilla_qubits: list[int] = field(default_factory=list)
    layout_note: str = ""


def default_angle(pd: float) -> float:
    """Rotation angle that puts probability pd on |1>: 2*arcsin(sqrt(pd))."""
    return 2.0 * math.asin(math.sqrt(min(max(pd, 0.0), 1.0)))


def loader_gates(probs, qubits) -> list[Gate]:
    """Gates preparing sum_i sqrt(p_i)|i> on the given register.

    Recursive pattern-controlled-rotation construction: the register is split
    bit by bit from the most significant end, each split rotating the next
    qubit by the conditional mass ratio.  Works for any nonnegative normalized
    probability vector, including ones with zero entries.
    """
    probs = np.asarray(probs, dtype=float)
    qubits = list(qubits)
    if probs.size != 2 ** len(qubits):
        raise ValueError("probability vector length must be 2**len(qubits)")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError("need a nonnegative probability vector summing to 1")
    gates: list[Gate] = []

    def descend(level, lo, hi, controls, mass):
        if mass <= 0.0:
            return
        mid = (lo + hi) // 2
        mass1 = float(probs[mid:hi].sum())
        theta = 2.0 * math.asin(math.sqrt(min(mass1 / mass, 1.0)))
        if theta != 0.0:
            gates.append(Gate("ry", qubits[level], theta, tuple(controls)))
        if level == 0:
            return
        descend(level - 1, lo, mid, controls + [(qubits[level], 0)], mass - mass1)
        descend(level - 1, mid, hi, controls + [(qubits[level], 1)], mass1)

    descend(len(qubits) - 1, 0, probs.size, [], float(probs.sum()))
    return gates


def probability_loader(probs) -> Circuit:
    """Standalone circuit loading a probability vector on its own register."""
    probs = np.asarray(probs, dtype=float)
    n = probs.size.bit_length() - 1
    circ = Circuit(n)
    circ.extend(loader_gates(probs, range(n)))
    return circ


def fit_linear_rotation(asset: Asset, factor_index: int, grids) -> tuple[float, float]:
    """Endpoint-secant fit of the rotation angle along one factor's grid.

    Returns (slope, offset) in radians per index step such that
    slope * i + offset reproduces the true angle exactly at i = 0 and
    i = 2**n_z - 1, with every other factor held at its mid-grid value.
    """
    grids = list(grids)
    if not 0 <= factor_index < len(grids):
        raise ValueError(f"factor index {factor_index} out of range")
    z_ref = [g.mid_value for g in grids]
    grid = grids[factor_index]

    def angle_at(z_i):
        z = list(z_ref)
        z[factor_index] = z_i
        return default_angle(conditional_pd(asset.p0, asset.rho, asset.alphas, z))

    theta_lo = angle_at(grid.values[0])
    theta_hi = angle_at(grid.values[-1])
    slope = (theta_hi - theta_lo) / (grid.size - 1)
    return slope, theta_lo


def _linear_rotation_gates(offset, slopes_and_registers, target) -> list[Gate]:
    """One affine rotation block: RY(offset) plus bitwise controlled RYs."""
    gates = [Gate("ry", target, float(offset))]
    for slope, register in slopes_and_registers:
        for j, qubit in enumerate(register):
            angle = slope * (1 << j)
            if angle != 0.0:
                gates.append(Gate("ry", target, angle, ((qubit, 1),)))
    return gates


def _factor_layout(grids) -> tuple[list[range], int]:
    ranges = []
    offset = 0
    for grid in grids:
        ranges.append(range(offset, offset + grid.n_z))
        offset += grid.n_z
    return ranges, offset


def build_multi_rotation(portfolio: Portfolio, grids, encoding: str = "exact") -> ModelCircuit:
    """Multi-rotation uncertainty model: one register per factor.

    Width is sum(n_z) + K with no ancillas.  In the exact encoding the joint
    distribution over (factors, assets) reproduces the classical model to
    float precision; in the linear encoding every asset receives one affine
    rotation block per factor, with the slope carrying that factor's weight.
    """
    grids = list(grids)
    if len(grids) != portfolio.r:
        raise ValueError(
            f"portfolio has {portfolio.r} factors but {len(grids)} grids were given")
    if encoding not in ("exact", "linear"):
        raise ValueError(f"unknown encoding {encoding!r}")
    factor_ranges, n_factor = _factor_layout(grids)
    k = portfolio.k
    circ = Circuit(n_factor + k)
    asset_qubits = [n_factor + i for i in range(k)]

    for grid, reg in zip(grids, factor_ranges):
        circ.extend(loader_gates(grid.probs, reg))

    if encoding == "exact":
        for k_idx, asset in enumerate(portfolio.assets):
            for combo in itertools.product(*(range(g.size) for g in grids)):
                z = [g.values[i] for g, i in zip(grids, combo)]
                theta = default_angle(conditional_pd(asset.p0, asset.rho, asset.alphas, z))
                controls = []
                for idx, reg in zip(combo, factor_ranges):
                    controls.extend((q, (idx >> j) & 1) for j, q in enumerate(reg))
                circ.ry(theta, asset_qubits[k_idx], controls)
    else:
        mid = [g.mid_value for g in grids]
        for k_idx, asset in enumerate(portfolio.assets):
            fits = [fit_linear_rotation(asset, r, grids) for r in range(len(grids))]
            theta_mid = default_angle(conditional_pd(asset.p0, asset.rho, asset.alphas, mid))
            # Per-factor secants each carry their own intercept; anchoring the
            # combined offset at the mid-grid angle keeps the sum exact for a
            # truly affine angle function and reduces to the single secant at R=1.
            offset = sum(off for _, off in fits) - (len(grids) - 1) * theta_mid
            blocks = [(slope, list(reg)) for (slope, _), reg in zip(fits, factor_ranges)]
            circ.extend(_linear_rotation_gates(offset, blocks, asset_qubits[k_idx]))

    note = (f"{encoding} encoding; factors {[list(r) for r in factor_ranges]}, "
            f"assets {asset_qubits}; no ancillas")
    if encoding == "exact":
        note += "; exact form spends one rotation per joint grid point per asset (oracle scale only)"
    return ModelCircuit(circ, factor_ranges, asset_qubits, [], note)


def build_single_factor(portfolio: Portfolio, grid: FactorGrid, encoding: str = "exact") -> ModelCircuit:
    """Single-factor model; requires every asset to carry exactly one weight."""
    if portfolio.r != 1:
        raise ValueError("build_single_factor requires a single-factor portfolio")
    return build_multi_rotation(portfolio, [grid], encoding)


@dataclass
class IndexSumPlan:
    """Common-step discretization used by the single-rotation builder.

    Every factor marginal alpha_r * Z_r is sampled with the same value step
    delta, so adding grid indices adds values: y(s) = delta * s + base.
    """

    delta: float
    n_points: list[int]
    bases: list[float]
    n_sum: int

    @property
    def s_max(self) -> int:
        return sum(n - 1 for n in self.n_points)

    @property
    def base(self) -> float:
        return sum(self.bases)

    def y_of_sum(self, s) -> float:
        return self.delta * np.asarray(s) + self.base


def index_sum_plan(grids, shared_alphas) -> IndexSumPlan:
    """Size the common-step marginals and the sum register.

    delta is the coarsest per-factor full-range step, so each factor covers
    its +-bound*|alpha| range within its own register; factors with smaller
    weight simply use fewer of their grid points.
    """
    grids = list(grids)
    alphas = [float(a) for a in shared_alphas]
    if len(alphas) != len(grids):
        raise ValueError("one weight per factor grid")
    widths = [abs(a) * (g.z_max - g.z_min) for a, g in zip(alphas, grids)]
    steps = [w / (g.size - 1) for w, g in zip(widths, grids) if w > 0]
    delta = max(steps) if steps else 1.0
    n_points = []
    bases = []
    for width, grid in zip(widths, grids):
        n_r = int(math.floor(width / delta + 1e-9)) + 1 if width > 0 else 1
        n_r = min(n_r, grid.size)
        n_points.append(n_r)
        bases.append(-0.5 * delta * (n_r - 1))
    s_max = sum(n - 1 for n in n_points)
    n_sum = max(1, s_max.bit_length())
    return IndexSumPlan(delta, n_points, bases, n_sum)


def build_single_rotation(portfolio: Portfolio, grids, shared_alphas) -> ModelCircuit:
    """Single-rotation uncertainty model.

    Loads each scaled marginal alpha_r * Z_r (diagonal covariance), adds the
    grid indices into a sum register, applies exactly one affine rotation
    block per asset controlled on the sum, then uncomputes the adder so the
    sum register returns to |0>.
    """
    grids = list(grids)
    shared = tuple(float(a) for a in shared_alphas)
    if len(shared) != len(grids):
        raise ValueError("one shared weight per factor grid")
    for k_idx, asset in enumerate(portfolio.assets):
        if asset.alphas != shared:
            raise ValueError(
                f"asset {k_idx} has weights {asset.alphas}, but the single-rotation "
                f"variant requires the shared vector {shared}")

    plan = index_sum_plan(grids, shared)
    factor_ranges, n_factor = _factor_layout(grids)
    n_sum = plan.n_sum
    k = portfolio.k
    sum_qubits = list(range(n_factor, n_factor + n_sum))
    asset_qubits = [n_factor + n_sum + i for i in range(k)]
    circ = Circuit(n_factor + n_sum + k)

    # Scaled marginals on the factor registers (zero tail beyond n_points).
    for grid, reg, alpha, n_r, base in zip(grids, factor_ranges, shared,
                                           plan.n_points, plan.bases):
        probs = np.zeros(grid.size)
        if n_r == 1 or alpha == 0.0:
            probs[0] = 1.0
        else:
            values = base + plan.delta * np.arange(n_r)
            density = std_normal_pdf(values / abs(alpha))
            probs[:n_r] = density / density.sum()
        circ.extend(loader_gates(probs, reg))

    adder = arith.register_sum_gates([list(r) for r in factor_ranges],
                                     [n - 1 for n in plan.n_points], sum_qubits)
    circ.extend(adder)

    y_lo = float(plan.y_of_sum(0))
    y_hi = float(plan.y_of_sum(plan.s_max))
    for k_idx, asset in enumerate(portfolio.assets):
        theta_lo = default_angle(conditional_pd(asset.p0, asset.rho, (1.0,), (y_lo,)))
        theta_hi = default_angle(conditional_pd(asset.p0, asset.rho, (1.0,), (y_hi,)))
        slope = (theta_hi - theta_lo) / plan.s_max if plan.s_max else 0.0
        circ.extend(_linear_rotation_gates(theta_lo, [(slope, sum_qubits)],
                                           asset_qubits[k_idx]))

    circ.extend(g.adjoint() for g in reversed(adder))

    note = (f"single-rotation; factors {[list(r) for r in factor_ranges]}, "
            f"sum register {sum_qubits} ({n_sum} qubits, 0 carry ancillas), "
            f"assets {asset_qubits}; common value step {plan.delta!r}, "
            f"points per factor {plan.n_points}")
    return ModelCircuit(circ, factor_ranges, asset_qubits, sum_qubits, note)
