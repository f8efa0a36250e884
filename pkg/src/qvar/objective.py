"""Comparison operator turning an uncertainty model into the estimation circuit.

Two modes build the "total loss <= x" flag:

* s_free: reads the asset qubits directly; every default pattern whose loss
  stays within the threshold flips the objective through one pattern-
  controlled X.  Losses are summed classically at build time, so LGD values
  may be arbitrary nonnegative reals.
* weighted_sum: the legacy construction; accumulates integer LGDs into a sum
  register, compares the register against the threshold, then uncomputes.
  Kept as the integer-only reference the s_free mode is checked against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from . import arith
from .circuit import Circuit, Gate
from .uncertainty import (ModelCircuit, Portfolio, build_multi_rotation,
                          build_single_factor, build_single_rotation)

MODES = ("s_free", "weighted_sum")


@dataclass(eq=False)
class ObjectiveCircuit:
    """Full estimation operator with its flag qubit and threshold."""

    circuit: Circuit
    objective_qubit: int
    mode: str
    threshold: float


def n_sum_qubits(lgds) -> int:
    """Width of the legacy loss register: floor(log2(sum LGD)) + 1."""
    lgds = [int(v) for v in lgds]
    if not lgds or any(v < 0 for v in lgds):
        raise ValueError("need a nonempty list of nonnegative integers")
    total = sum(lgds)
    if total < 1:
        raise ValueError("sum of LGDs must be at least 1")
    return int(math.floor(math.log2(total))) + 1


def _check_integer_lgds(portfolio: Portfolio) -> list[int]:
    lgds = []
    for k, asset in enumerate(portfolio.assets):
        if float(asset.lgd) != int(asset.lgd):
            raise ValueError(
                f"asset {k} has non-integer LGD {asset.lgd}; the weighted_sum mode "
                f"only supports integer losses (use s_free instead)")
        lgds.append(int(asset.lgd))
    return lgds


def build_s_free_comparator(portfolio: Portfolio, threshold: float, objective: int,
                            asset_qubits=None, n_qubits=None) -> Circuit:
    """Pattern-enumeration comparator on the asset qubits.

    By default the K asset qubits are taken to sit immediately below the
    objective qubit.  Gate count equals the number of default patterns whose
    loss is within the threshold (worst case 2**K).
    """
    if not math.isfinite(threshold):
        raise ValueError("threshold must be finite")
    k = portfolio.k
    if asset_qubits is None:
        asset_qubits = list(range(objective - k, objective))
    if n_qubits is None:
        n_qubits = objective + 1
    circ = Circuit(n_qubits)
    lgds = portfolio.lgds
    for pattern in itertools.product((0, 1), repeat=k):
        loss = sum(lgds[i] * bit for i, bit in enumerate(pattern))
        if loss <= threshold:
            circ.x(objective, controls=tuple(zip(asset_qubits, pattern)))
    return circ


def build_weighted_sum(portfolio: Portfolio, objective: int, threshold: float,
                       asset_qubits=None, sum_qubits=None, n_qubits=None) -> Circuit:
    """Legacy comparator: integer loss adder, threshold flip, un-adder.

    Layout default: [... assets][sum register][objective].  The adder works
    through multi-controlled increments, so no carry ancillas are allocated.
    """
    if not math.isfinite(threshold):
        raise ValueError("threshold must be finite")
    lgds = _check_integer_lgds(portfolio)
    k = portfolio.k
    total = sum(lgds)
    n_s = n_sum_qubits(lgds) if total > 0 else 1
    if sum_qubits is None:
        sum_qubits = list(range(objective - n_s, objective))
    if asset_qubits is None:
        asset_qubits = list(range(objective - n_s - k, objective - n_s))
    if n_qubits is None:
        n_qubits = objective + 1
    circ = Circuit(n_qubits)

    adder = arith.weighted_sum_gates(asset_qubits, lgds, sum_qubits)
    circ.extend(adder)
    limit = min(int(math.floor(threshold)), 2 ** n_s - 1)
    for value in range(0, limit + 1):
        pattern = tuple((q, (value >> j) & 1) for j, q in enumerate(sum_qubits))
        circ.x(objective, controls=pattern)
    circ.extend(g.adjoint() for g in reversed(adder))
    return circ


def assemble_a(model: ModelCircuit, comparator: Circuit, objective: int,
               threshold: float = float("nan"), mode: str = "s_free") -> ObjectiveCircuit:
    """Concatenate an uncertainty model and a comparator into one operator."""
    n = comparator.n_qubits
    if model.circuit.n_qubits > n or objective >= n:
        raise ValueError(
            f"comparator spans {n} qubits; model needs {model.circuit.n_qubits} "
            f"and the objective sits at {objective}")
    circ = Circuit(n)
    circ.extend(model.circuit.gates)
    circ.extend(comparator.gates)
    return ObjectiveCircuit(circ, objective, mode, threshold)


def build_a_circuit(portfolio: Portfolio, grids, threshold: float, *,
                    variant: str = "multi_rotation", encoding: str = "exact",
                    mode: str = "s_free") -> ObjectiveCircuit:
    """Build the complete estimation operator for one threshold.

    Register order is [model][sum register, legacy mode only][objective], with
    asset qubits at the top of the model block.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    grids = list(grids)
    if variant == "multi_rotation":
        model = build_multi_rotation(portfolio, grids, encoding)
    elif variant == "single_factor":
        if len(grids) != 1:
            raise ValueError("single_factor variant takes exactly one grid")
        model = build_single_factor(portfolio, grids[0], encoding)
    elif variant == "single_rotation":
        shared = portfolio.assets[0].alphas
        model = build_single_rotation(portfolio, grids, shared)
    else:
        raise ValueError(f"unknown variant {variant!r}")

    width = model.circuit.n_qubits
    if mode == "s_free":
        objective = width
        comparator = build_s_free_comparator(
            portfolio, threshold, objective,
            asset_qubits=model.asset_qubits, n_qubits=width + 1)
    else:
        lgds = _check_integer_lgds(portfolio)
        n_s = n_sum_qubits(lgds) if sum(lgds) > 0 else 1
        objective = width + n_s
        comparator = build_weighted_sum(
            portfolio, objective, threshold,
            asset_qubits=model.asset_qubits,
            sum_qubits=list(range(width, width + n_s)),
            n_qubits=objective + 1)
    return assemble_a(model, comparator, objective, threshold, mode)
