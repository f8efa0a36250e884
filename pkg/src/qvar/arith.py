"""Reversible integer arithmetic built from multi-controlled gates.

The adders here work entirely through control patterns, so no carry ancillas
are needed: an increment of a w-qubit register costs w multi-controlled X
gates with up to w controls.  That trades depth for width, which is the right
trade at desk-verification scale.
"""

from __future__ import annotations

from .circuit import Gate


def increment_gates(register, controls=()) -> list[Gate]:
    """Add 1 (mod 2**len(register)) to a little-endian register.

    `register` lists qubit indices from least to most significant; the whole
    operation can carry an extra control pattern.
    """
    register = list(register)
    base = tuple(controls)
    gates = []
    for i in reversed(range(len(register))):
        ctrl = base + tuple((register[j], 1) for j in range(i))
        gates.append(Gate("x", register[i], controls=ctrl))
    return gates


def add_constant_gates(register, value: int, controls=()) -> list[Gate]:
    """Add a classical constant (mod 2**len(register)) under a control pattern."""
    if value < 0:
        raise ValueError("add_constant_gates takes a nonnegative constant")
    register = list(register)
    value &= (1 << len(register)) - 1
    gates = []
    for j in range(len(register)):
        if (value >> j) & 1:
            gates.extend(increment_gates(register[j:], controls))
    return gates


def weighted_sum_gates(inputs, weights, sum_register) -> list[Gate]:
    """Accumulate sum_k weights[k] * inputs[k] into a little-endian register.

    Each input is a single qubit holding a 0/1 value; weights must be
    nonnegative integers.
    """
    inputs = list(inputs)
    weights = list(weights)
    if len(inputs) != len(weights):
        raise ValueError("one weight per input qubit")
    gates = []
    for qubit, weight in zip(inputs, weights):
        if int(weight) != weight or weight < 0:
            raise ValueError("weights must be nonnegative integers")
        if weight:
            gates.extend(add_constant_gates(sum_register, int(weight), controls=((qubit, 1),)))
    return gates


def register_sum_gates(registers, max_values, sum_register) -> list[Gate]:
    """Accumulate the binary values of several registers into a sum register.

    `max_values[r]` is the largest index register r can hold with nonzero
    amplitude; higher bits of that register are skipped.
    """
    gates = []
    for reg, max_value in zip(registers, max_values):
        for j, qubit in enumerate(reg):
            if (1 << j) <= max_value:
                gates.extend(add_constant_gates(sum_register, 1 << j, controls=((qubit, 1),)))
    return gates
