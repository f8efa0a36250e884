"""Closed-form qubit and gate accounting for the pipeline variants.

Two widths are reported.  width_paper_layout follows the published register
accounting, where the flexible comparator consumes one amplitude-function
ancilla per asset (hence the 2K term); width_built is what the circuits in
this package actually allocate, which is never larger because the
enumeration-based comparator needs no ancillas.
"""

from __future__ import annotations

from dataclasses import dataclass

from .objective import n_sum_qubits
from .uncertainty import Portfolio, index_sum_plan

VARIANTS = ("multi_rotation", "single_rotation", "legacy_integer")
MODES = ("s_free", "weighted_sum")


@dataclass
class ResourceReport:
    variant: str
    mode: str
    width_paper_layout: int
    width_built: int
    rotation_count: int
    comparator_pattern_count: int
    sum_register_width: int | None = None


def _legacy_sum_width(portfolio: Portfolio) -> int:
    lgds = [int(a.lgd) for a in portfolio.assets]
    if any(float(a.lgd) != int(a.lgd) for a in portfolio.assets):
        raise ValueError("weighted-sum accounting requires integer LGDs")
    return n_sum_qubits(lgds) if sum(lgds) > 0 else 1


def estimate_resources(portfolio: Portfolio, grids, variant: str = "multi_rotation",
                       mode: str = "s_free") -> ResourceReport:
    """Qubit/gate accounting for one pipeline configuration.

    rotation_count is the number of controlled linear-rotation blocks of the
    scalable (linear) encoding: K*R for the multi-rotation variant, K for the
    single-rotation one.  comparator_pattern_count is the worst-case number
    of comparison patterns (2**K direct patterns for s_free, 2**n_S sum-value
    patterns for the legacy mode).
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    grids = list(grids)
    if len(grids) != portfolio.r:
        raise ValueError(f"expected {portfolio.r} grids, got {len(grids)}")
    k = portfolio.k
    n_factor = sum(g.n_z for g in grids)

    if variant == "legacy_integer":
        mode = "weighted_sum"

    sum_width = None
    if variant == "single_rotation":
        shared = portfolio.assets[0].alphas
        for idx, asset in enumerate(portfolio.assets):
            if asset.alphas != shared:
                raise ValueError(
                    f"asset {idx} breaks the shared weight vector required by "
                    f"the single-rotation variant")
        sum_width = index_sum_plan(grids, shared).n_sum
        base = n_factor + sum_width + k
        rotation_count = k
    else:
        base = n_factor + k
        rotation_count = k * portfolio.r

    if mode == "s_free":
        width_paper = base + k + 1          # one amplitude-function ancilla per asset
        width_built = base + 1
        patterns = 2 ** k
    else:
        n_s = _legacy_sum_width(portfolio)
        width_paper = base + n_s + 1
        width_built = base + n_s + 1        # the built adder needs no carries
        patterns = 2 ** n_s
        sum_width = n_s                     # the loss register, not the index adder

    return ResourceReport(
        variant=variant,
        mode=mode,
        width_paper_layout=width_paper,
        width_built=width_built,
        rotation_count=rotation_count,
        comparator_pattern_count=patterns,
        sum_register_width=sum_width,
    )
