"""Super-martingale and martingale verdicts relative to a measure family,
plus the constructive processes built from unit claims.

A process f is a super-martingale for the family when
E^P(f_m | F_{m-1}) <= f_{m-1} holds on every cell for every member measure P;
for a hull the generators decide this, for a martingale polytope the per-cell
conditional-expectation gap is maximized by LP over the closure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NotAdapted,
    NotNonincreasing,
    NotUnitClaim,
    ZeroInitialValue,
)
from .measures import (
    GeneratorHull,
    MeasureSet,
    _condexp_row,
    is_unit_claim,
    unit_claim_rows,
)
from .spaces import AdaptedProcess, FilteredSpace, check_adapted
from .tolerances import EQ_TOL


@dataclass(frozen=True)
class StepViolation:
    time: int
    cell: int
    label: str
    gap: float


@dataclass(frozen=True)
class MartingaleReport:
    ok: bool
    equality: bool  # True when checked as a martingale, False for super-martingale
    violations: tuple[StepViolation, ...]

    def __bool__(self) -> bool:
        return self.ok


def _as_process(space: FilteredSpace, f) -> AdaptedProcess:
    if isinstance(f, AdaptedProcess):
        return f
    report = check_adapted(space, np.asarray(f, dtype=float))
    if not report.ok:
        raise NotAdapted(f"values not adapted at (time, cell) {report.violations[:4]}")
    return AdaptedProcess(space, np.asarray(f, dtype=float))


def is_supermartingale(space: FilteredSpace, mset: MeasureSet, f) -> MartingaleReport:
    """Check E^P(f_m | F_{m-1}) <= f_{m-1} + tol for every member measure."""
    proc = _as_process(space, f)
    scale = 1.0 + float(np.abs(proc.values).max())
    violations = []
    for m in range(1, space.horizon + 1):
        prev = proc.values[m - 1]
        if isinstance(mset, GeneratorHull):
            for i, p in enumerate(mset._matrix):
                row = _condexp_row(space, p, proc.values[m], m - 1)
                for c in range(space.n_cells(m - 1)):
                    r = space.cell_rep(m - 1, c)
                    gap = row[r] - prev[r]
                    if gap > EQ_TOL * scale:
                        violations.append(StepViolation(m, c, f"generator {i}", float(gap)))
        else:
            sup = mset.cond_exp_sup(proc.values[m], m - 1)
            for c in range(space.n_cells(m - 1)):
                r = space.cell_rep(m - 1, c)
                gap = sup.values[r] - prev[r]
                if gap > EQ_TOL * scale:
                    violations.append(StepViolation(m, c, "lp max", float(gap)))
    return MartingaleReport(ok=not violations, equality=False, violations=tuple(violations))


def is_martingale(space: FilteredSpace, mset: MeasureSet, f) -> MartingaleReport:
    """Check E^P(f_m | F_{m-1}) = f_{m-1} within tol for every member measure."""
    proc = _as_process(space, f)
    scale = 1.0 + float(np.abs(proc.values).max())
    violations = []
    for m in range(1, space.horizon + 1):
        prev = proc.values[m - 1]
        if isinstance(mset, GeneratorHull):
            for i, p in enumerate(mset._matrix):
                row = _condexp_row(space, p, proc.values[m], m - 1)
                for c in range(space.n_cells(m - 1)):
                    r = space.cell_rep(m - 1, c)
                    gap = abs(row[r] - prev[r])
                    if gap > EQ_TOL * scale:
                        violations.append(StepViolation(m, c, f"generator {i}", float(gap)))
        else:
            # equality across the whole polytope is a linear condition on its
            # affine hull: test against the interior point and the null basis
            basis = mset.null_basis()
            interior = mset.interior_measure
            for c, cell in enumerate(space.cells[m - 1]):
                idx = list(cell)
                centred = proc.values[m, idx] - prev[idx]
                res_ref = float(centred @ interior[idx])
                res_null = centred @ basis[idx, :]
                worst = max(abs(res_ref), float(np.abs(res_null).max(initial=0.0)))
                if worst > EQ_TOL * scale:
                    violations.append(StepViolation(m, c, "affine hull", worst))
    return MartingaleReport(ok=not violations, equality=True, violations=tuple(violations))


def ess_sup_process(space: FilteredSpace, mset: MeasureSet, xi) -> AdaptedProcess:
    """The process of per-cell suprema of E^P(xi | F_t) over the family."""
    xi = np.asarray(xi, dtype=float)
    if xi.min() < -EQ_TOL:
        raise ValueError("claim must be nonnegative")
    rows = np.array([mset.cond_exp_sup(xi, t).values for t in range(space.horizon + 1)])
    return AdaptedProcess(space, rows)


def unit_claim_martingale(space: FilteredSpace, mset: MeasureSet, xi0) -> AdaptedProcess:
    """Conditional-expectation martingale of a unit claim.

    Fails with MeasureDependent when the conditional expectations are not the
    same under every member measure (the defining property of the family this
    construction is valid for).
    """
    return AdaptedProcess(space, unit_claim_rows(space, mset, xi0))


@dataclass(frozen=True)
class KTerm:
    """One building block C * weight_m * E(claim | F_m) of the weighted class."""

    claim: np.ndarray          # unit claim, one value per outcome
    weights: np.ndarray        # (N+1, n) adapted, pathwise nonincreasing
    coefficient: float = 1.0


def class_k_supermartingale(space: FilteredSpace, mset: MeasureSet, terms) -> AdaptedProcess:
    """Nonnegative combination sum_i C_i * f_i,m * E(xi_i | F_m).

    Each weight process must be adapted and pathwise nonincreasing and each
    claim a unit claim; the result is then a super-martingale for the family
    admitting an explicit compensator.
    """
    total = np.zeros((space.horizon + 1, space.outcome_count))
    for i, term in enumerate(terms):
        if term.coefficient < 0:
            raise ValueError(f"term {i}: coefficient must be nonnegative")
        weights = np.asarray(term.weights, dtype=float)
        report = check_adapted(space, weights)
        if not report.ok:
            raise NotAdapted(f"term {i}: weights not adapted at {report.violations[:4]}")
        steps = weights[1:] - weights[:-1]
        if steps.size and steps.max() > EQ_TOL:
            raise NotNonincreasing(f"term {i}: weights increase by {steps.max():.3e}")
        rows = unit_claim_rows(space, mset, term.claim)
        total += term.coefficient * weights * rows
    return AdaptedProcess(space, total)


def k_representation(space: FilteredSpace, mset: MeasureSet, f, dec) -> list[KTerm]:
    """Rebuild a decomposed nonnegative super-martingale from two weighted terms.

    Term one carries the martingale through the claim (f_N + g_N) / f_0 with
    the constant weight f_0; term two removes the compensator through the
    constant claim 1 with weights -g.  Their sum reproduces f.
    """
    proc = _as_process(space, f)
    values = proc.values
    if values.min() < -EQ_TOL:
        raise ValueError("representation requires a nonnegative process")
    f0 = float(values[0, 0])
    if f0 <= EQ_TOL:
        raise ZeroInitialValue("initial value must be strictly positive")

    from .decomposition import validate_decomposition  # local import, no cycle at module load

    report = validate_decomposition(space, mset, proc, dec)
    if not report.ok:
        raise report.error()

    g = dec.compensator.values
    claim1 = (values[-1] + g[-1]) / f0
    if not is_unit_claim(space, mset, claim1):
        raise NotUnitClaim("terminal (f_N + g_N) / f_0 is not a unit claim for this family")
    weights1 = np.full_like(values, f0)
    weights2 = -g
    ones = np.ones(space.outcome_count)
    return [
        KTerm(claim=claim1, weights=weights1, coefficient=1.0),
        KTerm(claim=ones, weights=weights2, coefficient=1.0),
    ]
