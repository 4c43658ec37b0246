"""Observed responses and ANOVA statistics for one realized randomization.

Observation reveals exactly one potential outcome per unit: the one for the
assigned treatment (plus that outcome's technical error, when error draws are
supplied).  The mean sums of squares are

    RCB:  S0^2 = sum_it {y_i(t) - ybar.(t) - ybar_i(.) + ybar..}^2 / ((N-1)(T-1))
          S1^2 = N/(T-1) * sum_t {ybar.(t) - ybar..}^2

    LS:   S0^2 = sum_ij {y_ij - ybar_i. - ybar_.j - xbar(t_ij) + 2 ybar..}^2
                 / ((T-1)(T-2))
          S1^2 = T/(T-1) * sum_t {xbar(t) - ybar..}^2

with xbar(t) the observed mean for treatment t.  F = S1^2/S0^2; when S0^2 is
exactly 0 the statistic is +inf if S1^2 > 0 (rejects any finite cutoff) and
NaN if both vanish (a degenerate draw, counted as a non-rejection).

The scalar path (`anova`) uses math.fsum reductions in fixed index order.
The batch path (`batch_anova_rcb` / `batch_anova_ls`) vectorizes the same
formulas over many assignments with numpy; the test suite pins the two paths
against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .enumeration import Assignment
from .errors import DegenerateDesign, ShapeMismatch
from .potential_outcomes import (
    DesignKind,
    PotentialOutcomeTable,
    fsum_all,
    fsum_along,
    validate,
)


@dataclass(frozen=True)
class ObservedExperiment:
    """Responses produced by one assignment.

    observed is y_i(t) indexed [block][treatment] for RCB, and y_ij indexed
    [row][column] for LS.  error_draws echoes the realized technical-error
    array actually applied (None when the run was noiseless).
    """

    design: DesignKind
    observed: np.ndarray
    assignment: Assignment
    error_draws: np.ndarray | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.observed, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "observed", arr)


@dataclass(frozen=True)
class AnovaSummary:
    """Mean sums of squares, the F statistic, and companions.

    welch_stat is df1*S1^2 / (df1*S1^2 + df0*S0^2); pooled is its denominator,
    which stays constant over the randomizations under the sharp null.
    """

    s0_sq: float
    s1_sq: float
    f_stat: float
    df_treatment: int
    df_residual: int
    welch_stat: float
    pooled: float

    @property
    def is_degenerate(self) -> bool:
        return math.isnan(self.f_stat)


def f_from_sums(s0_sq: float, s1_sq: float) -> float:
    """F ratio with the degenerate conventions (inf / NaN on zero residual)."""
    if s0_sq == 0.0:
        return math.inf if s1_sq > 0.0 else math.nan
    return s1_sq / s0_sq


def observe(
    table: PotentialOutcomeTable,
    assignment: Assignment,
    errors: np.ndarray | None = None,
) -> ObservedExperiment:
    """Reveal the assigned potential outcomes (optionally with error draws)."""
    validate(table)
    if assignment.design is not table.design:
        raise ShapeMismatch(
            f"assignment is for {assignment.design.value}, table is "
            f"{table.design.value}"
        )
    x = table.outcomes
    if errors is not None:
        errors = np.asarray(errors, dtype=float)
        if errors.shape != x.shape:
            raise ShapeMismatch(
                f"error array shape {errors.shape} != outcome shape {x.shape}"
            )
        x = x + errors
    n, _, t = x.shape
    if table.design is DesignKind.RCB:
        perms = assignment.rcb_perms
        if perms is None or perms.shape != (n, t):
            raise ShapeMismatch(
                f"RCB assignment shape {None if perms is None else perms.shape} "
                f"!= ({n}, {t})"
            )
        inverse = np.argsort(perms, axis=1)  # plot carrying each treatment
        blocks = np.arange(n)[:, None]
        y = x[blocks, inverse, np.arange(t)[None, :]]
    else:
        square = assignment.ls_square
        if square is None or square.shape != (t, t):
            raise ShapeMismatch(
                f"LS assignment shape {None if square is None else square.shape} "
                f"!= ({t}, {t})"
            )
        ii, jj = np.meshgrid(np.arange(t), np.arange(t), indexing="ij")
        y = x[ii, jj, square]
    return ObservedExperiment(
        design=table.design,
        observed=y,
        assignment=assignment,
        error_draws=errors,
    )


def anova(experiment: ObservedExperiment) -> AnovaSummary:
    """ANOVA summary of one observed experiment (exact fsum reductions)."""
    y = experiment.observed
    if experiment.design is DesignKind.RCB:
        n, t = y.shape
        df1, df0 = t - 1, (n - 1) * (t - 1)
        if df0 < 1:
            raise DegenerateDesign(
                f"RCB with {n} block(s) has no residual degrees of freedom"
            )
        ybar_t = fsum_along(y, 0) / n
        ybar_i = fsum_along(y, 1) / t
        ybar = math.fsum(ybar_t.tolist()) / t
        resid = y - ybar_t[None, :] - ybar_i[:, None] + ybar
        s0 = fsum_all(resid * resid) / df0
        s1 = n / df1 * fsum_all((ybar_t - ybar) ** 2)
    else:
        t = y.shape[0]
        df1, df0 = t - 1, (t - 1) * (t - 2)
        if df0 < 1:
            raise DegenerateDesign(
                f"LS of order {t} has no residual degrees of freedom"
            )
        square = experiment.assignment.ls_square
        treat_means = np.array(
            [math.fsum(y[square == k].tolist()) for k in range(t)]
        ) / t
        ybar_i = fsum_along(y, 1) / t
        ybar_j = fsum_along(y, 0) / t
        ybar = math.fsum(ybar_i.tolist()) / t
        resid = (
            y
            - ybar_i[:, None]
            - ybar_j[None, :]
            - treat_means[square]
            + 2.0 * ybar
        )
        s0 = fsum_all(resid * resid) / df0
        s1 = t / df1 * fsum_all((treat_means - ybar) ** 2)

    s0 = max(s0, 0.0)
    s1 = max(s1, 0.0)
    pooled = df1 * s1 + df0 * s0
    welch = df1 * s1 / pooled if pooled > 0.0 else math.nan
    return AnovaSummary(
        s0_sq=s0,
        s1_sq=s1,
        f_stat=f_from_sums(s0, s1),
        df_treatment=df1,
        df_residual=df0,
        welch_stat=welch,
        pooled=pooled,
    )


def design_dfs(design: DesignKind, num_blocks: int, num_treatments: int) -> tuple[int, int]:
    """(df_treatment, df_residual) for the design; raises when df_residual < 1."""
    t = num_treatments
    if DesignKind(design) is DesignKind.RCB:
        df0 = (num_blocks - 1) * (t - 1)
        if df0 < 1:
            raise DegenerateDesign(
                f"RCB with {num_blocks} block(s) has no residual degrees of freedom"
            )
    else:
        df0 = (t - 1) * (t - 2)
        if df0 < 1:
            raise DegenerateDesign(f"LS of order {t} has no residual degrees of freedom")
    return t - 1, df0


def batch_anova_rcb(x: np.ndarray, perms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(S0^2, S1^2) arrays for a batch of RCB assignments.

    x is the (N, T, T) outcome array; perms is (S, N, T) with perms[s, i, j]
    the treatment of plot j in block i under assignment s.
    """
    n, _, t = x.shape
    df1, df0 = design_dfs(DesignKind.RCB, n, t)
    inverse = np.argsort(perms, axis=2)
    blocks = np.arange(n)[None, :, None]
    treatments = np.arange(t)[None, None, :]
    y = x[blocks, inverse, treatments]  # (S, N, T): y_i(t)
    ybar_t = y.mean(axis=1)
    ybar_i = y.mean(axis=2)
    ybar = y.mean(axis=(1, 2))
    resid = y - ybar_t[:, None, :] - ybar_i[:, :, None] + ybar[:, None, None]
    s0 = (resid * resid).sum(axis=(1, 2)) / df0
    s1 = n / df1 * ((ybar_t - ybar[:, None]) ** 2).sum(axis=1)
    return np.maximum(s0, 0.0), np.maximum(s1, 0.0)


def batch_anova_ls(x: np.ndarray, squares: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(S0^2, S1^2) arrays for a batch of LS assignments.

    x is the (T, T, T) outcome array; squares is (S, T, T) of treatment labels.
    """
    t = x.shape[0]
    df1, df0 = design_dfs(DesignKind.LS, t, t)
    s = squares.shape[0]
    ii, jj = np.meshgrid(np.arange(t), np.arange(t), indexing="ij")
    y = x[ii[None, :, :], jj[None, :, :], squares]  # (S, T, T)
    onehot = squares[..., None] == np.arange(t)[None, None, None, :]
    treat_means = np.einsum("sij,sijk->sk", y, onehot.astype(float)) / t
    ybar_i = y.mean(axis=2)
    ybar_j = y.mean(axis=1)
    ybar = y.mean(axis=(1, 2))
    cell_tm = np.take_along_axis(
        treat_means, squares.reshape(s, t * t), axis=1
    ).reshape(s, t, t)
    resid = (
        y
        - ybar_i[:, :, None]
        - ybar_j[:, None, :]
        - cell_tm
        + 2.0 * ybar[:, None, None]
    )
    s0 = (resid * resid).sum(axis=(1, 2)) / df0
    s1 = t / df1 * ((treat_means - ybar[:, None]) ** 2).sum(axis=1)
    return np.maximum(s0, 0.0), np.maximum(s1, 0.0)
