"""Shared test utilities: random table generators and brute-force oracles.

The oracles here deliberately re-derive quantities by direct enumeration
(observe + scalar anova per assignment, plain loops) so closed forms in the
package are checked against an independent route.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

import randova as rv


def random_rcb_table(rng, num_blocks=None, num_treatments=None, sd=0.0):
    # default sizes keep (T!)^N small enough for exhaustive-enumeration tests
    n = int(num_blocks) if num_blocks else int(rng.integers(2, 4))
    t = int(num_treatments) if num_treatments else int(rng.integers(2, 4))
    x = rng.normal(20.0, 15.0, size=(n, t, t))
    return rv.PotentialOutcomeTable(rv.DesignKind.RCB, x, technical_error_sd=sd)


def random_ls_table(rng, order=None, sd=0.0):
    t = int(order) if order else int(rng.integers(3, 5))
    x = rng.normal(20.0, 15.0, size=(t, t, t))
    return rv.PotentialOutcomeTable(rv.DesignKind.LS, x, technical_error_sd=sd)


def random_table(rng, design, sd=0.0, **kwargs):
    if rv.DesignKind(design) is rv.DesignKind.RCB:
        return random_rcb_table(rng, sd=sd, **kwargs)
    return random_ls_table(rng, sd=sd, **kwargs)


def additive_table(rng, design, num_blocks=None, order=None, shifts=None):
    """X_ij(t) = U_ij + tau(t); shifts=None draws random tau, pass 0 for sharp null."""
    design = rv.DesignKind(design)
    if design is rv.DesignKind.RCB:
        n = int(num_blocks) if num_blocks else int(rng.integers(2, 4))
        t = int(rng.integers(2, 4))
    else:
        t = int(order) if order else int(rng.integers(3, 5))
        n = t
    units = rng.normal(10.0, 8.0, size=(n, t))
    if shifts is None:
        tau = rng.normal(0.0, 5.0, size=t)
    else:
        tau = np.full(t, float(shifts)) if np.isscalar(shifts) else np.asarray(shifts)
    x = units[:, :, None] + tau[None, None, :]
    return rv.PotentialOutcomeTable(design, x)


def sharp_null_table(rng, design, **kwargs):
    return additive_table(rng, design, shifts=0.0, **kwargs)


def two_value_witness(rng, order=4):
    """LS table in the two-marked-cells family: sharp null, no blocking-factor
    interaction, equal expected mean squares, yet F takes only two values."""
    t = order
    x = np.zeros((t, t, t))
    i1 = int(rng.integers(0, t))
    i2 = int((i1 + 1 + rng.integers(0, t - 1)) % t)
    j1 = int(rng.integers(0, t))
    j2 = int((j1 + 1 + rng.integers(0, t - 1)) % t)
    scale = float(rng.uniform(0.5, 50.0)) * (1 if rng.random() < 0.5 else -1)
    shift = float(rng.normal(0.0, 10.0))
    x[i1, j1, :] = 1.0
    x[i2, j2, :] = 1.0
    return rv.PotentialOutcomeTable(rv.DesignKind.LS, shift + scale * x)


def rcb_block_constant_table(rng, num_blocks=None, num_treatments=None):
    """Integer-valued RCB table whose block corrections are exactly constant
    in t: per-block row sums are forced to the same integer for every
    treatment, so B_i(t) is the same float for all t and the interaction term
    is exactly zero."""
    n = int(num_blocks) if num_blocks else int(rng.integers(2, 4))
    t = int(num_treatments) if num_treatments else int(rng.integers(2, 4))
    x = rng.integers(-20, 40, size=(n, t, t)).astype(float)
    targets = rng.integers(-10, 30, size=n)
    for i in range(n):
        for k in range(t):
            x[i, t - 1, k] = targets[i] - x[i, : t - 1, k].sum()
    return rv.PotentialOutcomeTable(rv.DesignKind.RCB, x)


def ls_interaction_free_table(rng, order=None):
    """Integer-valued LS table whose row and column sums are identical across
    treatments, making R_i(t) and C_j(t) exactly constant in t."""
    t = int(order) if order else int(rng.integers(3, 5))
    row_targets = rng.integers(-10, 30, size=t)
    col_targets = rng.integers(-10, 30, size=t)
    col_targets[-1] = row_targets.sum() - col_targets[:-1].sum()
    x = np.empty((t, t, t))
    for k in range(t):
        core = rng.integers(-20, 40, size=(t - 1, t - 1)).astype(float)
        grid = np.zeros((t, t))
        grid[: t - 1, : t - 1] = core
        grid[: t - 1, t - 1] = row_targets[: t - 1] - core.sum(axis=1)
        grid[t - 1, :] = col_targets - grid[: t - 1, :].sum(axis=0)
        x[:, :, k] = grid
    return rv.PotentialOutcomeTable(rv.DesignKind.LS, x)


def all_assignments(table):
    if table.design is rv.DesignKind.RCB:
        return list(rv.enumerate_rcb(table.num_blocks, table.num_treatments))
    return list(rv.enumerate_latin_squares(table.num_treatments))


def treatment_means(experiment):
    """Observed per-treatment means from one experiment, either design."""
    y = experiment.observed
    if experiment.design is rv.DesignKind.RCB:
        return np.array([math.fsum(y[:, k].tolist()) / y.shape[0]
                         for k in range(y.shape[1])])
    square = experiment.assignment.ls_square
    t = y.shape[0]
    return np.array([math.fsum(y[square == k].tolist()) / t for k in range(t)])


def enumeration_mean_squares(table):
    """Enumeration means of (S0^2, S1^2) via the scalar anova path."""
    s0s, s1s = [], []
    for assignment in all_assignments(table):
        summary = rv.anova(rv.observe(table, assignment))
        s0s.append(summary.s0_sq)
        s1s.append(summary.s1_sq)
    return math.fsum(s0s) / len(s0s), math.fsum(s1s) / len(s1s)


def enumeration_contrast_moments(table, t_a, t_b):
    """Mean and population variance of the observed contrast over all
    assignments."""
    diffs = []
    for assignment in all_assignments(table):
        means = treatment_means(rv.observe(table, assignment))
        diffs.append(float(means[t_a] - means[t_b]))
    mean = math.fsum(diffs) / len(diffs)
    var = math.fsum((d - mean) ** 2 for d in diffs) / len(diffs)
    return mean, var


def count_latin_squares_bruteforce(order):
    """Independent Latin-square count: tuples of pairwise pointwise-distinct
    permutation rows, standardizing the first row to cut the search."""
    perms = list(itertools.permutations(range(order)))
    identity = tuple(range(order))

    def compatible(row, previous):
        return all(all(a != b for a, b in zip(row, prev)) for prev in previous)

    def extend(previous):
        if len(previous) == order:
            return 1
        return sum(
            extend(previous + [p]) for p in perms if compatible(p, previous)
        )

    return math.factorial(order) * extend([identity])
