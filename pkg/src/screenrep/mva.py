"""
Correlation-based principal component analysis.

Everything here works on small dense matrices (ten variables in the
intended use), so the eigen solver is a plain cyclic Jacobi iteration
rather than a LAPACK call. That keeps results identical across platforms
once the sign convention is applied.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._io import write_csv

KMO_ADEQUATE = 0.5
BARTLETT_ALPHA = 0.05
LABEL_THRESHOLD = 0.55


class PcaError(ValueError):
    pass


class ZeroVarianceError(PcaError):
    def __init__(self, column):
        super().__init__(f"column {column!r} has zero variance; drop it before PCA")
        self.column = column


class SingularMatrixError(PcaError):
    pass


class InsufficientDataError(PcaError):
    pass


class NumericalError(ArithmeticError):
    pass


@dataclass(frozen=True)
class CorrelationMatrix:
    values: np.ndarray
    n: int

    @property
    def p(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues in descending order; ``vectors[:, j]`` pairs with ``values[j]``."""

    values: np.ndarray
    vectors: np.ndarray
    sweeps: int = 0


@dataclass(frozen=True)
class VarianceTable:
    eigenvalues: np.ndarray
    percent: np.ndarray
    cumulative: np.ndarray


@dataclass(frozen=True)
class AdequacyReport:
    kmo: float
    bartlett_chi2: float
    bartlett_df: int
    bartlett_p: float
    notes: tuple = ()

    @property
    def suitable(self) -> bool:
        return self.kmo > KMO_ADEQUATE and self.bartlett_p < BARTLETT_ALPHA


# --------------------------------------------------------------------------
# standardization and correlation


def standardize(x, columns: Sequence[str] | None = None):
    """
    Z-score each column using the sample standard deviation (divisor n - 1).

    Returns
    -------
    z : ndarray
    means : ndarray
    sds : ndarray
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise PcaError("expected a 2-d observation matrix")
    n, p = x.shape
    if n < 2:
        raise InsufficientDataError(f"need at least 2 observations, got {n}")
    means = x.mean(axis=0)
    centered = x - means
    sds = np.sqrt((centered**2).sum(axis=0) / (n - 1))
    for j in range(p):
        # relative test so a column of 1e6 +/- rounding noise still counts as constant
        scale = max(abs(means[j]), 1.0)
        if not sds[j] > 1e-12 * scale:
            raise ZeroVarianceError(columns[j] if columns is not None else j)
    z = centered / sds
    # second centering pass pulls the column means down to rounding level
    z -= z.mean(axis=0)
    return z, means, sds


def correlation(z) -> CorrelationMatrix:
    """S = Z'Z / (n - 1) on standardized data."""
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    s = z.T @ z / (n - 1)
    s = (s + s.T) / 2.0
    np.fill_diagonal(s, 1.0)
    return CorrelationMatrix(values=s, n=n)


# --------------------------------------------------------------------------
# eigen decomposition


def _apply_sign_convention(vectors: np.ndarray) -> np.ndarray:
    vectors = vectors.copy()
    for j in range(vectors.shape[1]):
        i = int(np.argmax(np.abs(vectors[:, j])))
        if vectors[i, j] < 0:
            vectors[:, j] = -vectors[:, j]
    return vectors


def jacobi_eigen(a, tol: float = 1e-12, max_sweeps: int = 100) -> EigenSystem:
    """
    Cyclic Jacobi eigen decomposition of a real symmetric matrix.

    Sweeps rotate every off-diagonal pair in row order until the largest
    off-diagonal magnitude falls below ``tol``.

    Raises
    ------
    NumericalError
        If the iteration has not converged after ``max_sweeps`` sweeps.
    """
    a = np.array(a, dtype=float)
    p = a.shape[0]
    if a.shape != (p, p):
        raise PcaError("matrix must be square")
    if not np.allclose(a, a.T, atol=1e-12, rtol=0):
        raise PcaError("matrix must be symmetric")
    a = (a + a.T) / 2.0
    v = np.eye(p)

    sweeps = 0
    while True:
        off = np.abs(a - np.diag(np.diag(a))).max() if p > 1 else 0.0
        if off < tol:
            break
        if sweeps >= max_sweeps:
            raise NumericalError(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3e})")
        sweeps += 1
        for i in range(p - 1):
            for j in range(i + 1, p):
                aij = a[i, j]
                if aij == 0.0:
                    continue
                theta = (a[j, j] - a[i, i]) / (2.0 * aij)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                aii = a[i, i] - t * aij
                ajj = a[j, j] + t * aij

                ci = a[:, i].copy()
                cj = a[:, j]
                a[:, i] = c * ci - s * cj
                a[:, j] = s * ci + c * cj
                ri = a[i, :].copy()
                rj = a[j, :]
                a[i, :] = c * ri - s * rj
                a[j, :] = s * ri + c * rj
                a[i, i] = aii
                a[j, j] = ajj
                a[i, j] = a[j, i] = 0.0

                vi = v[:, i].copy()
                vj = v[:, j]
                v[:, i] = c * vi - s * vj
                v[:, j] = s * vi + c * vj

    values = np.diag(a).copy()
    # stable sort so equal eigenvalues keep their original index order
    order = np.argsort(-values, kind="stable")
    return EigenSystem(
        values=values[order],
        vectors=_apply_sign_convention(v[:, order]),
        sweeps=sweeps,
    )


def eigen(s: CorrelationMatrix | np.ndarray, tol: float = 1e-12) -> EigenSystem:
    values = s.values if isinstance(s, CorrelationMatrix) else s
    return jacobi_eigen(values, tol=tol)


# --------------------------------------------------------------------------
# variance, retention, loadings


def variance_table(eigenvalues) -> VarianceTable:
    lam = np.clip(np.asarray(eigenvalues, dtype=float), 0.0, None)
    if np.any(np.diff(lam) > 1e-12):
        raise PcaError("eigenvalues must be sorted in descending order")
    total = lam.sum()
    percent = 100.0 * lam / total
    return VarianceTable(eigenvalues=lam, percent=percent, cumulative=np.cumsum(percent))


def retain(eigenvalues, rule: str = "kaiser", threshold: float = 0.70, k: int | None = None) -> int:
    """
    Number of leading components to keep.

    ``kaiser`` keeps eigenvalues strictly greater than one, ``cumulative``
    keeps the smallest prefix explaining at least ``threshold`` of the
    variance, ``fixed`` keeps ``k`` (clamped to the number of variables).
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if rule == "kaiser":
        return int(np.sum(lam > 1.0))
    if rule == "cumulative":
        cum = variance_table(lam).cumulative / 100.0
        # guard the comparison against the last-digit rounding of cumsum
        hits = np.nonzero(cum >= threshold - 1e-12)[0]
        return int(hits[0]) + 1 if hits.size else len(lam)
    if rule == "fixed":
        if k is None:
            raise PcaError("fixed retention needs k")
        return max(0, min(int(k), len(lam)))
    raise PcaError(f"unknown retention rule {rule!r}")


def parse_rule(text: str) -> dict:
    """Parse ``kaiser``, ``cumulative:0.7`` or ``fixed:4`` into keyword arguments for ``retain``."""
    name, _, arg = text.strip().partition(":")
    name = name.strip().lower()
    if name == "kaiser" and not arg:
        return {"rule": "kaiser"}
    if name == "cumulative":
        return {"rule": "cumulative", "threshold": float(arg) if arg else 0.70}
    if name == "fixed" and arg:
        return {"rule": "fixed", "k": int(arg)}
    raise PcaError(f"cannot parse retention rule {text!r}")


def loadings(system: EigenSystem, k: int) -> np.ndarray:
    """Factor loadings: eigenvector entries scaled by sqrt(eigenvalue), first k components."""
    p = len(system.values)
    if not 0 <= k <= p:
        raise PcaError(f"k must lie in [0, {p}]")
    lam = np.clip(system.values[:k], 0.0, None)
    return system.vectors[:, :k] * np.sqrt(lam)


def suggested_labels(load: np.ndarray, columns: Sequence[str], threshold: float = LABEL_THRESHOLD):
    """Per component, the variables whose absolute loading reaches ``threshold``."""
    return [
        [columns[i] for i in range(load.shape[0]) if abs(load[i, j]) >= threshold]
        for j in range(load.shape[1])
    ]


# --------------------------------------------------------------------------
# sampling adequacy


def kmo(s: CorrelationMatrix | np.ndarray) -> float:
    """
    Overall Kaiser-Meyer-Olkin measure of sampling adequacy.

    Compares squared off-diagonal correlations against squared anti-image
    (partial) correlations taken from the inverse correlation matrix.
    Returns 0 with a warning when there are no off-diagonal correlations
    (all below 1e-12 in magnitude, i.e. rounding noise).
    """
    r = np.asarray(s.values if isinstance(s, CorrelationMatrix) else s, dtype=float)
    smallest = jacobi_eigen(r).values[-1]
    if smallest <= 1e-10:
        raise SingularMatrixError(
            f"correlation matrix is singular (smallest eigenvalue {smallest:.3e}); "
            "remove a linearly dependent variable"
        )
    q = np.linalg.inv(r)
    d = np.sqrt(np.diag(q))
    partial = -q / np.outer(d, d)
    off = ~np.eye(r.shape[0], dtype=bool)
    r2 = float(np.sum(r[off] ** 2))
    q2 = float(np.sum(partial[off] ** 2))
    if np.max(np.abs(r[off]), initial=0.0) < 1e-12:
        warnings.warn("no off-diagonal correlation; KMO undefined, reporting 0", stacklevel=2)
        return 0.0
    return r2 / (r2 + q2)


def _gamma_p_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_fraction(a: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _gamma_p_series(a, x)))
    return min(1.0, max(0.0, _gamma_q_fraction(a, x)))


def chi2_sf(x: float, df: int) -> float:
    return gamma_q(df / 2.0, x / 2.0)


def bartlett(s: CorrelationMatrix | np.ndarray, n: int | None = None):
    """
    Bartlett's test that the correlation matrix is an identity.

    Returns
    -------
    chi2 : float
    df : int
    p_value : float
    """
    if isinstance(s, CorrelationMatrix):
        r = s.values
        n = s.n if n is None else n
    else:
        r = np.asarray(s, dtype=float)
    if n is None:
        raise PcaError("observation count required")
    p = r.shape[0]
    if n <= p:
        raise InsufficientDataError(f"Bartlett test needs n > p (n={n}, p={p})")
    sign, logdet = np.linalg.slogdet(r)
    if sign <= 0:
        raise SingularMatrixError("correlation matrix has non-positive determinant")
    df = p * (p - 1) // 2
    stat = -((n - 1) - (2 * p + 5) / 6.0) * logdet
    if stat == 0.0:
        stat = 0.0  # normalise -0.0
    stat = max(stat, 0.0)
    return stat, df, chi2_sf(stat, df)


def adequacy(s: CorrelationMatrix) -> AdequacyReport:
    notes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        k = kmo(s)
    notes.extend(str(w.message) for w in caught)
    chi2, df, pval = bartlett(s)
    return AdequacyReport(kmo=k, bartlett_chi2=chi2, bartlett_df=df, bartlett_p=pval, notes=tuple(notes))


# --------------------------------------------------------------------------
# full chain


@dataclass
class PcaReport:
    columns: list
    row_keys: list
    means: np.ndarray
    sds: np.ndarray
    correlation: CorrelationMatrix
    adequacy: AdequacyReport
    eigen: EigenSystem
    variance: VarianceTable
    k: int
    loadings: np.ndarray
    scores: np.ndarray
    labels: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def no_structure(self) -> bool:
        return self.k == 0


def run_pca(x, columns=None, row_keys=None, rule: str = "kaiser", **rule_args) -> PcaReport:
    """Standardize, correlate, test adequacy, decompose, retain and load."""
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    columns = list(columns) if columns is not None else [f"x{j + 1}" for j in range(p)]
    row_keys = list(row_keys) if row_keys is not None else [str(i) for i in range(n)]
    if n < 3:
        raise InsufficientDataError(f"PCA needs at least 3 complete rows, got {n}")

    if n <= p:
        # S has rank at most n - 1 < p: adequacy tests are undefined
        raise InsufficientDataError(f"PCA on {p} variables needs more than {p} complete rows, got {n}")
    notes = []
    z, means, sds = standardize(x, columns)
    s = correlation(z)
    adeq = adequacy(s)
    notes.extend(adeq.notes)
    system = eigen(s)
    var = variance_table(system.values)
    k = retain(system.values, rule=rule, **rule_args)
    if k == 0:
        notes.append("no structure: no component retained")
    load = loadings(system, k)
    scores = z @ system.vectors[:, :k]
    return PcaReport(
        columns=columns,
        row_keys=row_keys,
        means=means,
        sds=sds,
        correlation=s,
        adequacy=adeq,
        eigen=system,
        variance=var,
        k=k,
        loadings=load,
        scores=scores,
        labels=suggested_labels(load, columns),
        notes=notes,
    )


def write_pca_report(report: PcaReport, outdir: Path) -> list[Path]:
    """Write adequacy, variance, loadings, scree and score tables as CSV."""
    outdir = Path(outdir)
    adeq = report.adequacy
    no_structure = report.no_structure or adeq.kmo == 0.0
    written = [
        write_csv(
            outdir / "adequacy.csv",
            ["test", "statistic", "value"],
            [
                ["Kaiser-Meyer-Olkin Measure of Sampling Adequacy", "kmo", adeq.kmo],
                ["Bartlett's Test of Sphericity", "approx_chi_square", adeq.bartlett_chi2],
                ["Bartlett's Test of Sphericity", "degrees_of_freedom", adeq.bartlett_df],
                ["Bartlett's Test of Sphericity", "significance", adeq.bartlett_p],
                ["observations", "n", report.correlation.n],
                ["structure", "no_structure", bool(no_structure)],
            ],
        ),
        write_csv(
            outdir / "variance.csv",
            ["component", "eigenvalue", "percent_of_variance", "cumulative_percent"],
            [
                [f"PC{j + 1}", lam, pct, cum]
                for j, (lam, pct, cum) in enumerate(
                    zip(report.variance.eigenvalues, report.variance.percent, report.variance.cumulative)
                )
            ],
        ),
        write_csv(
            outdir / "loadings.csv",
            ["variable"] + [f"PC{j + 1}" for j in range(report.k)],
            [[name] + list(report.loadings[i]) for i, name in enumerate(report.columns)],
        ),
        write_csv(
            outdir / "scree.csv",
            ["component", "percent_of_variance"],
            [[j + 1, pct] for j, pct in enumerate(report.variance.percent)],
        ),
        write_csv(
            outdir / "scores.csv",
            ["movie_id"] + [f"PC{j + 1}" for j in range(report.k)],
            [[key] + list(report.scores[i]) for i, key in enumerate(report.row_keys)],
        ),
        write_csv(
            outdir / "component_labels.csv",
            ["component", "high_loading_variables"],
            [[f"PC{j + 1}", ";".join(names)] for j, names in enumerate(report.labels)],
        ),
    ]
    return written
