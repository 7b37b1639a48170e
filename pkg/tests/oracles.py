"""Independent numerical oracles used to freeze expected test values.

Everything here deliberately avoids the library under test: tail
probabilities come from adaptive quadrature of explicitly written densities
(normalized with ``math.lgamma``), and contingency statistics come from
plain double loops over Python floats.

Run ``python tests/oracles.py`` to regenerate ``tests/data/chi2_sf_oracle.json``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from scipy.integrate import quad

DATA_DIR = Path(__file__).parent / "data"

# dof values and the per-dof x grid required by the acceptance suite
# (12 dof x 17 points = 204 grid points over x in [0, 1000]).
ORACLE_DOFS = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 50, 200)
ORACLE_XS = tuple(1000.0 * i / 16 for i in range(17))


def chi_squared_density(t: float, dof: int) -> float:
    if t <= 0.0:
        return 0.0
    half = dof / 2.0
    log_pdf = (half - 1.0) * math.log(t) - t / 2.0 - half * math.log(2.0) - math.lgamma(half)
    return math.exp(log_pdf)


def chi_squared_sf_quadrature(x: float, dof: int) -> float:
    """Survival function by adaptive quadrature of the chi-squared density."""
    if x <= 0.0:
        return 1.0
    # Integrating the head and complementing is better conditioned when the
    # survival probability is not tiny; otherwise integrate the tail itself.
    head, _ = quad(chi_squared_density, 0.0, x, args=(dof,), epsabs=1e-14, epsrel=1e-13, limit=400)
    if head < 0.5:
        return 1.0 - head
    tail, _ = quad(
        chi_squared_density, x, math.inf, args=(dof,), epsabs=1e-14, epsrel=1e-13, limit=400
    )
    return tail


def normal_density(t: float) -> float:
    return math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)


def normal_two_tailed_p_quadrature(z: float) -> float:
    """Two-tailed normal p-value: 2 * integral of the density from |z| to inf."""
    tail, _ = quad(normal_density, abs(z), math.inf, epsabs=1e-15, epsrel=1e-13, limit=400)
    return min(2.0 * tail, 1.0)


def normal_two_tailed_quantile_quadrature(alpha: float, tol: float = 1e-13) -> float:
    """Invert the quadrature-based two-tailed p-value by bisection."""
    lo, hi = 0.0, 1.0
    while normal_two_tailed_p_quadrature(hi) > alpha:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if normal_two_tailed_p_quadrature(mid) > alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def chi_squared_statistic_direct(observed) -> float:
    """Cell-by-cell Pearson statistic over plain Python floats."""
    rows = [list(map(float, row)) for row in observed]
    n = sum(sum(row) for row in rows)
    row_totals = [sum(row) for row in rows]
    col_totals = [sum(row[j] for row in rows) for j in range(len(rows[0]))]
    stat = 0.0
    for i, row in enumerate(rows):
        for j, obs in enumerate(row):
            exp = row_totals[i] * col_totals[j] / n
            stat += (obs - exp) ** 2 / exp
    return stat


def adjusted_residual_direct(observed, i: int, j: int) -> float:
    """Single adjusted standardized residual over plain Python floats."""
    rows = [list(map(float, row)) for row in observed]
    n = sum(sum(row) for row in rows)
    row_total = sum(rows[i])
    col_total = sum(row[j] for row in rows)
    exp = row_total * col_total / n
    denom = math.sqrt(exp * (1.0 - row_total / n) * (1.0 - col_total / n))
    return (rows[i][j] - exp) / denom


def generate_chi2_sf_table() -> dict:
    points = []
    for dof in ORACLE_DOFS:
        for x in ORACLE_XS:
            points.append({"dof": dof, "x": x, "sf": chi_squared_sf_quadrature(x, dof)})
    return {"points": points}


if __name__ == "__main__":
    DATA_DIR.mkdir(exist_ok=True)
    table = generate_chi2_sf_table()
    out = DATA_DIR / "chi2_sf_oracle.json"
    out.write_text(json.dumps(table, indent=1) + "\n")
    print(f"wrote {out} ({len(table['points'])} points)")
