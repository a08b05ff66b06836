"""Fourier coefficients of weak Maass-Poincare series and the weight 1/2 and
3/2 bases built from them."""

from .arith import hurwitz_class_number, kronecker_symbol
from .bases import (
    DualityReport,
    QSeries,
    duality_check,
    duality_grid,
    f_series,
    g_mock_series,
    g_series_neg,
    theta_series,
    zagier_eisenstein,
)
from .kloosterman import kloosterman_sum
from .poincare import (
    CoefficientQuery,
    HarmonicExpansion,
    TruncatedValue,
    TruncationPolicy,
    Weight,
    coeff_b_plus,
    coeff_b_plus_ds,
    coeff_c,
    coefficient_table,
    expansion_special,
)

__version__ = "0.1.0"

__all__ = [
    "CoefficientQuery",
    "DualityReport",
    "HarmonicExpansion",
    "QSeries",
    "TruncatedValue",
    "TruncationPolicy",
    "Weight",
    "coeff_b_plus",
    "coeff_b_plus_ds",
    "coeff_c",
    "coefficient_table",
    "duality_check",
    "duality_grid",
    "expansion_special",
    "f_series",
    "g_mock_series",
    "g_series_neg",
    "hurwitz_class_number",
    "kloosterman_sum",
    "kronecker_symbol",
    "theta_series",
    "zagier_eisenstein",
]
