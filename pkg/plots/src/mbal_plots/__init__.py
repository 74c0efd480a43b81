"""Figure rendering for mbal-clo result CSVs.

Consumes the solver package's versioned CSV outputs (run, compare, psi) and
renders the four standard figure kinds: learning curves with bootstrap CI
bands, labeled-fraction sweeps, risk-ratio bars, and near-degeneracy
profiles. The CSVs are the entire interface; this package never imports the
solver.
"""

from .aggregate import (
    CurveBands,
    FractionPoint,
    bootstrap_mean_ci,
    labeled_fraction_point,
    learning_curve_bands,
    risk_at_budget_rows,
)
from .figures import DPI, FIGSIZE, KINDS, FigureSpec, render
from .schemas import (
    COMPARE_COLUMNS,
    PSI_COLUMNS,
    RUN_COLUMNS,
    SCHEMA_LINE,
    CompareRow,
    PsiData,
    RunData,
    load_compare_csv,
    load_psi_csv,
    load_run_csv,
    read_versioned_csv,
)

__version__ = "0.1.0"
