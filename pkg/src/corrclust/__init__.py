"""Multi-factor clustering of financial correlation networks.

The package turns daily price panels into correlation-based distance
networks, strips dominant factors (market, sector, country) through robust
pseudo-index regression, clusters the residual network with average-link
agglomerative clustering, and quantifies how well labeled groups cohere in
the tree, both statically and day by day under exponential forgetting.
"""

from .correlate import (
    CorrelationMatrix,
    DistanceMatrix,
    EWState,
    default_burn_in,
    ew_distance_series,
    ew_step,
    initial_ew_state,
    pearson,
    to_distance,
)
from .defactor import (
    PseudoIndex,
    RegressionFit,
    ResidualPanel,
    ols_fit,
    pseudo_index,
    residualize,
    theil_sen_fit,
)
from .errors import NumericError, ValidationError
from .hcluster import (
    Dendrogram,
    Merge,
    average_link,
    newick_clades,
    parse_newick,
    smallest_common_cluster,
    to_newick,
)
from .mds import Embedding, classical_mds, procrustes_residual, smacof, stress
from .panel import (
    CompanyMeta,
    FxTable,
    PricePanel,
    ReturnsPanel,
    convert_currency,
    load_fx,
    load_metadata,
    load_prices,
    to_log_returns,
)
from .evaluate import (
    PermutationResult,
    PurityReport,
    PurityRow,
    membership_tables,
    permutation_pvalue,
    purity,
    purity_report,
    subset_purity,
)
from .synth import (
    FactorModelSpec,
    RegimeShift,
    default_spec,
    expected_correlation,
    generate,
    to_price_panel,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
