"""Matrix p-norms, factorization norms, l_p polar decompositions and column spaces.

Every norm query that is not available in closed form returns a
:class:`NormEstimate` holding a certified lower bound with a witness and a
certified upper bound.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    InequalityViolation,
    InputError,
    NoIsometryError,
    StructuralError,
    UnsupportedSizeError,
)
from .pnorms import (  # noqa: E402
    Exponent,
    InequalityReport,
    NormEstimate,
    check_opnorm_bounds,
    check_p_comparison,
    entrywise_norm,
    holder_dual,
    opnorm,
    opnorm_lower,
    opnorm_oracle_small,
    opnorm_upper,
    vec_p_norm,
)
from .isometry import (  # noqa: E402
    PolarDecomposition,
    RowGrouping,
    group_rows,
    is_lp_isometry,
    is_polar_decomposable,
    polar_decompose,
    support,
)
from .factnorm import (  # noqa: E402
    DualWitness,
    Factorization,
    check_norm_lower_inequality,
    direct_sum_combine,
    factnorm1,
    factnorm1_lower,
    factnorm1_upper,
    factnorm2_upper,
    nuclear_oracle_p2,
    sum_combine,
)
from .colspace import (  # noqa: E402
    ColumnMatrix,
    SubspaceEmbedding,
    check_column_embedding_isometry,
    check_phi_psi_contractive,
    col_matrix_norm,
    counterexample_report,
    phi_apply,
    projection_constant,
    psi_apply,
)
from .verify import Campaign, CampaignReport, extension_gap, run_campaign  # noqa: E402

__all__ = [
    "__version__",
    "# noqa: E402",
    "InequalityViolation",
    "InputError",
    "NoIsometryError",
    "StructuralError",
    "UnsupportedSizeError",
    "# noqa: E402",
    "Exponent",
    "InequalityReport",
    "NormEstimate",
    "check_opnorm_bounds",
    "check_p_comparison",
    "entrywise_norm",
    "holder_dual",
    "opnorm",
    "opnorm_lower",
    "opnorm_oracle_small",
    "opnorm_upper",
    "vec_p_norm",
    "# noqa: E402",
    "PolarDecomposition",
    "RowGrouping",
    "group_rows",
    "is_lp_isometry",
    "is_polar_decomposable",
    "polar_decompose",
    "support",
    "# noqa: E402",
    "DualWitness",
    "Factorization",
    "check_norm_lower_inequality",
    "direct_sum_combine",
    "factnorm1",
    "factnorm1_lower",
    "factnorm1_upper",
    "factnorm2_upper",
    "nuclear_oracle_p2",
    "sum_combine",
    "# noqa: E402",
    "ColumnMatrix",
    "SubspaceEmbedding",
    "check_column_embedding_isometry",
    "check_phi_psi_contractive",
    "col_matrix_norm",
    "counterexample_report",
    "phi_apply",
    "projection_constant",
    "psi_apply",
    "Campaign",
    "CampaignReport",
    "extension_gap",
    "run_campaign",
]
