"""Cache-enabled mm-wave network performance with fluid-antenna users.

Analytic SCDP/delay via Gauss-Laguerre quadrature over a Gaussian-copula
best-port channel, an adaptive-quadrature oracle, and a reproducible
Monte-Carlo simulator, plus a CLI that renders the standard performance
curves as CSV/PDF artifacts.
"""

from .channel import (
    FasChannel,
    fas_gain_cdf,
    fas_gain_result,
    make_channel,
    marginal_gain_cdf,
    sample_fas_gain,
    sample_fas_gains,
)
from .config import ConfigError, RunConfig, load_config
from .correlation import (
    CorrelationMatrix,
    PortGrid,
    build_correlation,
    correlation_from_entries,
    port_correlation,
    port_positions,
    port_to_grid,
)
from .metrics import (
    CrossCheckWarning,
    SuccessResult,
    cdd,
    cdd_asymptotic,
    cdd_weighted,
    scdp,
    scdp_adaptive,
    success_probability,
    success_probability_adaptive,
)
from .mvn import MvnResult, mvn_cdf, mvn_cdf_equicoordinate
from .network import (
    CachePolicy,
    ContentCatalog,
    NetworkParams,
    db_to_linear,
    dbm_to_watts,
    nearest_distance_pdf,
    policy_scalar,
    policy_top_k,
    policy_uniform,
    sample_nearest_distance,
    zipf_popularity,
)
from .simulate import SimConfig, SimResult, simulate, simulate_sweep
from .specfun import (
    NumericsError,
    QuadratureRule,
    erf,
    erf_inv,
    erfc,
    gauss_laguerre_rule,
    laguerre,
    spherical_bessel_j0,
    std_normal_quantile,
)

__version__ = "0.1.0"
