"""Local and global rescaled-range Hurst analysis of intraday quote data."""
from .quotes import (FormatConfig, QuoteDataError, QuoteSeries, QuoteTick, crosstab_by_hour_weekday,
                     inter_quote_gaps, parse_quote_file, to_day_fraction)
from .resample import (BootstrapConfig, BootstrapSummary, ZTestResult, bootstrap_local_hurst,
                       scramble, z_test)
from .returns import ReturnSeries, ReturnsConfig, adjusted_returns, hourly_return_summary
from .rs import (GlobalHurstFit, LocalHurstStream, autocorrelation, decomposition_components,
                 global_hurst, local_hurst_stream, reconstruct_h, rescaled_range)
from .session import (anova_oneway, bundle_by_hour, decomposition_from_means, decomposition_table,
                      kruskal_wallis)
from .synthetic import FgnSpec, fgn_autocovariance, gen_fgn, gen_gaussian_iid

__version__ = "0.1.0"
