from .cointegration import EngleGrangerResult, JohansenResult, engle_granger, johansen
from .critical_values import DF_CRITICAL, JOHANSEN_TRACE_CRITICAL
from .diagnostics import DiagnosticResult, arch_lm, breusch_godfrey, jarque_bera
from .ols import OlsFit, ols
from .unitroot import AdfResult, adf_test
from .var import var_lag_select
from .vecm import LevelVar, VecmFit, granger_block_test, half_life, vecm_fit, vecm_predict, vecm_to_var

__all__ = [
    "AdfResult", "DF_CRITICAL", "DiagnosticResult", "EngleGrangerResult", "JOHANSEN_TRACE_CRITICAL",
    "JohansenResult", "LevelVar", "OlsFit", "VecmFit", "adf_test", "arch_lm", "breusch_godfrey",
    "engle_granger", "granger_block_test", "half_life", "jarque_bera", "johansen", "ols",
    "var_lag_select", "vecm_fit", "vecm_predict", "vecm_to_var",
]
