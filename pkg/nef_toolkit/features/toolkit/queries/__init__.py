from .rf_table import RfTableQuery, RfTableResult, RfTableHandler, RfTableHandlerImpl
from .series_coeffs import SeriesCoeffsQuery, SeriesCoeffsResult, SeriesCoeffsHandler, SeriesCoeffsHandlerImpl

__all__ = [
    'RfTableQuery', 'RfTableResult', 'RfTableHandler', 'RfTableHandlerImpl',
    'SeriesCoeffsQuery', 'SeriesCoeffsResult', 'SeriesCoeffsHandler', 'SeriesCoeffsHandlerImpl'
]
