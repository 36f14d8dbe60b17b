"""
Reporting Module
Static charts for pretraining runs and ablations
"""
from src.reporting.charts import ChartGenerator

__all__ = ['ChartGenerator']
