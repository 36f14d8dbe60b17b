"""
Health Module
Invariance self-check suite
"""
from src.health.diagnostics import SystemDiagnostics, FAULTS, format_table

__all__ = ['SystemDiagnostics', 'FAULTS', 'format_table']
