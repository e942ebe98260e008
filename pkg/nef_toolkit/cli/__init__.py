from .app import app
from .dto import CommandReport, OutputFormat, SimulateOverrides

__all__ = ['app', 'CommandReport', 'OutputFormat', 'SimulateOverrides']
