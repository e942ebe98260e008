from .tables import coeffs_action, rf_table_action
from .validate import validate_action
from .conjecture import conjecture_action
from .simulate import simulate_action

__all__ = ['coeffs_action', 'rf_table_action', 'validate_action', 'conjecture_action', 'simulate_action']
