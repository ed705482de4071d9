#!/usr/bin/env python3
"""
Projection router for constraint-based dispatch.
Routes a (matrix, constraint) pair to the projection handler registered for
the constraint's kind, using a ROUTE_TABLE keyed by kind name.
"""

import logging
from typing import Callable, Dict, List

import numpy as np

from .schema import Constraint

logger = logging.getLogger(__name__)


class Router:
    """Dispatch table mapping constraint kinds to projection handlers."""

    def __init__(self):
        self.route_table: Dict[str, Callable] = {}

    def register(self, kind: str, handler: Callable) -> None:
        """Register a handler function for a constraint kind."""
        self.route_table[kind] = handler
        logger.debug(f"[ROUTER] Registered handler for constraint: {kind}")

    def route(self, m: np.ndarray, constraint: Constraint):
        """Validate the constraint against m and run the matching handler."""
        if not isinstance(constraint, Constraint):
            raise ValueError(f"Invalid constraint {constraint!r}: expected a Constraint instance")
        kind = constraint.kind
        if kind not in self.route_table:
            raise ValueError(f"Unknown constraint kind: {kind}")
        constraint.validate_for(m.shape)
        return self.route_table[kind](m, constraint)

    def get_registered_kinds(self) -> List[str]:
        """Get list of all registered constraint kinds."""
        return list(self.route_table.keys())

    def is_registered(self, kind: str) -> bool:
        """Check if a constraint kind is registered."""
        return kind in self.route_table
