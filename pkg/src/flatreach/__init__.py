"""Exact acceleration of difference-bounds and octagonal relations."""

from .dbm import EMPTY, INF, DbRelation, close, compose, equivalent, is_consistent, project
from .octagon import OctRelation, oct_compose, tight_close

__version__ = "0.1.0"
