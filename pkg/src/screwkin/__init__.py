"""Screw-theoretic kinematics of tree-topology multibody systems."""

from .kinematics import TwistRep, fk, twists
from .model import Convention, MbsModel, validate

__version__ = "0.1.0"

__all__ = ["Convention", "MbsModel", "TwistRep", "fk", "twists", "validate", "__version__"]
