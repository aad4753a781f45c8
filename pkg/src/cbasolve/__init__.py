"""Conic Blackwell algorithms and first-order baselines for saddle-point problems."""
from .framework import AveragingScheme, RunRecord, run
from .geometry import Ball, BallHyperplane, L1Ball, L2Ball, LInfBall, Simplex
from .minimizers import CBA, FTRL, OMD, OptimisticFTRL, OptimisticOMD, RegretMatching
from .problems import DroInstance, MatrixGame

__all__ = [
    "AveragingScheme", "RunRecord", "run",
    "Ball", "BallHyperplane", "L1Ball", "L2Ball", "LInfBall", "Simplex",
    "CBA", "FTRL", "OMD", "OptimisticFTRL", "OptimisticOMD", "RegretMatching",
    "DroInstance", "MatrixGame",
]
