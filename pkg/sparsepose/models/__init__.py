"""
Models Package

Exports all domain types for easy importing.
"""

from sparsepose.models.pose import Pose3D, Pose2D, CameraModel, BasisPose
from sparsepose.models.dictionary import PoseDictionary
from sparsepose.models.regularizer import RegularizerKind, RegularizerSpec, SurrogateWeights
from sparsepose.models.solver import (AffineStack, AdmmState, MuAdaptation, SolverConfig,
                                      IterationRecord, SolveTrace, RecoveryResult, TheoryReport)
from sparsepose.models.experiment import ExperimentSpec, ExperimentReport, TrialRecord, evenly_spaced_angles

__all__ = [
    'Pose3D',
    'Pose2D',
    'CameraModel',
    'BasisPose',
    'PoseDictionary',
    'RegularizerKind',
    'RegularizerSpec',
    'SurrogateWeights',
    'AffineStack',
    'AdmmState',
    'MuAdaptation',
    'SolverConfig',
    'IterationRecord',
    'SolveTrace',
    'RecoveryResult',
    'TheoryReport',
    'ExperimentSpec',
    'ExperimentReport',
    'TrialRecord',
    'evenly_spaced_angles',
]
