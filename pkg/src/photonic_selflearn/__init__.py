"""Digital twin of a 4x4 self-learning MZI-mesh photonic signal processor."""

from .bench import BenchSession, MeasurementFrame, SimulatedChip, scramble
from .experiments import ExperimentConfig, run
from .hardware import DriveLimitError, SpectralModel, ThermalShifterModel
from .learning import (
    TargetRouting,
    TrainingTrace,
    TrainSchedule,
    UndefinedCorrelationError,
    cf_eye,
    cf_filter,
    cf_routing,
    coordinate_descent,
    corr,
)
from .mesh import MeshTopology, chip_matrix, compose_su, decompose_unitary, mzi_matrix
from .signals import EyeTrace, NrzConfig, eye_opening_area, fold_eye, generate_nrz

__version__ = "0.1.0"
