from .run_config import RunConfig, FixtureFamily, EulerFamilySection, WeightSpec, DictionarySection
from .reports import (
    ConvergenceVerdict,
    StationarityModulus,
    SReport,
    EulerDiagnostics,
    ConsistencyReport,
    CheckpointBound,
    PerturbationRecord,
    DictionaryRecord,
    ObservableEntry,
)

__all__ = [
    'RunConfig', 'FixtureFamily', 'EulerFamilySection', 'WeightSpec', 'DictionarySection',
    'ConvergenceVerdict', 'StationarityModulus', 'SReport', 'EulerDiagnostics',
    'ConsistencyReport', 'CheckpointBound', 'PerturbationRecord', 'DictionaryRecord', 'ObservableEntry',
]
