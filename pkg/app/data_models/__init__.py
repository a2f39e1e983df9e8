from .grid import Grid, FieldSequence
from .observables import CompactObservable, Profile, Weight, WeightKind, ObservableDictionary
from .measures import EmpiricalMeasure, ParametrizedMeasure, MomentSummary
from .ergodic import CorrelationRecord
from .euler import EulerParams, EulerState, TestFunction, MemberFields, EulerFamily, ReynoldsDefectField

__all__ = [
    'Grid', 'FieldSequence',
    'CompactObservable', 'Profile', 'Weight', 'WeightKind', 'ObservableDictionary',
    'EmpiricalMeasure', 'ParametrizedMeasure', 'MomentSummary',
    'CorrelationRecord',
    'EulerParams', 'EulerState', 'TestFunction', 'MemberFields', 'EulerFamily', 'ReynoldsDefectField',
]
