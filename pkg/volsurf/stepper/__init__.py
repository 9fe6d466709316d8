from .operator import SystemOperator, build_operator, offdiagonal_max
from .time_stepper import (RunContext, StepDiagnostics, StepItem, TimeGrid, TrajectorySummary, evaluate,
                           initial_state, run, step)
