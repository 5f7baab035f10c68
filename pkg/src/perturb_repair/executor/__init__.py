from .checker import CheckError, check, check_with_types
from .interpreter import ExecLimits, NotChecked, TestOutcome, first_failure, run_tests

__all__ = ["CheckError", "check", "check_with_types", "ExecLimits", "NotChecked",
           "TestOutcome", "first_failure", "run_tests"]
