import pytest

from perturb_repair.diagnostics import (Diagnostic, EmptyEvidence, NotAFailure, distribution_report,
                                        from_check_errors, from_test_failure, parse_rendered)
from perturb_repair.executor.checker import CheckError
from perturb_repair.executor.interpreter import TestOutcome
from perturb_repair.lang.ast import NO_SPAN


def err(msg):
    return CheckError("CannotFindSymbol", "cannot find symbol", msg, NO_SPAN)


def test_ce_rendering_uses_first_error():
    d = from_check_errors([err("cannot find symbol: data"), err("cannot find symbol: other")])
    assert d.rendered == "[CE] cannot find symbol: data"


def test_ce_needs_evidence():
    with pytest.raises(EmptyEvidence):
        from_check_errors([])


def test_fe_rendering_worked_example():
    o = TestOutcome("ATest.test_invc", "fail", "ComparisonFailure", "expected:1 but was:0",
                    "assertEquals(1, a.invc());")
    assert from_test_failure(o).rendered == \
        "[FE] ComparisonFailure expected:1 but was:0 assertEquals(1, a.invc());"


def test_fe_elides_empty_parts():
    o = TestOutcome("T.test_x", "fail", "NullDereference", "null dereference", "")
    assert from_test_failure(o).rendered == "[FE] NullDereference null dereference"


def test_passing_outcome_is_not_a_failure():
    with pytest.raises(NotAFailure):
        from_test_failure(TestOutcome("T.test_x", "pass"))


@pytest.mark.parametrize("d", [
    Diagnostic("CE", "", "incompatible types: int cannot be converted to string"),
    Diagnostic("FE", "ComparisonFailure", "expected:1 but was:0", "assertEquals(1, a.invc());"),
    Diagnostic("FE", "IndexOutOfBounds", "index 3 out of bounds for length 2", ""),
    Diagnostic("FE", "AssertionFailure", "assertion failed", "assertTrue(x > 1);"),
])
def test_rendering_parses_back(d):
    assert parse_rendered(d.rendered) == d


def test_histogram_totals_and_csv():
    ds = [Diagnostic("CE", "", "cannot find symbol: a"), Diagnostic("CE", "", "cannot find symbol: b"),
          Diagnostic("FE", "ComparisonFailure", "expected:1 but was:0")]
    h = distribution_report(ds)
    assert h.totals == {"CE": 2, "FE": 1}
    assert h.to_csv() == "error_type,count\ncannot find symbol,2\nComparisonFailure,1\n"
    assert distribution_report(d.rendered for d in ds).rows() == h.rows()
