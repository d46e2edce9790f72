from fractions import Fraction as F

import pytest

from oracles import CASE_EXAMPLES
from toda_hyper.cases import classify
from toda_hyper.gamma import SingularData, super_gamma


def su3(g1):
    return SingularData(3, [0, 0], list(g1), [2, 2])


@pytest.mark.parametrize("g1,case,tau", CASE_EXAMPLES)
def test_worked_examples(g1, case, tau):
    res = classify(su3(g1))
    assert (res.case_index, res.tau) == (case, tau)
    assert res.matched


def test_no_case():
    res = classify(su3((F(1, 5), F(3, 10))))
    assert res.case_index is None and res.tau is None and not res.matched


@pytest.mark.parametrize("n", [3, 4, 5])
def test_zero_vector_is_regular(n):
    res = classify(SingularData(n, [0] * (n - 1), [0] * (n - 1), [2] * (n - 1)))
    assert res.case_index is None
    assert "regular point" in res.reason


def test_scaling_breaks_middle_case():
    assert classify(su3((F(-3, 10), F(-7, 10)))).case_index == 1
    assert classify(su3((F(-3, 5), F(-7, 5) + F(1, 2)))).case_index is None


def test_middle_cases_n5():
    for i in range(1, 4):
        g = [F(0)] * 4
        g[i - 1], g[i] = F(-1, 4), F(-3, 4)
        data = SingularData(5, [0] * 4, g, [2] * 4)
        res = classify(data)
        assert res.case_index == i
        assert res.tau == super_gamma(data).upper["1"][0]


def test_case_taus_general_n():
    data = SingularData(4, [0] * 3, ["1/3", 0, 0], [2] * 3)
    sg = super_gamma(data)
    assert classify(data).tau == sg.upper["1"][0] - sg.mu["1"][0]
    data = SingularData(4, [0] * 3, [0, 0, "1/3"], [2] * 3)
    assert classify(data).case_index == 3
    assert classify(data).tau == super_gamma(data).upper["1"][0]


def test_n2_reports_both_shifts():
    data = SingularData(2, [0], ["1/2"], [2])
    res = classify(data)
    sg = super_gamma(data)
    assert res.alternatives == ((0, sg.upper["1"][0] - sg.mu["1"][0]), (1, sg.upper["1"][0]))
    assert res.to_json()["alternatives"] == [[0, "-5/4"], [1, "1/4"]]
