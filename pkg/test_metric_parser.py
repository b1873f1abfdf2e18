import numpy as np
import pytest

from lorroll.metric_parser import FUNCTIONS, MetricParseError, parse_expression, parse_metric_expression


def _eval(text, x=(2.0, 3.0)):
    return parse_expression(text).evaluate(np.array(x))


def test_number_forms():
    assert _eval("2.5e1") == pytest.approx(25.0)
    assert _eval(".5 + 1.") == pytest.approx(1.5)
    assert _eval("  x1   *x2 ") == pytest.approx(6.0)


def test_operator_precedence():
    assert _eval("2+3*x1") == pytest.approx(8.0)
    assert _eval("(2+3)*x1") == pytest.approx(10.0)
    assert _eval("x2-x1-1") == pytest.approx(0.0)
    assert _eval("x2/x1/3") == pytest.approx(0.5)
    assert _eval("2^3^2") == pytest.approx(512.0)
    assert _eval("-x1^2") == pytest.approx(-4.0)
    assert _eval("2^-1") == pytest.approx(0.5)


def test_functions():
    assert _eval("cosh(x1)^2 - sinh(x1)^2") == pytest.approx(1.0)
    assert _eval("sqrt(x1*8)") == pytest.approx(4.0)
    assert _eval("exp(0)+sin(0)+cos(0)") == pytest.approx(2.0)


def test_tan_log_tanh():
    assert {"tan", "log", "tanh"} <= set(FUNCTIONS)
    assert _eval("tan(x1)") == pytest.approx(np.tan(2.0))
    assert _eval("log(exp(x2))") == pytest.approx(3.0)
    assert _eval("tanh(x1) * cosh(x1)") == pytest.approx(np.sinh(2.0))


def test_unknown_function():
    with pytest.raises(MetricParseError, match="Unknown function") as info:
        parse_expression("1 + erf(x1)")
    assert info.value.position == 4


@pytest.mark.parametrize("text,position", [
    ("2*y", 2),
    ("x1 + $", 5),
    ("sin(x1", 6),
    ("x1 x2", 3),
    ("", 0),
])
def test_syntax_errors_carry_position(text, position):
    with pytest.raises(MetricParseError) as info:
        parse_expression(text)
    assert info.value.position == position


def test_coordinate_beyond_dimension():
    with pytest.raises(MetricParseError, match="Unknown identifier"):
        parse_expression("x3", dim=2)


def test_metric_field_mirrors_entries():
    field = parse_metric_expression('{"g11": "exp(2*x2)", "g12": "x1", "g22": "-1"}')
    assert field.dim == 2
    g = field.evaluate([1.0, 0.0])
    assert np.allclose(g, [[1.0, 1.0], [1.0, -1.0]])
    assert field.to_dict()["g12"] == "x1"


def test_metric_numeric_values_and_mapping():
    field = parse_metric_expression({"g11": 1, "g22": -1.0})
    assert np.allclose(field.evaluate([5.0, 5.0]), np.diag([1.0, -1.0]))


def test_metric_disagreeing_pair():
    with pytest.raises(MetricParseError, match="disagree"):
        parse_metric_expression({"g12": "x1", "g21": "x2", "g11": "1"})
    agreed = parse_metric_expression({"g12": "x1*2", "g21": "2*x1", "g11": "1"})
    assert agreed.evaluate([1.0, 0.0])[1, 0] == pytest.approx(2.0)


@pytest.mark.parametrize("text", ["not json", "{}", '{"h11": "1"}', '{"g11": true}', "[1, 2]"])
def test_metric_rejects_malformed_input(text):
    with pytest.raises(MetricParseError):
        parse_metric_expression(text)


def test_metric_key_beyond_dimension():
    with pytest.raises(MetricParseError, match="exceeds dimension"):
        parse_metric_expression({"g33": "1"}, dim=2)
