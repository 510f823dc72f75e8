import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from revpomdp import fixtures
from revpomdp.modelio import ModelParseError, load_model, parse_model, save_model, serialize_model


def test_sample_document_parses(noisy_pair):
    assert len(noisy_pair.states) == 2 and noisy_pair.revealing
    assert noisy_pair.initial == {"s1": Fraction(1, 2), "s2": Fraction(1, 2)}


def test_rational_tokens_are_exact():
    doc = json.loads(fixtures.R2_DOCUMENT)
    doc["transitions"][4]["prob"] = "1/3"
    doc["transitions"][5]["prob"] = "2/3"
    m = parse_model(json.dumps(doc))
    assert m.kernel[("s2", "a")][("s2", "s2")] == Fraction(1, 3)
    assert isinstance(m.kernel[("s2", "a")][("s2", "s2")], Fraction)


def test_decimal_tokens_are_exact():
    doc = json.loads(fixtures.R2_DOCUMENT)
    doc["transitions"][4]["prob"] = "0.1"
    doc["transitions"][5]["prob"] = "0.9"
    m = parse_model(json.dumps(doc))
    assert m.kernel[("s2", "a")][("s2", "s2")] == Fraction(1, 10)


def test_duplicate_entry_positioned():
    doc = json.loads(fixtures.R2_DOCUMENT)
    doc["transitions"][5] = dict(doc["transitions"][4])
    text = json.dumps(doc, indent=1)
    with pytest.raises(ModelParseError) as exc:
        parse_model(text)
    err = exc.value.errors[0]
    assert "duplicate entry" in err.message and err.line > 1


def test_duplicate_key_positioned():
    with pytest.raises(ModelParseError, match="duplicate key 'states'"):
        parse_model('{"states": ["a"],\n "states": ["b"]}')


def test_syntax_error_has_position():
    with pytest.raises(ModelParseError) as exc:
        parse_model('{"states": [\n  "a",\n  ]')
    e = exc.value.errors[0]
    assert e.line == 3 and "syntax error" in e.message


def test_semantic_error_points_at_transition():
    doc = fixtures.R2_DOCUMENT.replace('"signal":"noise","prob":"1/2"}', '"signal":"zzz","prob":"1/2"}')
    with pytest.raises(ModelParseError) as exc:
        parse_model(doc)
    e = [e for e in exc.value.errors if "zzz" in e.message][0]
    assert (e.line, e.column) == (11, 5)


def test_non_object_and_bad_utf8():
    with pytest.raises(ModelParseError, match="top level"):
        parse_model("[1, 2]")
    with pytest.raises(ModelParseError, match="UTF-8"):
        parse_model(b'{"states": ["\xff"]}')


def test_round_trip_r2(noisy_pair):
    assert parse_model(serialize_model(noisy_pair)) == noisy_pair


def test_lowest_terms_and_order():
    doc = json.loads(fixtures.R2_DOCUMENT)
    doc["transitions"][4]["prob"] = "2/4"
    doc["transitions"][5]["prob"] = "0.50"
    text = serialize_model(parse_model(json.dumps(doc)))
    assert '"prob": "1/2"' in text and "2/4" not in text and "0.50" not in text
    data = json.loads(text)
    assert data["states"] == ["s1", "s2"]
    assert text == serialize_model(parse_model(text))


def test_save_and_load(tmp_path, noisy_pair):
    path = tmp_path / "noisy_pair.json"
    save_model(noisy_pair, path)
    assert load_model(path) == noisy_pair


@given(st.binary(max_size=200))
def test_parse_is_total_on_bytes(data):
    try:
        parse_model(data)
    except ModelParseError as exc:
        assert exc.errors and all(e.line >= 1 and e.column >= 1 for e in exc.errors)


def test_deep_nesting_is_an_error():
    with pytest.raises(ModelParseError):
        parse_model("[" * 100_000)


@given(st.integers(0, 2**32))
def test_random_models_round_trip(seed):
    m = fixtures.random_revealing(random.Random(seed), 4, 3, n_noise=2)
    assert parse_model(serialize_model(m)) == m
