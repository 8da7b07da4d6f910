import math

import numpy as np
import pytest

from frengate.errors import DomainError
from frengate.io import dumps, fmt, load_field, read_csv, save_field, sha256, write_csv
from frengate.spectral import BiphotonField, ChannelLabel, FrequencyGrid


def test_float_format_round_trips():
    for x in (0.1, 1 / 3, 1e-300, -2.5e17, math.pi):
        assert float(fmt(x)) == x
    assert fmt(math.nan) == "nan" and fmt(-math.inf) == "-inf"


def test_csv_round_trip(tmp_path):
    a = np.linspace(0, 1, 7) / 3
    b = np.exp(a)
    write_csv(tmp_path / "t.csv", ["a", "b"], [a, b])
    back = read_csv(tmp_path / "t.csv")
    assert np.array_equal(back["a"], a) and np.array_equal(back["b"], b)


def test_csv_rejects_ragged(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "t.csv", ["a", "b"], [[1, 2], [1]])


def test_json_is_sorted_and_stable():
    text = dumps({"b": 1.0, "a": [1, 2.5, None, True], "c": {"z": math.inf}})
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert '"inf"' in text
    assert dumps({"a": 0.1}) == dumps({"a": 0.1})


def test_field_round_trip_and_checksum(tmp_path):
    g = FrequencyGrid.centered(0.5, 0.49, 1e-5, 9, n_prime=7)
    rng = np.random.default_rng(0)
    v = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    f = BiphotonField(g, v, ChannelLabel.MP)
    p, side = save_field(f, tmp_path / "f.csv")
    back = load_field(p)
    assert back.grid == g and back.channel is ChannelLabel.MP
    assert np.array_equal(back.values, f.values)
    h1 = sha256(p)
    save_field(f, tmp_path / "f.csv")
    assert sha256(p) == h1


def test_load_field_detects_row_mismatch(tmp_path):
    g = FrequencyGrid.centered(0, 0, 1, 3)
    p, _ = save_field(BiphotonField(g, np.ones((3, 3))), tmp_path / "f.csv")
    lines = p.read_text().splitlines()
    p.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(DomainError):
        load_field(p)
